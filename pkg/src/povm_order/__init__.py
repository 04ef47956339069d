"""Post-processing order, Fisher-information morphisms and incompatibility tests for POVMs."""

from .dominance import HeightResult, height, height_sdp, height_two, pgm_lower_bound
from .errors import PovmOrderError, SolverError, ValidationError
from .incompat import (
    IncompatVerdict,
    ft_condition,
    joint_feasibility,
    joint_measurement,
    pgm_criterion,
    zhu_criterion,
)
from .morphisms import MorphismSpec, fisher
from .postproc import check_postprocessing, classify_order
from .povm import Povm, length, simplify, validate

__version__ = "0.1.0"

__all__ = [
    "HeightResult",
    "IncompatVerdict",
    "MorphismSpec",
    "Povm",
    "PovmOrderError",
    "SolverError",
    "ValidationError",
    "check_postprocessing",
    "classify_order",
    "fisher",
    "ft_condition",
    "height",
    "height_sdp",
    "height_two",
    "joint_feasibility",
    "joint_measurement",
    "length",
    "pgm_criterion",
    "pgm_lower_bound",
    "simplify",
    "validate",
    "zhu_criterion",
]
