"""Numerical laboratory for discretizations of expanding circle maps."""
from .exceptions import (ConvergenceError, DimensionMismatch, ErgolabError, InvalidSpec, InvalidState,
                         NoConvergence, NotExpanding, StoreCorruption)
from .expanding_map import MapParams, check_expanding, derivative, evaluate, iterate, preimages
from .grid import DiscretizedMap, Particles, Scheme, SchemeKind, discretize, embed, project, round_split
from .measure import (AtomicMeasure, GridMeasure, PiecewiseDensity, cramer, cramer_sq, inner_jump, lebesgue,
                      pushforward_table, wasserstein1, zero_identity_check)
from .transfer_op import TransferOperator

__version__ = "0.1.0"

__all__ = [
    "AtomicMeasure", "ConvergenceError", "DimensionMismatch", "DiscretizedMap", "ErgolabError",
    "GridMeasure", "InvalidSpec", "InvalidState", "MapParams", "NoConvergence", "NotExpanding",
    "Particles", "PiecewiseDensity", "Scheme", "SchemeKind", "StoreCorruption", "TransferOperator",
    "check_expanding", "cramer", "cramer_sq", "derivative", "discretize", "embed", "evaluate",
    "inner_jump", "iterate", "lebesgue", "preimages", "project", "pushforward_table", "round_split",
    "wasserstein1", "zero_identity_check",
]
