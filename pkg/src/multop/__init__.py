"""Matrix multiplication operators on discretized Banach function spaces."""

from .function_space import NormSpec, VectorFunction, norm
from .measure import MeasureSpace, refine
from .operator import analyze, is_invertible, operator_norm, spectrum
from .semigroup import generation_check, semigroup_at, solve_acp
from .symbol import SymbolFunction, TailEnvelope

__all__ = [
    "MeasureSpace",
    "NormSpec",
    "SymbolFunction",
    "TailEnvelope",
    "VectorFunction",
    "analyze",
    "generation_check",
    "is_invertible",
    "norm",
    "operator_norm",
    "refine",
    "semigroup_at",
    "solve_acp",
    "spectrum",
]

__version__ = "0.1.0"
