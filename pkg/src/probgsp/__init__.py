"""Graph signal processing over probability distributions of shift operators."""

from .errors import NumericalError
from .opspace import OperatorSpace, ShiftOperator, convex_family, discrete_space, make_operator

__all__ = ["NumericalError", "OperatorSpace", "ShiftOperator", "convex_family", "discrete_space", "make_operator"]
__version__ = "0.1.0"
