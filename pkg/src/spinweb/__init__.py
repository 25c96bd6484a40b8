"""Spin-network projector calculus on SU(2) and piecewise linear webs."""

from .errors import DomainError, InputError, NumericalError, UnsupportedInputError

__all__ = ["DomainError", "InputError", "NumericalError", "UnsupportedInputError"]
