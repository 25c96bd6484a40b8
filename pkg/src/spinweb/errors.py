"""Exception types shared by the library and mapped to CLI exit codes."""


class InputError(ValueError):
    """Malformed or inconsistent input (wrong lengths, bad file contents)."""


class DomainError(ValueError):
    """A documented precondition of an operation does not hold."""


class UnsupportedInputError(TypeError):
    """The input is well formed but outside what this library can integrate."""


class NumericalError(ArithmeticError):
    """Non-finite values or a failed numerical self-check."""
