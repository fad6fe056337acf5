"""Exception types shared across the package (and mapped to CLI exit codes)."""


class InputError(ValueError):
    """Malformed data: wrong shapes, non-permutation rankings, bad CSV."""


class ConfigError(ValueError):
    """Invalid parameters: kernel settings, regularization, levels."""


class NumericalError(ArithmeticError):
    """A factorization or solve failed its residual check."""
