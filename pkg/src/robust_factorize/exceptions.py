"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Operands have incompatible dimensions."""


class NumericError(ArithmeticError):
    """A computation produced (or would produce) a non-finite value."""


class DataError(ValueError):
    """Input data could not be read or violates a data invariant."""
