"""Exception types raised across the package."""


class InputError(ValueError):
    """Malformed or out-of-range input (bad atoms, weights, family sizes)."""


class PreconditionError(ValueError):
    """An operation was called outside the domain where it is defined."""


class NotAbsolutelyContinuousError(PreconditionError):
    pass


class NotIntegrableError(ArithmeticError):
    """NEG_INF was met on an atom carrying positive mass."""


class InconsistentFamilyError(PreconditionError):
    """Raised by :func:`quasisure.expectation.aggregate`.

    ``witness`` is a ``(theta_index, psi_index, atom)`` triple locating a
    disagreement on the intersection of the two minimal supports.
    """

    def __init__(self, message, witness):
        super().__init__(message)
        self.witness = witness
