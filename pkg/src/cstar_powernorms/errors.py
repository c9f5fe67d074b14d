"""Exception hierarchy shared by every layer of the library."""


class CStarError(Exception):
    """Base class for all library errors."""


class ShapeError(CStarError, ValueError):
    """Operands do not conform to a descriptor, rank or block shape."""


class NotHermitianError(CStarError, ValueError):
    pass


class NotPositiveError(CStarError, ValueError):
    pass


class RankError(CStarError, ValueError):
    """Invalid rank profile requested from a sampler."""


class UnsupportedAlgebraError(CStarError, ValueError):
    """The operation is only defined for a narrower class of algebras."""


class UnsupportedKindError(CStarError, ValueError):
    pass


class FrameError(CStarError, ValueError):
    """The family is not a frame, or not normalized tight where required."""


class DecompositionVerificationError(CStarError, ArithmeticError):
    """A computed decomposition failed its own verification step."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = dict(residuals or {})


class ConstructionError(CStarError, ArithmeticError):
    """An explicit construction failed verification (indicates a bug)."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = dict(residuals or {})
