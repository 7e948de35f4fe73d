"""Exception hierarchy shared by all modules."""


class IrregSpecError(Exception):
    """Base class for every error raised by irregspec."""


class DegenerateGrid(IrregSpecError, ValueError):
    """Fewer than two samples, or a geometry that cannot support a grid."""


class DuplicatePositions(IrregSpecError, ValueError):
    """Two sample positions coincide (or nearly coincide)."""


class WindowTooShort(IrregSpecError, ValueError):
    """The periodic window does not strictly exceed the sample span."""


class GenerationFailed(IrregSpecError, RuntimeError):
    """Jittered grid generation could not avoid collisions."""


class LengthMismatch(IrregSpecError, ValueError):
    pass


class ShapeMismatch(IrregSpecError, ValueError):
    pass


class NonHermitianInput(IrregSpecError, ValueError):
    pass


class NotPositiveDefinite(IrregSpecError, ArithmeticError):
    """Levinson breakdown or failed Cholesky: the operator is not numerically PD."""


class PcgDidNotConverge(IrregSpecError, RuntimeError):
    """The iteration cap was reached before the residual tolerance.

    The best iterate found is attached so callers can still use it.
    """

    def __init__(self, message, best=None, iterations=0, residual=float("nan")):
        super().__init__(message)
        self.best = best
        self.iterations = iterations
        self.residual = residual


class NoClosedForm(IrregSpecError, ValueError):
    pass


class MissingReference(IrregSpecError, ValueError):
    pass


class OffGridFrequency(IrregSpecError, ValueError):
    pass
