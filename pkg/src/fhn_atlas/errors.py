"""Exception hierarchy shared by every module of the atlas."""


class AtlasError(Exception):
    """Base class for all computational failures raised by the package."""


class DomainError(AtlasError, ValueError):
    """A quantity was requested outside the domain where it is defined."""


class RootFindingFailure(AtlasError):
    pass


class NotAnEquilibrium(AtlasError, ValueError):
    pass


class NotOnHopfCurve(AtlasError, ValueError):
    pass


class DegenerateCenterManifold(AtlasError):
    pass


class CenterManifoldOrderTooHigh(AtlasError):
    pass


class CycleProbeTimeout(AtlasError):
    pass


class StepSizeUnderflow(AtlasError):
    """Adaptive step fell below the floating-point spacing of ``t``.

    Usually means the problem is too stiff for an explicit pair; the
    slow-fast harness in :mod:`fhn_atlas.slowfast` uses an implicit method.
    """


class NoCycleFound(AtlasError):
    pass


class SeparatrixEscaped(AtlasError):
    pass


class SectionNotReached(AtlasError):
    """A shooting orbit did not reach its section within the time budget."""


class StiffnessBudgetExceeded(AtlasError):
    pass


class ChainMismatch(AtlasError):
    """A blow-up step failed its pointwise consistency check."""

    def __init__(self, step_index, residual, message=None):
        self.step_index = step_index
        self.residual = residual
        super().__init__(
            message or f"blow-up step {step_index} residual {residual:.3e}")
