"""Exception types raised by the walk toolkit."""


class CycleWalkError(Exception):
    """Base class for every error raised by the toolkit."""


class WindowOverflowError(CycleWalkError):
    """Amplitude would leave the finite simulation window.

    Attributes:
        step: Time index of the step that overflowed (``None`` when unknown)
        amplitude: Largest amplitude that would have been sent out of the window
    """

    def __init__(self, amplitude: float, step: int | None = None):
        self.amplitude = amplitude
        self.step = step
        where = f" at step {step}" if step is not None else ""
        super().__init__(
            f"Window overflow{where}: amplitude {amplitude:.3e} reached the window boundary"
        )

    def at_step(self, step: int) -> "WindowOverflowError":
        return WindowOverflowError(self.amplitude, step)


class DegeneratePointError(CycleWalkError):
    """Eigenvector requested at a band edge where the spectral lift vanishes."""


class InvalidPathError(CycleWalkError, ValueError):
    """Arc sequence is not a closed path."""


class StateFileError(CycleWalkError):
    """State file could not be read or failed validation."""


class QuadratureError(CycleWalkError):
    """Quadrature grid too coarse for the requested accuracy."""
