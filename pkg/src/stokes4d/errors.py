"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


class DegeneratePhaseError(ValueError):
    """A phase is undefined because one of the magnitudes involved is zero."""


class DeepFadeError(ValueError):
    """The fourth-dimension fading coefficient is (numerically) zero, so the
    inter-slot phase cannot be recovered."""


class InconsistentQuadrupleError(ValueError):
    """An intensity quadruple does not correspond to any physical field pair
    (e.g. negative recovered intensity beyond tolerance)."""


class UnbracketedTargetError(ValueError):
    """A target error rate is not bracketed by the swept curve."""
