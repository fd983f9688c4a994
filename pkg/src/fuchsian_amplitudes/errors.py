"""Exception types shared across the package."""


class CalculusError(Exception):
    """Base class for all errors raised by this package."""


class NonGenericElement(CalculusError):
    """Element is not regular semisimple (degenerate ad-spectrum)."""


class InvalidSystem(CalculusError):
    """System failed validation; downstream operations are blocked."""


class ResonantSystem(CalculusError):
    """Two residue eigenvalues differ by a nonzero integer."""


class TooCloseToPuncture(CalculusError):
    """Evaluation point violates the clearance radius around a puncture."""


class ClearanceViolation(CalculusError):
    """A path segment comes closer to a puncture than the clearance."""


class StepSizeUnderflow(CalculusError):
    """Adaptive ODE stepper could not meet the tolerance."""


class NoConvergence(CalculusError):
    """Limit/extrapolation sequence failed its consistency check."""


class TooManyPoints(CalculusError):
    """Amplitude evaluation requested for more points than supported."""


class NonTransversal(CalculusError):
    """Curve crossing could not be made transversal after perturbation."""


class IllConditionedSplit(CalculusError):
    """Commutant / image splitting is numerically rank-deficient."""
