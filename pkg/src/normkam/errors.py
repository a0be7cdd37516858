"""Exception types shared across the package."""


class NormkamError(Exception):
    """Base class for all domain errors raised by this package."""


class InvalidEntry(NormkamError):
    """A coefficient entry violates the declared truncation cutoffs."""


class InvalidFrequency(NormkamError):
    """Frequency vector is empty or contains a zero entry."""


class FrequencyMismatch(NormkamError):
    """Two series do not share frequency vector or truncation cutoffs."""


class NotNearIdentity(NormkamError):
    """A substitution series has nonzero radial order-0 part."""


class NotInImage(NormkamError):
    """Right-hand side of the difference equation has a nonzero mean part."""


class SmallDivisor(NormkamError):
    """A divisor fell below the admissible lower bound."""

    def __init__(self, mode, divisor, bound):
        self.mode = mode
        self.divisor = divisor
        self.bound = bound
        super().__init__(
            f"divisor {divisor:.3e} at mode {mode} below bound {bound:.3e}"
        )


class ParityViolation(NormkamError):
    """Solution parity does not match what the right-hand side symmetry implies."""


class NonPositiveMultiplier(NormkamError):
    """Order-1 radial multiplier is not positive on the sampling grid."""


class ObstructionDetected(NormkamError):
    """Nonzero mean part found where formal linearizability forbids one.

    This signals a twist-type term in the map, not a software failure;
    callers should switch to twist analysis.
    """

    def __init__(self, order, value, mean_norm=None):
        self.order = order
        self.value = value
        self.mean_norm = mean_norm
        super().__init__(f"obstructing mean term at order {order}: {value:.6e}")


class OrderDoublingFailure(NormkamError):
    """Residual coefficients below the doubled order exceed tolerance."""


class StepUnderflow(NormkamError):
    """Integrator step size collapsed below machine spacing."""


class AngleMonotonicityLost(NormkamError):
    """Polar angle stopped increasing along the orbit (r too small)."""


class FitIllConditioned(NormkamError):
    """Regression abscissae too narrow to resolve the twist slope."""
