"""Normal forms and KAM iteration for quasi-periodic reversible cylinder maps."""

__version__ = "0.1.0"

from .diophantine import (
    DiophantineParams,
    best_constant,
    check_condition,
    check_oscillator_condition,
)
from .errors import (
    AngleMonotonicityLost,
    FitIllConditioned,
    FrequencyMismatch,
    InvalidEntry,
    InvalidFrequency,
    NonPositiveMultiplier,
    NormkamError,
    NotInImage,
    NotNearIdentity,
    ObstructionDetected,
    OrderDoublingFailure,
    ParityViolation,
    SmallDivisor,
    StepUnderflow,
)
from .homological import (
    apply_difference,
    even_part,
    half_turn_reflect,
    odd_part,
    parity_of_solution,
    solve_difference,
    symmetrize_parity,
)
from .normalform import (
    KamSchedule,
    KamTolerances,
    NearIdentityTransform,
    ReversibleCylinderMap,
    birkhoff_reduce,
    check_reversibility,
    compose_transforms,
    conjugate_map,
    conjugated_rotation,
    invert_transform,
    kam_iterate,
    kam_step,
)
from .series import (
    FourierTaylorSeries,
    StripDomain,
    compose_map,
    l1_norm,
    make_series,
    multiply,
    project_mean,
    project_zero_mean,
    reflect_angle,
    shift_angle,
    strip_norm,
)
