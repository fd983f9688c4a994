"""Numerical amplitude calculus for sl_N-valued Fuchsian systems.

Parallel transport and monodromy of d/dx Psi = A(x) Psi with simple poles,
amplitudes built from M(x.E) = Psi E Psi^{-1} on the flag-algebra bundle,
Casimir amplitudes with plain and normal-ordered regularizations, and the
cycle calculus (boundaries, intersection form, regularized periods,
Malgrange-form cycles).
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    CalculusError,
    ClearanceViolation,
    IllConditionedSplit,
    InvalidSystem,
    NonGenericElement,
    NonTransversal,
    NoConvergence,
    ResonantSystem,
    StepSizeUnderflow,
    TooCloseToPuncture,
    TooManyPoints,
)
from .lie import (  # noqa: F401
    CartanData,
    CasimirTensor,
    LieAlgebraBasis,
    build_sl,
    casimir_tensor,
    killing,
    root_decomposition,
)
from .system import (  # noqa: F401
    FuchsianSystem,
    ValidationReport,
    load_system,
    make_system,
    validate,
)
from .transport import (  # noqa: F401
    BundlePoint,
    GeneratorLayout,
    LocalFrame,
    LoopWord,
    Path,
    TransportResult,
    evaluate_M,
    generator_monodromies,
    layout,
    local_frame,
    monodromy,
    point_route,
    realize,
    transport,
)
from .amplitudes import (  # noqa: F401
    AmplitudeRequest,
    CasimirAmplitudeRequest,
    casimir_amplitude,
    direct_rational_W2C2,
    evaluate_amplitude,
    evaluate_casimir,
    extract_charges,
    kernel,
    normal_ordered_casimir_amplitude,
    normal_ordered_casimir_quadrature,
    puncture_asymptotics_check,
    rational_fit_residual,
    short_distance_check,
    w_connected,
    w_disconnected,
)
