"""n-body dynamics on the hyperbolic upper half-plane.

The package implements the cotangent-potential n-body problem on the
half-plane model, the unimodular-matrix machinery of its isometries
(Clifford representation, ANK factorization, one-parameter subgroups and
Killing fields), the complete classification of solutions that drift along
a subgroup orbit, numeric root finding for the classes that exist, and
sampling certificates for the two classes that do not.
"""

from .clifford import (
    CliffordNumber,
    IwasawaFactors,
    KillingField,
    MobiusElement,
    NILPOTENT_N,
    NORMAL_A,
    ROTATION_ELLIPTIC,
    ROTATION_HYPERBOLIC,
    ROTATION_PARABOLIC,
    classify_subgroup,
    clifford_mul,
    exp_subgroup,
    iwasawa_decompose,
    iwasawa_reconstruct,
    killing_velocity,
    random_unimodular,
)
from .dynamics import (
    ConservedQuantities,
    PhaseTestFunction,
    SystemState,
    Trajectory,
    conserved,
    cotangent_potential,
    default_test_functions,
    eom_interaction,
    eom_rhs,
    gradient_consistency,
    integrate,
    min_pair_theta,
    theta,
    vlasov_weak_residual,
)
from .equilibria import (
    AuxLetters,
    CLASS_DRIFT,
    CyclicParams,
    EquilibriumClass,
    FindOptions,
    NonexistenceCertificate,
    aux_letters,
    certify_nonexistence,
    condition_sides,
    elliptic_pair_rate,
    equilibrium_velocity,
    find_equilibrium,
    find_equilibrium_detailed,
    hyperbolic_contradiction_sides,
    mobius_ansatz_defect,
    parabolic_contradiction_sides,
    positions_hyperbolic_cyclic,
    positions_parabolic_cyclic,
    residual_elliptic_cyclic,
    residual_hyperbolic_cyclic,
    residual_hyperbolic_normal,
    residual_parabolic_cyclic,
    residual_parabolic_nilpotent,
    theta_parametric,
    two_body_elliptic,
)
from .errors import (
    ClassNotSolvableError,
    ConvergenceError,
    DomainError,
    HnbodyError,
    PoleError,
    SingularityError,
    StepSizeError,
    ValidationError,
)
from .flows import (
    ResidualReport,
    admissible_interval,
    flow,
    flow_derivative_check,
    flow_jacobian,
    flow_samples,
    transport,
    verify_invariance,
)
from .geometry import (
    GeodesicArc,
    HalfPlanePoint,
    apply_mobius,
    conformal_factor,
    from_disk,
    geodesic_residual,
    geodesic_through,
    hyperbolic_distance,
    to_disk,
)

__version__ = "0.1.0"
