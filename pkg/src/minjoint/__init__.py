"""Post-processing order of finite-outcome quantum observables.

Core algebra (observables, Markov kernels, joints), polyhedral machinery
(vertex and ray enumeration, LP feasibility), the general minimality
decision, and the closed-form dichotomic qubit characterization.
"""

from .errors import (
    ConsistencyError,
    EnumerationCapError,
    MinjointError,
    NumericalError,
    SimplexCycleError,
    UnboundedSystemError,
)
from .minimality import (
    BOUNDARY,
    Certificate,
    DescentResult,
    JointInstance,
    MINIMAL,
    MinimalityVerdict,
    NOT_MINIMAL,
    build_cone_system,
    build_K_system,
    build_KG_system,
    check_support_condition,
    descend_to_minimal,
    is_minimal,
    p_star,
    q_bar,
    q_star,
)
from .observables import (
    DEFAULT_TOL,
    Effect,
    MarkovKernel,
    Observable,
    Tolerance,
    ValidationReport,
    compose_kernels,
    constant_kernel,
    identity_kernel,
    is_joint_observable,
    is_postprocessing_of,
    joint_from_common,
    kernel_preserves_equivalence,
    marginal,
    pair_linearly_independent,
    pairwise_linearly_independent,
    pairwise_reduce,
    post_process,
    product_kernel,
    validate_observable,
)
from .polyhedra import (
    AffineReduction,
    Caps,
    DEFAULT_CAPS,
    LinearSystem,
    RaySet,
    VertexSet,
    affine_reduce,
    cone_is_trivial,
    cone_triviality,
    enumerate_rays,
    enumerate_vertices,
    enumeration_backend,
    lp_feasible,
)
from .qubit import (
    BlochObservable,
    JointParams,
    SpanCoefficients,
    WVector,
    bloch_to_observable,
    dep_conditions,
    joint_from_params,
    joint_positivity,
    qubit_is_minimal,
    region_scan,
    span_coefficients,
    unbiased_compatible,
    unbiased_is_minimal,
    w_vector,
    wmin_condition,
)

__version__ = "0.1.0"
