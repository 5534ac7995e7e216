"""quatcomp: pure-quaternion matrix completion for color image inpainting.

Core objects: quaternion matrices with four real component planes, the
complex-adjoint SVD, cross-channel weights, nuclear-norm completion
solvers for clean and noise-corrupted observations, and the experiment
harness behind the `quatcomp` command line tool.
"""

from .errors import (
    CapacityError,
    ConstructibilityError,
    DomainError,
    IllConditionedError,
    InfeasibleError,
    InternalConsistencyError,
    NumericalError,
    PurityError,
    QuatCompError,
    RepresentationError,
    ShapeMismatchError,
)
from .quat import (
    ChannelWeight,
    QMatrix,
    Quaternion,
    apply_weight,
    fro_norm,
    inner,
    inner_real,
    matmul,
    max_norm,
    norms,
    qmul,
    trace,
    two_inf_norm,
    weighted_fro_norm,
    weighted_max_norm,
)
from .adjoint import (
    QSVD,
    from_adjoint,
    nuclear_norm,
    operator_norm,
    qsvd,
    rank,
    singular_values,
    spectral_norms,
    svt,
    to_adjoint,
)
from .weights import (
    NoiseCovariance,
    combine_weights,
    lambda_rule,
    wc_decorrelate,
    weight_factors,
    ws_rebalance,
)
from .observation import (
    ObservationSet,
    SamplingScheme,
    derive_seed,
    make_observations,
    observe,
    sample_indices,
)
from .synth import gen_approx, gen_exact
from .metrics import (
    bound_curve,
    cone_bound,
    error_metrics,
    rescaled_n,
    schatten_q,
    spikiness,
)
from .solver import (
    CompletionResult,
    SolverConfig,
    complete_clean,
    complete_noisy,
    entry_qp,
    entry_qp_kkt_residual,
    project_feasible,
)

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "0.1.0"
