"""Structured low-rank approximation via dual ascent on matrix subspaces.

Rank-penalized least-squares objectives are minimized over linear matrix
subspaces (chiefly Hankel) by plain, augmented and variable-step dual
ascent, with closed-form primal updates through the singular value
functional calculus.
"""

from .envelope import (
    DegenerateSingularValueWarning,
    RankObjective,
    ToyObjective,
    toy_conjugate,
    toy_tilted_minimizers,
)
from .esprit import EspritEstimate, esprit_estimate, esprit_hankel_error
from .matops import (
    SvdFactors,
    apply_svfc,
    f_alpha,
    f_hard,
    frobenius_inner,
    frobenius_norm,
    numerical_rank,
    svd,
)
from .signals import (
    NoiseSpec,
    SignalModel,
    add_noise,
    four_tone_model,
    gen_cos_sum,
    sample_signal,
    sigma0_heuristic,
    signal_to_hankel,
)
from .solvers import (
    ADA,
    DA,
    MOD_ADA,
    SolverConfig,
    SolverResult,
    SolverTrace,
    StepSchedule,
    ada_rate_report,
    check_lambda_bound,
    run,
    validate_schedule,
)
from .subspace import (
    HankelSubspace,
    SubspaceOp,
    ZeroSubspace,
    complement_project,
    hankel_from_vector,
    hankel_project,
    vector_from_hankel,
)

__version__ = "0.1.0"
