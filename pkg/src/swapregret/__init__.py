"""Regret minimization in repeated two-player matrix games.

Implements a swap-deviation learner (sampled perturbed-leader updates over
pair deviations, playing sparse fixed points of the sampled mixture), a
follow-the-perturbed-leader external baseline, regret and equilibrium-gap
metrics, and an experiment harness with delimited output and rendered
figures.
"""

__version__ = "0.1.0"

from .deviations import (
    CumulativeDeviationGradient,
    DeviationGradient,
    DeviationWeights,
    apply_mixture,
    apply_mixture_sparse,
    apply_pair,
    evaluate_loss,
    loss_gradient,
    mixture_matrix,
    residual_l1,
)
from .errors import ConfigurationError, SolverFailure
from .fixed_point import (
    build_restricted_residual,
    extract_support,
    fixed_point,
    power_iteration_oracle,
    solve_l1,
)
from .games import (
    MatchHistory,
    MixedStrategy,
    RewardMatrix,
    named_game,
    payoff,
    payoff_vector,
    sample_action,
    strategy_coordinate,
)
from .learners import (
    BestResponsePolicy,
    ExternalFTPLLearner,
    FixedMixedPolicy,
    InternalRegretLearner,
    MatchResult,
    ReplayPolicy,
    run_match,
    uniform_policy,
)
from .metrics import (
    CorrelatedEqGap,
    JointEmpirical,
    RegretReport,
    build_report,
    ce_epsilon,
    ce_epsilon_curve,
    external_regret,
    internal_regret,
    phi_regret,
)
from .perturbation import (
    OracleQuery,
    default_eta,
    exact_softmax_mixture,
    exact_softmax_probs,
    gumbel_from_uniform,
    gumbel_sample,
    pure_external_oracle,
    pure_internal_oracle,
    sampled_mixture,
    smooth_external_oracle,
    smooth_internal_oracle,
    softmax,
)

__all__ = [name for name in dir() if not name.startswith("_")]
