"""Cost of biased leader election on a channel with ternary feedback.

Exact recurrences, the interval decomposition of the cost distribution, the
periodic asymptotic expansion of the mean, a protocol simulator and Monte
Carlo estimators built on the random split chain.
"""

__version__ = "0.1.0"

from .splitchain import (
    DEFAULT_MAX_STEPS,
    TRUNCATED,
    HittingTimes,
    SplitChain,
    SplitParams,
    SplitStep,
    advance,
    hitting_times,
    jump_indices,
    sample_step,
    walk,
    walk_batch,
)
from .protocol import (
    ChannelFeedback,
    ElectionTrace,
    Feedback,
    Status,
    run_election,
    run_round,
    simulate_costs,
)
from .exact import (
    exact_cdf_dp,
    exact_mean,
    exact_mean_table,
    poisson_transform_fixpoint,
    poisson_transform_series,
    survival_table,
    tail_sum_mean,
)
from .intervals import build_intervals, cdf_exact, measure, poisson_cdf, shared_levels, tail_approx
from .asymptotics import (
    QuadConfig,
    QuadratureError,
    asymptotic_mean,
    big_F,
    const_term,
    lemma_terms,
    omega_indicator,
    residual_exponent,
    rho,
)
from .montecarlo import (
    Estimate,
    mc_conjecture,
    mc_lemma_check,
    mc_mean_cost_via_tau,
    mc_protocol_mean,
    sample_order_stats,
)
