"""Data-driven satisficing risk indices, rankings, and validity bounds.

A batch of scalar loss observations plus a target maps to an index in
[0, 1]; items rank by index; the validation layer quantifies how much to
trust the computed ranking, offline (sample-size bounds) and online
(iteration bounds).
"""

from .batch_solver import (
    BatchSolution,
    cvar_satisficing_direct,
    rank_batch,
    satisficing_binary_search,
    solve_items,
)
from .data_io import (
    DistributionFamily,
    DistributionSpec,
    SplitMix64Stream,
    generate_synthetic,
    load_batches,
    parse_distribution,
    stream_observations,
    write_batches,
)
from .divergence import (
    DivergenceKind,
    DivergenceSpec,
    conjugate_domain,
    conjugate_subgradient,
    conjugate_value,
)
from .online_solver import (
    OnlineResult,
    OnlineState,
    convergence_diagnostic,
    initial_state,
    lagrangian_realization,
    run,
    step,
    subgradient,
)
from .ranking import (
    RankingReport,
    gumbel_cdf,
    inversion_loss,
    loss_bound_probability,
    rank_items,
)
from .risk_core import (
    ALPHA_MIN,
    InnerSolveResult,
    ItemBatch,
    RegretScaling,
    cvar_closed_form,
    empirical_oce_risk,
    regret_scale,
)
from .validation import (
    BoundParams,
    LowerBoundReport,
    SampleSizeResult,
    UpperBoundReport,
    estimate_dual,
    lower_bound_estimate,
    normal_quantile,
    ranking_validity_probability,
    required_sample_size,
    shrinking_upper_bound,
    solve_lagrangian,
    upper_bound_check,
)

__version__ = "0.1.0"
