"""Bell-test thresholds, post-selection and distillation yields for noisy W, GHZ and G states."""

from .bell_tests import (
    Family,
    TestKind,
    ThresholdReport,
    find_crossover,
    functional_qm_norm,
    max_wwzb_statistic,
    max_xy_sector_sum,
    threshold_functional_ghz,
    threshold_g_crit,
    threshold_ghz,
    threshold_sufficient_w,
    threshold_w_conditioned,
    wwzb_statistic,
    wwzb_threshold,
    xy_sector_sum,
)
from .conditioning import (
    ConditioningOutcome,
    acceptance_probability_g,
    acceptance_probability_w,
    condition_g_on_z,
    condition_ghz_pm_basis,
    condition_on_z,
    vis_g_n_to_2,
    vis_w_n_to_2,
    vis_w_n_to_n_minus_1,
)
from .distillation import (
    BellTarget,
    WernerState,
    YieldReport,
    channel_visibility_for_target,
    hashing_yield,
    one_way_yield_ghz,
    one_way_yield_w,
    recurrence_step,
    separable_ball_radius,
    two_way_yield,
    werner_entropy,
    werner_separable,
    witness_bound_w,
    yield_report,
)
from .errors import (
    DegenerateConditioningError,
    InvalidArgumentError,
    NoProgressError,
    OptimizerWarning,
    SolverError,
    WghzError,
)
from .lhv_polytope import (
    LhvVerdict,
    LocalPolytopeProblem,
    critical_visibility,
    enumerate_deterministic_strategies,
    lhv_feasible,
    lhv_threshold,
    quantum_probability_table,
)
from .quantum_core import (
    CorrelationTensor,
    DensityMatrix,
    LocalFrame,
    MeasurementSetting,
    NoisyState,
    PureState,
    correlation_tensor,
    make_g_state,
    make_ghz_state,
    make_w_bar_state,
    make_w_state,
    mix_with_white_noise,
    reconstruct_density_matrix,
    rotate_tensor,
)

__version__ = "0.1.0"
