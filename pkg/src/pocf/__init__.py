"""Offline learning of Nash-stable outcomes in overlapping coalition
formation games."""

from .errors import (
    DatasetFormatError,
    EnumerationBudgetError,
    FeedbackKindError,
    InvalidActionError,
    PocfError,
    UnknownBuiltinError,
)
from .games import (
    ENUMERATION_BUDGET,
    STABILITY_TOL,
    ExactGapReport,
    GameSpec,
    MixedProfile,
    NoiseLaw,
    as_action,
    as_joint_action,
    exact_duality_gap,
    expected_utility,
    induce_partition,
    mean_utilities,
    mean_utility,
    potential,
    realized_utilities,
    sample_utilities,
    validate_joint_action,
)
from .generators import GENERATOR_KINDS, clamped_normal_mean, make_game
from .data import (
    Dataset,
    ExplorationPolicy,
    Record,
    coalition_size_densities,
    coalition_size_density,
    game_fingerprint,
    game_from_fingerprint,
    load_game,
    read_dataset,
    sample_dataset,
    save_game,
    table_game,
    write_dataset,
)
from .builtins import builtin_game, builtin_names, builtin_policy
from .oracle import (
    CertificationReport,
    DynamicsResult,
    better_response_dynamics,
    enumerate_pure_ns,
    verify_builtin,
)
from .semibandit import (
    SemiBanditEstimator,
    check_assumption1,
    coalition_size_coefficient,
    fit_semibandit,
    theoretical_bound_semibandit,
)
from .bandit import (
    RidgeEstimator,
    check_assumption2,
    co_membership_vector,
    coverage_sample_threshold,
    feature_vector,
    fit_ridge,
    one_toggle_policy,
    required_sample_size,
    stacked_true_parameter,
    theoretical_bound_bandit,
    toggle_coverage_constant,
)
from .solver import (
    ExactModel,
    GapReport,
    SolverConfig,
    optimistic_best_response,
    solve_mixed,
    solve_pure,
    surrogate_gap,
)
from .experiments import (
    ExperimentConfig,
    ResultRow,
    TrendSummary,
    gap_trend_check,
    load_config,
    run_experiment,
)

__version__ = "0.1.0"
