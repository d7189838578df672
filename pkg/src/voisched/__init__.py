"""Value-of-information-aware sensor polling over an erasure channel.

A base station tracks a linear-Gaussian vector process with a Kalman
filter fed by one scalar sensor reading per slot, and per-slot schedulers
pick the sensor that minimizes the one-step expected squared error of a
chosen summary statistic (mean, sample variance, maximum, interval count)
or of the full state.
"""

from .kalman import BeliefState, filter_step, posterior_update, prior_update
from .model import (
    AgeVector,
    ChannelOutcome,
    GroundTruth,
    SystemModel,
    build_preset,
    build_scenario_1,
    build_scenario_2,
    observe,
    step_process,
    validate_model,
)
from .schedulers import (
    MafPolicy,
    MonteCarloPolicy,
    RoundRobinPolicy,
    SchedulerPolicy,
    avg_opt_policy,
    expected_error_for_action,
    mse_opt_policy,
    schedule_closed_form,
    schedule_maf,
    schedule_monte_carlo,
    var_opt_policy,
)
from .simulate import (
    EpisodeLog,
    ExperimentConfig,
    ExperimentResults,
    run_episode,
    run_experiment,
)
from .summary import (
    SummaryStatistic,
    avg_statistic,
    centering_matrix,
    count_statistic,
    custom_statistic,
    estimate_statistic,
    eval_statistic,
    expected_err_avg,
    expected_err_mse,
    expected_err_var,
    max_statistic,
    realized_error,
    var_statistic,
)
