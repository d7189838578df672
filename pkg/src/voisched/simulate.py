"""Episode and experiment orchestration.

An episode evolves the true process, lets a policy pick one sensor per
slot, simulates the erasure channel, updates the Kalman belief and the
age vector, and logs the realized squared error of every tracked
statistic. Experiments replay the same noise tapes (process noise,
measurement noise, channel uniforms) across all policies, so compared
policies face identical randomness and differ only in their decisions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kalman import BeliefState, filter_step
from .model import AgeVector, ChannelOutcome, SystemModel
from .schedulers import SchedulerPolicy, _psd_factor
from .summary import (
    SummaryStatistic,
    avg_statistic,
    count_statistic,
    estimate_statistic,
    max_statistic,
    realized_error,
    var_statistic,
)

MSE = "mse"

# paper-scale experiment: 100 episodes x 1000 slots, M = 1000
PAPER_EPISODES = 100
PAPER_STEPS = 1000
PAPER_MC_SAMPLES = 1000


class SimulationError(RuntimeError):
    """Raised when a trajectory or belief goes non-finite."""


@dataclass(frozen=True)
class TrackedStatistic:
    """A quantity logged per slot: a summary statistic, or the full-state MSE."""

    name: str
    stat: SummaryStatistic | None  # None means full-state squared error


def make_tracked(names: list[str], count_interval: tuple[float, float] = (-5.0, 5.0)
                 ) -> list[TrackedStatistic]:
    tracked = []
    for name in names:
        if name == MSE:
            tracked.append(TrackedStatistic(MSE, None))
        elif name == "avg":
            tracked.append(TrackedStatistic("avg", avg_statistic()))
        elif name == "var":
            tracked.append(TrackedStatistic("var", var_statistic()))
        elif name == "max":
            tracked.append(TrackedStatistic("max", max_statistic()))
        elif name == "cnt":
            tracked.append(TrackedStatistic("cnt", count_statistic(*count_interval)))
        else:
            raise ValueError(f"unknown tracked statistic {name!r}")
    return tracked


@dataclass(frozen=True)
class NoiseTapes:
    """Pre-generated per-slot randomness shared across compared policies."""

    process: np.ndarray    # (steps, N) correlated process noise v(t)
    measurement: np.ndarray  # (steps, N) correlated measurement noise w(t)
    channel: np.ndarray    # (steps, N) uniforms; success iff u >= eps_n


def make_tapes(model: SystemModel, steps: int, rng: np.random.Generator) -> NoiseTapes:
    n = model.n_sensors
    lv = model.process_noise_chol()
    lw = _psd_factor(model.meas_noise_cov)
    return NoiseTapes(
        process=rng.standard_normal((steps, n)) @ lv.T,
        measurement=rng.standard_normal((steps, n)) @ lw.T,
        channel=rng.uniform(size=(steps, n)),
    )


@dataclass
class EpisodeLog:
    policy: str
    episode: int
    seed: int
    actions: np.ndarray          # (steps,) 1-based sensor indices
    successes: np.ndarray        # (steps,) bool
    errors: dict[str, np.ndarray]  # per tracked statistic, (steps,)
    ages: np.ndarray             # (steps, N) end-of-slot age snapshots

    @property
    def steps(self) -> int:
        return self.actions.shape[0]


def _run_with_tapes(model: SystemModel, policy: SchedulerPolicy,
                    tracked: list[TrackedStatistic], steps: int, tapes: NoiseTapes,
                    decision_rng: np.random.Generator, estimate_rng: np.random.Generator,
                    mc_samples: int, policy_label: str, episode: int, seed: int
                    ) -> EpisodeLog:
    n = model.n_sensors
    x = np.zeros(n)
    belief = BeliefState.initial(n)
    ages = AgeVector.zeros(n)
    policy.reset()

    actions = np.zeros(steps, dtype=int)
    successes = np.zeros(steps, dtype=bool)
    errors = {ts.name: np.zeros(steps) for ts in tracked}
    age_hist = np.zeros((steps, n), dtype=int)

    for t in range(1, steps + 1):
        x = model.transition @ x + tapes.process[t - 1]
        action = policy.choose(belief, ages, model, decision_rng)
        success = bool(tapes.channel[t - 1, action - 1] >= model.erasure_prob[action - 1])
        if success:
            y = float(x[action - 1] + tapes.measurement[t - 1, action - 1])
            outcome = ChannelOutcome(True, y)
        else:
            outcome = ChannelOutcome(False)
        belief = filter_step(belief, model, action, outcome)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(belief.mean))
                and np.all(np.isfinite(belief.covariance))):
            raise SimulationError(
                f"non-finite state at t={t} (policy {policy_label}, episode {episode})")
        ages = ages.advance(action, success)

        actions[t - 1] = action
        successes[t - 1] = success
        age_hist[t - 1] = ages.ages
        for ts in tracked:
            if ts.stat is None:
                errors[MSE][t - 1] = float(np.sum((x - belief.mean) ** 2))
            else:
                z_hat = estimate_statistic(ts.stat, belief, mc_samples, estimate_rng)
                errors[ts.name][t - 1] = realized_error(ts.stat, x, z_hat)

    return EpisodeLog(policy=policy_label, episode=episode, seed=seed,
                      actions=actions, successes=successes, errors=errors, ages=age_hist)


def run_episode(model: SystemModel, policy: SchedulerPolicy,
                tracked: list[TrackedStatistic], steps: int, seed: int,
                mc_samples: int = 1000, episode: int = 0) -> EpisodeLog:
    """Run one self-seeded episode (tapes and streams derived from `seed`)."""
    tapes = make_tapes(model, steps, np.random.default_rng([seed, episode]))
    decision_rng = np.random.default_rng([seed, episode, 1000])
    estimate_rng = np.random.default_rng([seed, episode, 7])
    return _run_with_tapes(model, policy, tracked, steps, tapes, decision_rng,
                           estimate_rng, mc_samples, policy.name, episode, seed)


@dataclass
class ExperimentConfig:
    model: SystemModel
    policies: list[SchedulerPolicy]
    tracked: list[TrackedStatistic]
    episodes: int
    steps: int
    mc_samples: int = 1000
    seed: int = 0
    scenario_name: str = "custom"

    def __post_init__(self):
        if not self.policies:
            raise ValueError("at least one policy is required")
        if not self.tracked:
            raise ValueError("at least one tracked statistic is required")
        if self.episodes < 1 or self.steps < 0:
            raise ValueError("episodes must be >= 1 and steps >= 0")

    def policy_labels(self) -> list[str]:
        """Stable per-run labels; duplicate policy names get a numeric suffix."""
        labels, seen = [], {}
        for p in self.policies:
            count = seen.get(p.name, 0) + 1
            seen[p.name] = count
            labels.append(p.name if count == 1 else f"{p.name}_{count}")
        return labels


@dataclass
class ExperimentResults:
    config: ExperimentConfig
    logs: list[EpisodeLog]
    selection_counts: dict[str, np.ndarray] = field(init=False)
    cdfs: dict[tuple[str, str], tuple[np.ndarray, np.ndarray]] = field(init=False)

    def __post_init__(self):
        n = self.config.model.n_sensors
        labels = self.config.policy_labels()
        counts = {label: np.zeros(n, dtype=int) for label in labels}
        pooled: dict[tuple[str, str], list[np.ndarray]] = {}
        for log in self.logs:
            counts[log.policy] += np.bincount(log.actions - 1, minlength=n)
            for name, errs in log.errors.items():
                pooled.setdefault((log.policy, name), []).append(errs)
        self.selection_counts = counts
        self.cdfs = {key: empirical_cdf(np.concatenate(chunks))
                     for key, chunks in pooled.items()}

    def mean_errors(self) -> dict[tuple[str, str], float]:
        out = {}
        for (policy, name), (values, _) in self.cdfs.items():
            out[(policy, name)] = float(np.mean(values))
        return out

    def median_errors(self) -> dict[tuple[str, str], float]:
        out = {}
        for (policy, name), (values, _) in self.cdfs.items():
            out[(policy, name)] = float(np.median(values))
        return out


def empirical_cdf(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sorted values with cumulative fractions k/n."""
    ordered = np.sort(np.asarray(values, dtype=float))
    if ordered.size == 0:
        return ordered, np.zeros(0)
    fractions = np.arange(1, ordered.size + 1) / ordered.size
    return ordered, fractions


def run_experiment(config: ExperimentConfig) -> ExperimentResults:
    """Run episodes x policies under common random numbers and aggregate."""
    labels = config.policy_labels()
    logs: list[EpisodeLog] = []
    for ep in range(config.episodes):
        tapes = make_tapes(config.model, config.steps,
                           np.random.default_rng([config.seed, ep]))
        for p_idx, policy in enumerate(config.policies):
            decision_rng = np.random.default_rng([config.seed, ep, 1000 + p_idx])
            estimate_rng = np.random.default_rng([config.seed, ep, 7])
            logs.append(_run_with_tapes(
                config.model, policy, config.tracked, config.steps, tapes,
                decision_rng, estimate_rng, config.mc_samples,
                labels[p_idx], ep, config.seed))
    return ExperimentResults(config=config, logs=logs)
