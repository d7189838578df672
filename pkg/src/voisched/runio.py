"""Config files and on-disk result formats.

Configs are JSON; results are written as three CSV files (steps.csv,
selection.csv, cdf.csv) plus summary.json. All writes are atomic
(temp file then rename) and byte-deterministic for a given config.
"""

from __future__ import annotations

import gzip as gzip_mod
import json
import os
from dataclasses import dataclass
from importlib.metadata import PackageNotFoundError, version

import numpy as np

from .model import SystemModel, build_preset
from .schedulers import (
    MafPolicy,
    MonteCarloPolicy,
    RoundRobinPolicy,
    SchedulerPolicy,
    avg_opt_policy,
    mse_opt_policy,
    var_opt_policy,
)
from .simulate import ExperimentConfig, ExperimentResults, make_tracked
from .summary import avg_statistic, count_statistic, max_statistic, var_statistic

try:
    ARTIFACT_VERSION = version("voisched")
except PackageNotFoundError:  # running from a source tree
    ARTIFACT_VERSION = "0.1.0"

POLICY_NAMES = ("mse_opt", "avg_opt", "var_opt", "mc_max", "mc_cnt", "mc_avg",
                "mc_var", "maf", "round_robin")
STATISTIC_NAMES = ("mse", "avg", "var", "max", "cnt")

_CONFIG_KEYS = {"scenario", "episodes", "steps", "mc_samples", "seed",
                "policies", "statistics", "count_interval", "output_dir"}
_SCENARIO_KEYS = {"transition", "process_noise_cov", "meas_noise_cov", "erasure_prob"}

DEFAULT_POLICIES = ["mse_opt", "avg_opt", "var_opt", "mc_max", "mc_cnt", "maf"]
DEFAULT_STATISTICS = ["mse", "avg", "var", "max", "cnt"]


class ConfigError(ValueError):
    """Ill-formed or inconsistent configuration."""


def make_policy(name: str, mc_samples: int,
                count_interval: tuple[float, float]) -> SchedulerPolicy:
    if name == "mse_opt":
        return mse_opt_policy()
    if name == "avg_opt":
        return avg_opt_policy()
    if name == "var_opt":
        return var_opt_policy()
    if name == "mc_max":
        return MonteCarloPolicy(max_statistic(), mc_samples, name="mc_max")
    if name == "mc_cnt":
        return MonteCarloPolicy(count_statistic(*count_interval), mc_samples, name="mc_cnt")
    if name == "mc_avg":
        return MonteCarloPolicy(avg_statistic(), mc_samples, name="mc_avg")
    if name == "mc_var":
        return MonteCarloPolicy(var_statistic(), mc_samples, name="mc_var")
    if name == "maf":
        return MafPolicy()
    if name == "round_robin":
        return RoundRobinPolicy()
    raise ConfigError(f"unknown policy {name!r}; choose from {POLICY_NAMES}")


@dataclass
class LoadedConfig:
    experiment: ExperimentConfig
    output_dir: str
    scenario_name: str


def default_config_dict(preset: str = "paper1") -> dict:
    """Desk-scale configuration used when only a preset is given."""
    return {
        "scenario": preset,
        "episodes": 10,
        "steps": 200,
        "mc_samples": 300,
        "seed": 1,
        "policies": list(DEFAULT_POLICIES),
        "statistics": list(DEFAULT_STATISTICS),
        "count_interval": [-5.0, 5.0],
        "output_dir": "out",
    }


def paper_scale_config_dict(preset: str = "paper1") -> dict:
    """The full-size experiment: 100 episodes x 1000 slots, M = 1000."""
    cfg = default_config_dict(preset)
    cfg.update(episodes=100, steps=1000, mc_samples=1000)
    return cfg


def _build_model(scenario) -> tuple[SystemModel, str]:
    if isinstance(scenario, str):
        try:
            return build_preset(scenario), scenario
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if isinstance(scenario, dict):
        unknown = set(scenario) - _SCENARIO_KEYS
        if unknown:
            raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
        missing = _SCENARIO_KEYS - set(scenario)
        if missing:
            raise ConfigError(f"scenario missing keys: {sorted(missing)}")
        eps = np.asarray(scenario["erasure_prob"], dtype=float)
        try:
            model = SystemModel(
                n_sensors=eps.shape[0],
                transition=scenario["transition"],
                process_noise_cov=scenario["process_noise_cov"],
                meas_noise_cov=scenario["meas_noise_cov"],
                erasure_prob=eps,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return model, "custom"
    raise ConfigError("scenario must be a preset name or an inline matrix block")


def parse_config(raw: dict) -> LoadedConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("scenario", "episodes", "steps", "seed", "policies", "statistics"):
        if key not in raw:
            raise ConfigError(f"missing config key {key!r}")
    model, scenario_name = _build_model(raw["scenario"])
    episodes, steps, seed = raw["episodes"], raw["steps"], raw["seed"]
    mc_samples = raw.get("mc_samples", 1000)
    for key, value in (("episodes", episodes), ("steps", steps), ("mc_samples", mc_samples)):
        if not isinstance(value, int) or value < 1:
            raise ConfigError(f"{key} must be a positive integer")
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    interval = tuple(raw.get("count_interval", [-5.0, 5.0]))
    if len(interval) != 2 or interval[0] > interval[1]:
        raise ConfigError("count_interval must be [a, b] with a <= b")
    policy_names = raw["policies"]
    stat_names = raw["statistics"]
    if not isinstance(policy_names, list) or not policy_names:
        raise ConfigError("policies must be a non-empty list")
    if not isinstance(stat_names, list) or not stat_names:
        raise ConfigError("statistics must be a non-empty list")
    for name in stat_names:
        if name not in STATISTIC_NAMES:
            raise ConfigError(f"unknown statistic {name!r}; choose from {STATISTIC_NAMES}")
    policies = [make_policy(name, mc_samples, interval) for name in policy_names]
    try:
        experiment = ExperimentConfig(
            model=model,
            policies=policies,
            tracked=make_tracked(stat_names, interval),
            episodes=episodes,
            steps=steps,
            mc_samples=mc_samples,
            seed=seed,
            scenario_name=scenario_name,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return LoadedConfig(experiment=experiment, output_dir=raw.get("output_dir", "out"),
                        scenario_name=scenario_name)


def read_config_dict(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None


def load_config(path: str) -> LoadedConfig:
    return parse_config(read_config_dict(path))


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _atomic_write(path: str, text: str, gzip: bool = False) -> str:
    if gzip:
        path = path + ".gz"
    tmp = path + ".tmp"
    if gzip:
        # fixed mtime in the gzip header keeps reruns byte-identical
        with gzip_mod.GzipFile(tmp, "wb", mtime=0) as fh:
            fh.write(text.encode("utf-8"))
    else:
        with open(tmp, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    os.replace(tmp, path)
    return path


def write_steps_csv(path: str, results: ExperimentResults, gzip: bool = False) -> str:
    names = [ts.name for ts in results.config.tracked]
    lines = ["episode,t,policy,action,success," + ",".join(f"nu_{n}" for n in names)]
    for log in results.logs:
        for i in range(log.steps):
            errs = ",".join(_fmt(log.errors[n][i]) for n in names)
            lines.append(f"{log.episode},{i + 1},{log.policy},{log.actions[i]},"
                         f"{int(log.successes[i])},{errs}")
    return _atomic_write(path, "\n".join(lines) + "\n", gzip)


def write_selection_csv(path: str, results: ExperimentResults, gzip: bool = False) -> str:
    lines = ["policy,sensor,count"]
    for label in results.config.policy_labels():
        counts = results.selection_counts[label]
        for sensor in range(1, counts.shape[0] + 1):
            lines.append(f"{label},{sensor},{counts[sensor - 1]}")
    return _atomic_write(path, "\n".join(lines) + "\n", gzip)


def write_cdf_csv(path: str, results: ExperimentResults, gzip: bool = False) -> str:
    lines = ["policy,statistic,error,cum_fraction"]
    names = [ts.name for ts in results.config.tracked]
    for label in results.config.policy_labels():
        for name in names:
            values, fractions = results.cdfs[(label, name)]
            for v, f in zip(values, fractions):
                lines.append(f"{label},{name},{_fmt(v)},{_fmt(f)}")
    return _atomic_write(path, "\n".join(lines) + "\n", gzip)


def write_summary_json(path: str, results: ExperimentResults) -> str:
    cfg = results.config
    means = results.mean_errors()
    medians = results.median_errors()
    labels = cfg.policy_labels()
    names = [ts.name for ts in cfg.tracked]
    payload = {
        "meta": {
            "artifact_version": ARTIFACT_VERSION,
            "scenario": cfg.scenario_name,
            "seed": cfg.seed,
            "episodes": cfg.episodes,
            "steps": cfg.steps,
            "mc_samples": cfg.mc_samples,
            "n_sensors": cfg.model.n_sensors,
        },
        "policies": labels,
        "statistics": names,
        "mean_error": {label: {name: means[(label, name)] for name in names}
                       for label in labels},
        "median_error": {label: {name: medians[(label, name)] for name in names}
                         for label in labels},
    }
    return _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_outputs(results: ExperimentResults, out_dir: str, gzip: bool = False) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    return [
        write_steps_csv(os.path.join(out_dir, "steps.csv"), results, gzip),
        write_selection_csv(os.path.join(out_dir, "selection.csv"), results, gzip),
        write_cdf_csv(os.path.join(out_dir, "cdf.csv"), results, gzip),
        write_summary_json(os.path.join(out_dir, "summary.json"), results),
    ]
