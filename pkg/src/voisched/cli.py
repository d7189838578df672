"""Command-line front end: validate | run | compare.

Exit codes: 0 success, 1 configuration error (including failed model
validation), 2 runtime or numeric error.
"""

from __future__ import annotations

import argparse
import sys

from .model import validate_model
from .runio import (
    ConfigError,
    LoadedConfig,
    default_config_dict,
    parse_config,
    read_config_dict,
    write_outputs,
)
from .simulate import SimulationError, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", help="JSON config file")
    parser.add_argument("--preset", choices=("paper1", "paper2"),
                        help="named scenario; used alone or to override the config")
    parser.add_argument("--seed", type=int, metavar="U64")
    parser.add_argument("--episodes", type=int, metavar="N")
    parser.add_argument("--steps", type=int, metavar="N")
    parser.add_argument("--mc-samples", type=int, metavar="N")
    parser.add_argument("--out", metavar="DIR", help="output directory override")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="voisched",
        description="Value-of-information sensor polling simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("validate", "check a model configuration"),
                       ("run", "run an experiment and write CSV/JSON results"),
                       ("compare", "print a policy x statistic mean-error table")):
        p = sub.add_parser(name, help=text)
        _add_common_flags(p)
        if name == "run":
            p.add_argument("--gzip", action="store_true", help="gzip the CSV outputs")
    return parser


def _load(args) -> LoadedConfig:
    if args.config is None and args.preset is None:
        raise ConfigError("provide --config and/or --preset")
    if args.config is not None:
        raw = read_config_dict(args.config)
    else:
        raw = default_config_dict(args.preset)
    # CLI flags override the file
    if args.preset is not None:
        raw["scenario"] = args.preset
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.episodes is not None:
        raw["episodes"] = args.episodes
    if args.steps is not None:
        raw["steps"] = args.steps
    if args.mc_samples is not None:
        raw["mc_samples"] = args.mc_samples
    if args.out is not None:
        raw["output_dir"] = args.out
    return parse_config(raw)


def cmd_validate(args) -> int:
    loaded = _load(args)
    report = validate_model(loaded.experiment.model)
    print(f"scenario: {loaded.scenario_name}")
    for line in report.lines():
        print(line)
    if not report.passed:
        print("validation FAILED")
        return EXIT_CONFIG
    print("validation passed")
    return EXIT_OK


def cmd_run(args) -> int:
    loaded = _load(args)
    report = validate_model(loaded.experiment.model)
    if not report.passed:
        for line in report.lines():
            print(line, file=sys.stderr)
        print("error: model failed validation", file=sys.stderr)
        return EXIT_CONFIG
    results = run_experiment(loaded.experiment)
    paths = write_outputs(results, loaded.output_dir, gzip=getattr(args, "gzip", False))
    for path in paths:
        print(path)
    return EXIT_OK


def cmd_compare(args) -> int:
    loaded = _load(args)
    if len(loaded.experiment.policies) < 2:
        raise ConfigError("compare needs at least 2 policies")
    report = validate_model(loaded.experiment.model)
    if not report.passed:
        print("error: model failed validation", file=sys.stderr)
        return EXIT_CONFIG
    results = run_experiment(loaded.experiment)
    means = results.mean_errors()
    labels = results.config.policy_labels()
    names = [ts.name for ts in results.config.tracked]
    best = {name: min(labels, key=lambda lb: means[(lb, name)]) for name in names}
    width = max(len(lb) for lb in labels) + 2
    header = "policy".ljust(width) + "".join(f"nu_{n}".rjust(14) for n in names)
    print(header)
    for label in labels:
        cells = []
        for name in names:
            mark = "*" if best[name] == label else " "
            cells.append(f"{means[(label, name)]:12.5g}{mark}")
        print(label.ljust(width) + " ".join(cells))
    print("(* = lowest mean realized error per statistic)")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"validate": cmd_validate, "run": cmd_run, "compare": cmd_compare}[args.command]
    try:
        code = handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        code = EXIT_CONFIG
    except (SimulationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_RUNTIME
    return code


if __name__ == "__main__":
    sys.exit(main())
