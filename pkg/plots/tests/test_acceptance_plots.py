"""Acceptance criterion for the plotting pipeline: render a real simulator
run and check the documented qualitative pattern end to end."""

import json

import numpy as np
import pytest

from voiplots import PlotJob, plot_cdfs, plot_selection
from voiplots.cli import main as plot_main

voisched_cli = pytest.importorskip("voisched.cli")


@pytest.fixture(scope="module")
def simulator_output(tmp_path_factory):
    out_dir = tmp_path_factory.mktemp("run")
    cfg = {
        "scenario": "paper1", "episodes": 2, "steps": 100, "mc_samples": 64,
        "seed": 1, "policies": ["avg_opt", "mse_opt", "maf"],
        "statistics": ["mse", "avg"], "count_interval": [-5.0, 5.0],
        "output_dir": str(out_dir / "data"),
    }
    cfg_path = out_dir / "config.json"
    cfg_path.write_text(json.dumps(cfg))
    assert voisched_cli.main(["run", "--config", str(cfg_path)]) == 0
    return str(out_dir / "data")


def _report(ok: bool, detail: str) -> None:
    print(f"\n[criterion 9] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def test_criterion_9_plot_pipeline(simulator_output, tmp_path):
    job = PlotJob(simulator_output, str(tmp_path / "figs"))
    fractions = plot_selection(job)
    avg = fractions["avg_opt"]
    nonzero = {int(i) + 1 for i in np.nonzero(avg)[0]}
    bars_ok = nonzero == {7, 14}

    plotted = plot_cdfs(job)
    curves_ok = True
    for per_policy in plotted.values():
        for errors, cum in per_policy.values():
            curves_ok = curves_ok and bool(
                np.all(np.diff(errors) >= 0) and np.all(np.diff(cum) >= 0)
                and abs(cum[-1] - 1.0) < 1e-9)

    # corrupted header must make the script exit nonzero
    corrupted = tmp_path / "corrupted"
    corrupted.mkdir()
    src = open(f"{simulator_output}/selection.csv").read()
    (corrupted / "selection.csv").write_text(
        src.replace("policy,sensor,count", "policy,channel,count", 1))
    (corrupted / "cdf.csv").write_text(open(f"{simulator_output}/cdf.csv").read())
    exit_code = plot_main(["--in", str(corrupted), "--out", str(tmp_path / "f2")])

    _report(bars_ok and curves_ok and exit_code != 0,
            f"AvgOpt bars only at sensors {sorted(nonzero)} (expect {{7, 14}}); "
            f"CDF curves monotone step functions {curves_ok}; corrupted header "
            f"exit {exit_code} (nonzero)")
