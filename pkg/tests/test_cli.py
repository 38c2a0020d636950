import json

import numpy as np
import pytest

from wgqed import NumericalError
from wgqed import cli
from wgqed.cli import main, parse_range
from wgqed.figures import FIGURES, SCENARIOS, config_path
from wgqed.model import load_scenario, scenario_to_dict


def run(args, tmp_path, capsys=None):
    code = main(args + ["--out", str(tmp_path), "--no-plot"])
    out = capsys.readouterr() if capsys else None
    return code, out


def test_bundled_configs_match_definitions():
    for name, s in SCENARIOS.items():
        assert scenario_to_dict(load_scenario(config_path(name))) == scenario_to_dict(s)
    assert set(FIGURES) <= set(SCENARIOS)


def test_simulate_fig2c(tmp_path, capsys):
    code, out = run(["simulate", "--config", "fig2cd", "--t-max", "50"], tmp_path, capsys)
    assert code == 0
    assert "final survival probability" in out.out
    assert "slowest mode decay rate: 0.0264" in out.out
    data = np.loadtxt(tmp_path / "fig2cd_trajectory.csv", delimiter=",", skiprows=1)
    assert data[0, 1] == 1.0
    assert data[-1, 0] == pytest.approx(50.0)
    man = json.loads((tmp_path / "fig2cd_simulate_manifest.json").read_text())
    assert man["command"] == "simulate"
    assert man["parameters"]["h"] == 1e-3


def test_simulate_writes_plot(tmp_path):
    assert main(["simulate", "--config", "fig2ab", "--t-max", "5", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "fig2ab_trajectory.png").stat().st_size > 0


def test_retarded_flag_picks_delay_safe_step(tmp_path):
    code, _ = run(["simulate", "--config", "fig2ab", "--t-max", "2", "--retarded"], tmp_path)
    assert code == 0
    man = json.loads((tmp_path / "fig2ab_simulate_manifest.json").read_text())
    assert man["parameters"]["retardation_mode"] == "full"
    assert man["parameters"]["h"] == pytest.approx(5e-4)


def test_global_flags_before_subcommand(tmp_path):
    code = main(["--out", str(tmp_path), "--no-plot", "spectrum", "--config", "fig6c"])
    assert code == 0
    assert (tmp_path / "fig6c_spectrum.csv").exists()


def test_empty_emitter_list_is_validation_error(tmp_path, capsys):
    p = tmp_path / "empty.json"
    p.write_text(json.dumps({"emitters": []}))
    code, out = run(["simulate", "--config", str(p)], tmp_path, capsys)
    assert code == 1
    assert "emitters" in out.err


def test_every_problem_listed(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"emitters": [{"z": 0, "gamma_wg": 0}, {"z": "x"}], "pulse": {"width": -1}}))
    code, out = run(["spectrum", "--config", str(p)], tmp_path, capsys)
    assert code == 1
    assert out.err.count("error:") == 3


def test_missing_config_is_io_error(tmp_path):
    assert run(["spectrum", "--config", str(tmp_path / "nope.json")], tmp_path)[0] == 3


def test_numerical_failure_exit_code(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise NumericalError("forced")

    monkeypatch.setattr(cli, "evolve", boom)
    assert run(["simulate", "--config", "fig2ab"], tmp_path)[0] == 2


def test_spectrum_peaks_fig6a(tmp_path):
    assert run(["spectrum", "--config", "fig6a", "--peaks"], tmp_path)[0] == 0
    cat = json.loads((tmp_path / "fig6a_peaks.json").read_text())
    top = sorted(cat["peaks"], key=lambda p: -p["height"])[:2]
    assert sorted(p["position"] for p in top) == pytest.approx([-2.46, 2.46], rel=0.05)


def test_fig8b_five_reflection_peaks(tmp_path):
    with pytest.warns(RuntimeWarning):
        assert run(["spectrum", "--config", "fig8ab", "--peaks"], tmp_path)[0] == 0
    cat = json.loads((tmp_path / "fig8ab_peaks.json").read_text())
    assert len(cat["peaks"]) == 5


def test_fig8d_four_transmission_windows(tmp_path):
    assert run(["spectrum", "--config", "fig8cd", "--peaks", "--channel", "transmission"], tmp_path)[0] == 0
    cat = json.loads((tmp_path / "fig8cd_peaks.json").read_text())
    narrow = [p for p in cat["peaks"] if p["fwhm"] < 0.05 and p["height"] > 0.9]
    assert len(narrow) == 4


def test_no_nw_flag_changes_output(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["spectrum", "--config", "fig3", "--out", str(a), "--no-plot", "--grid-points", "801"])
    main(["spectrum", "--config", "fig3", "--out", str(b), "--no-plot", "--grid-points", "801", "--no-nw"])
    assert (a / "fig3_spectrum.csv").read_bytes() != (b / "fig3_spectrum.csv").read_bytes()


def test_spectrum_deterministic_across_threads(tmp_path):
    outs = []
    for threads in ("1", "4"):
        d = tmp_path / threads
        main(["spectrum", "--config", "fig6b", "--threads", threads, "--out", str(d), "--no-plot"])
        outs.append((d / "fig6b_spectrum.csv").read_bytes())
    assert outs[0] == outs[1]


def test_sweep_deterministic_and_ordered(tmp_path):
    args = ["sweep", "--config", "fig4", "--param", "r12", "--range", "0.01:1:6", "--log"]
    outs = []
    for i, threads in enumerate(("1", "3", "3")):
        d = tmp_path / str(i)
        assert main(args + ["--threads", threads, "--out", str(d), "--no-plot"]) == 0
        outs.append((d / "fig4_sweep_r12.csv").read_bytes())
    assert outs[0] == outs[1] == outs[2]
    rows = np.genfromtxt(tmp_path / "0" / "fig4_sweep_r12.csv", delimiter=",", names=True)
    assert np.all(np.diff(rows["r12"]) > 0)
    assert np.all(np.diff(rows["delta_sd"]) < 0)


def test_single_point_sweep_matches_spectrum(tmp_path):
    grid = ["--grid-span", "20", "--grid-points", "4001"]
    main(["sweep", "--config", "fig6a", "--param", "dw12", "--range", "0:0:1", "--out", str(tmp_path), "--no-plot"] + grid)
    main(["spectrum", "--config", "fig6a", "--peaks", "--out", str(tmp_path), "--no-plot"] + grid)
    row = np.genfromtxt(tmp_path / "fig6a_sweep_dw12.csv", delimiter=",", names=True)
    cat = json.loads((tmp_path / "fig6a_peaks.json").read_text())
    assert float(row["separation"]) == cat["separation"]
    assert float(row["linewidth_difference"]) == cat["linewidth_difference"]


def test_sweep_other_parameters(tmp_path):
    for param, rng in (("gamma_nw", "0:0.5:3"), ("delta0", "2:10:2")):
        assert run(["sweep", "--config", "fig6a", "--param", param, "--range", rng], tmp_path)[0] == 0


def test_decay_sweep_reports_branching(tmp_path):
    # at 0.05 lambda both collective modes radiate into the guide when gamma_nw = 0
    assert run(["sweep", "--config", "fig2cd", "--param", "gamma_nw", "--range", "0:0.2:2"], tmp_path)[0] == 0
    rows = np.genfromtxt(tmp_path / "fig2cd_sweep_gamma_nw.csv", delimiter=",", names=True)
    assert rows["guided_fraction"][0] == pytest.approx(1.0, abs=1e-3)
    assert rows["guided_fraction"][1] < rows["guided_fraction"][0]


def test_sweep_errors(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run(["sweep", "--config", "fig4", "--param", "bogus", "--range", "0:1:2"], tmp_path)
    assert exc.value.code == 1
    assert run(["sweep", "--config", "fig4", "--param", "r12", "--range", "0:inf:2"], tmp_path)[0] == 1
    assert run(["sweep", "--config", "fig2ab", "--param", "delta0", "--range", "1:2:2"], tmp_path)[0] == 1


def test_parse_range():
    assert parse_range("1:3:3", False) == pytest.approx([1, 2, 3])
    assert parse_range("1,100,3", True) == pytest.approx([1, 10, 100])


def test_verify_subset(tmp_path, capsys):
    code, out = run(["verify", "--only", "1", "11"], tmp_path, capsys)
    assert code == 0
    rep = json.loads((tmp_path / "verify_report.json").read_text())
    assert rep["passed"]
    branching = next(c for c in rep["checks"] if c["id"] == 11)
    assert branching["measured"]["guided"] == pytest.approx(0.8333, abs=1e-3)


def test_verify_negative_control(tmp_path, capsys):
    code, out = run(["verify", "--only", "4", "--perturb", "0.05"], tmp_path, capsys)
    assert code == 1
    assert "[FAIL]  4" in out.out


def test_figures_bundle(tmp_path):
    assert main(["figures", "fig6a", "fig5b", "--out", str(tmp_path)]) == 0
    names = {p.name for p in (tmp_path / "fig6a").iterdir()}
    assert {"fig6a_spectrum.csv", "fig6a_peaks.json", "fig6a_spectrum.png", "fig6a_audit.json"} <= names
    assert (tmp_path / "fig5b" / "fig5b_trajectory.png").exists()
    assert main(["figures", "fig99", "--out", str(tmp_path)]) == 1
