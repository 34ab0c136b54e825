import json
from pathlib import Path

import numpy as np
import pytest

from ozd import bench, cli
from ozd.bench import SummaryStats, emit_plot_data, load_summary, parse_config, run_experiment, run_verification
from ozd.errors import ConfigurationError
from ozd.objectives import Objective

GOLDEN = Path(__file__).parent / "golden"

SMALL = """
[tiny]
objective = shifted_l1
d = 4
x0 = zeros
budget = 24
repetitions = 2
seed = 3
schedule = power
alpha_scale = ell/d
theta = 0.6
h = 0.01
rho = 1
methods = ozd:2:1, ozd:4:1, gaussian:2:0.5, spherical:1:1
"""


def _cfg(text=SMALL, **overrides):
    return parse_config(text, overrides)[0]


# --- config parsing ----------------------------------------------------------

def test_parse_small():
    cfg = _cfg()
    assert cfg.name == "tiny" and cfg.d == 4 and len(cfg.methods) == 4
    assert [m.label for m in cfg.methods] == ["ozd_l2", "ozd_l4", "gaussian_l2", "spherical_l1"]


def test_default_section_is_shared():
    text = "[DEFAULT]\nobjective = l1\nd = 3\nbudget = 12\nmethods = ozd:1:1\nschedule = constant\nh = 0.1\n[a]\n[b]\nd = 5\n"
    a, b = parse_config(text)
    assert (a.name, a.d, b.name, b.d) == ("a", 3, "b", 5)


def test_objective_params():
    text = SMALL.replace("objective = shifted_l1", "objective = huber\nparam.delta = 0.25")
    cfg = _cfg(text)
    assert cfg.build_objective(0).params["delta"] == 0.25


@pytest.mark.parametrize("edit,field", [
    (("d = 4", "d = 4\ncolour = red"), "colour"),
    (("d = 4\n", ""), "d"),
    (("theta = 0.6", "theta = 0.4"), "theta"),
    (("methods = ozd:2:1", "methods = newton:2:1"), "methods"),
    (("methods = ozd:2:1", "methods = ozd:9:1"), "methods"),
    (("methods = ozd:2:1", "methods = ozd:2"), "methods"),
    (("budget = 24", "budget = many"), "budget"),
    (("x0 = zeros", "x0 = 1,2"), "x0"),
    (("schedule = power", "schedule = cosine"), "schedule"),
    (("alpha_scale = ell/d", "alpha_scale = ell/(d*L1)"), "alpha_scale"),
])
def test_config_errors_name_the_field(edit, field):
    with pytest.raises(ConfigurationError, match=field):
        _cfg(SMALL.replace(*edit))


def test_smooth_capped_config_rejects_large_step():
    text = SMALL.replace("shifted_l1", "quadratic").replace("schedule = power", "schedule = smooth-capped")
    text = text.replace("alpha_scale = ell/d", "alpha_scale = ell/(d*L1)").replace("theta = 0.6", "theta = 1.1")
    _cfg(text.replace("methods = ozd:2:1, ozd:4:1, gaussian:2:0.5, spherical:1:1", "methods = ozd:2:0.99"))
    with pytest.raises(ConfigurationError, match="alpha < ell/\\(d L1\\)"):
        _cfg(text.replace("methods = ozd:2:1, ozd:4:1, gaussian:2:0.5, spherical:1:1", "methods = ozd:2:1.01"))


def test_overrides():
    cfg = _cfg(repetitions=5, seed=None)
    assert cfg.repetitions == 5 and cfg.seed == 3


# --- runs and files ----------------------------------------------------------

def test_outputs(tmp_path):
    summary = run_experiment(_cfg(), tmp_path)
    out = tmp_path / "tiny"
    assert sorted(p.name for p in out.iterdir()) == sorted(
        ["ozd_l2.csv", "ozd_l4.csv", "gaussian_l2.csv", "spherical_l1.csv", "finals.csv", "metadata.json"])
    lines = (out / "ozd_l2.csv").read_text().splitlines()
    assert lines[0] == "eval_index,mean_gap,std_gap" and len(lines) == 25
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["library_version"] and meta["created"] and len(meta["runs"]) == 8
    assert summary.finals["ozd_l4"].shape == (2,)


def test_series_repeat_within_iteration(tmp_path):
    cfg = _cfg(repetitions=1)
    summary = run_experiment(cfg, tmp_path)
    mean = summary.series["ozd_l2"][0]
    assert np.all(mean.reshape(6, 4) == mean.reshape(6, 4)[:, :1])


def test_byte_identical_reruns(tmp_path):
    cfg = _cfg(repetitions=1)
    run_experiment(cfg, tmp_path / "a")
    run_experiment(cfg, tmp_path / "b")
    for name in ("ozd_l2.csv", "ozd_l4.csv", "gaussian_l2.csv", "spherical_l1.csv", "finals.csv"):
        assert (tmp_path / "a/tiny" / name).read_bytes() == (tmp_path / "b/tiny" / name).read_bytes()


def test_parallel_matches_serial(tmp_path):
    run_experiment(_cfg(), tmp_path / "a", jobs=1)
    run_experiment(_cfg(), tmp_path / "b", jobs=2)
    for name in ("ozd_l4.csv", "finals.csv"):
        assert (tmp_path / "a/tiny" / name).read_bytes() == (tmp_path / "b/tiny" / name).read_bytes()


def test_golden_csv(tmp_path):
    run_experiment(_cfg(), tmp_path)
    for name in ("ozd_l2.csv", "finals.csv"):
        assert (tmp_path / "tiny" / name).read_text() == (GOLDEN / name).read_text()


def test_failed_run_is_marked(tmp_path, monkeypatch):
    def nan_objective(name, d, rng=None, **params):
        return Objective("nan", d, lambda x: np.full(np.shape(x)[:-1], np.nan))

    monkeypatch.setattr(bench, "make_objective", nan_objective)
    summary = run_experiment(_cfg(), tmp_path)
    assert len(summary.failed) == 8 and np.all(np.isnan(summary.finals["ozd_l2"]))
    assert json.loads((tmp_path / "tiny/metadata.json").read_text())["failed"]


# --- plot data ---------------------------------------------------------------

def test_plot_three_rows(tmp_path):
    summary = SummaryStats("s", 3, {"ozd_l1": (np.array([3.0, 2.0, 1.0]), np.zeros(3))})
    lines = emit_plot_data(summary, tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "eval_index,ozd_l1_mean,ozd_l1_std" and len(lines) == 4


def test_plot_log_clamp(tmp_path):
    summary = SummaryStats("s", 3, {"ozd_l1": (np.array([1.0, 0.0, -1e-20]), np.zeros(3))})
    lines = emit_plot_data(summary, tmp_path / "p.csv", "log-y").read_text().splitlines()
    assert lines[0] == "# log-y: 2 nonpositive mean values clamped to 1e-16"
    assert lines[3].split(",")[1] == "9.9999999999999998e-17"


def test_plot_from_run(tmp_path):
    run_experiment(_cfg(), tmp_path)
    summary = load_summary(tmp_path / "tiny")
    lines = emit_plot_data(summary, tmp_path / "p.csv").read_text().splitlines()
    assert len(summary.series) == 4 and len(lines) == 25 and len(lines[0].split(",")) == 9


def test_plot_errors(tmp_path):
    with pytest.raises(ConfigurationError):
        emit_plot_data(SummaryStats("s", 0, {}), tmp_path / "p.csv")
    summary = SummaryStats("s", 3, {"a_l1": (np.ones(3), np.zeros(3)), "b_l1": (np.ones(2), np.zeros(2))})
    with pytest.raises(ConfigurationError):
        emit_plot_data(summary, tmp_path / "p.csv")
    with pytest.raises(ConfigurationError):
        load_summary(tmp_path)


def test_plot_svg(tmp_path):
    pytest.importorskip("matplotlib")
    summary = SummaryStats("s", 3, {"ozd_l1": (np.array([3.0, 2.0, 1.0]), np.ones(3))})
    emit_plot_data(summary, tmp_path / "p.csv", "log-y", svg_path=tmp_path / "p.svg")
    assert (tmp_path / "p.svg").read_text().lstrip().startswith("<?xml")


# --- verification ------------------------------------------------------------

def test_verify_affine_suite(tmp_path):
    reports, status, text = run_verification(["smoothing-lemma-affine"], 0, tmp_path / "r.txt")
    assert status == 0 and all(r.passed for r in reports)
    assert (tmp_path / "r.txt").read_text() == text


def test_verify_variance_scaling_reports_ratio():
    reports, status, _ = run_verification(["variance-scaling"], 0)
    assert status == 0
    for r, d in zip(reports, (5, 10)):
        assert d / 2 <= r.estimate <= 2 * d


def test_verify_failure_status(monkeypatch):
    monkeypatch.setitem(bench.SUITES, "sampling", lambda seed: [bench._report("forced", False, "never")])
    _, status, text = run_verification(["sampling"], 0)
    assert status == 2 and "FAIL  forced" in text


def test_verify_unknown_suite():
    with pytest.raises(ConfigurationError):
        run_verification(["nope"], 0)


# --- command line ------------------------------------------------------------

def _write(tmp_path, text=SMALL):
    path = tmp_path / "c.cfg"
    path.write_text(text)
    return str(path)


def test_cli_run_and_plot(tmp_path, capsys):
    assert cli.main(["run", _write(tmp_path), "--out", str(tmp_path / "out"), "--reps", "1"]) == 0
    assert "ozd_l4" in capsys.readouterr().out
    assert cli.main(["plot", str(tmp_path / "out/tiny"), "--log-y"]) == 0
    assert (tmp_path / "out/tiny/plot_data_logy.csv").exists()


def test_cli_config_error_exit_1(tmp_path, capsys):
    assert cli.main(["run", _write(tmp_path, SMALL.replace("d = 4", "d = 0"))]) == 1
    assert "d:" in capsys.readouterr().err
    assert cli.main(["run", str(tmp_path / "missing.cfg")]) == 1


def test_cli_objective_failure_exit_3(tmp_path, monkeypatch):
    monkeypatch.setattr(bench, "make_objective",
                        lambda name, d, rng=None, **p: Objective("nan", d, lambda x: np.full(np.shape(x)[:-1], np.nan)))
    assert cli.main(["run", _write(tmp_path), "--out", str(tmp_path / "out")]) == 3


def test_cli_verify_exit_codes(tmp_path, monkeypatch):
    assert cli.main(["verify", "--suite", "smoothing-lemma-affine", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "verification_report.txt").exists()
    monkeypatch.setitem(bench.SUITES, "sampling", lambda seed: [bench._report("forced", False, "never")])
    assert cli.main(["verify", "--suite", "sampling", "--out", str(tmp_path)]) == 2


def test_cli_bench_directions(capsys):
    assert cli.main(["bench-directions", "--dims", "2", "4", "--method", "qr", "--reps", "3"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 2
