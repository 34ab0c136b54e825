"""Experiment harness: configs, repeated seeded runs, CSV summaries, verification.

Config files are INI text. ``[DEFAULT]`` holds shared keys and every other
section is one experiment. Recognised keys::

    objective      quadratic | shifted_l1 | sparse-group-lasso | huber | ...
    param.<name>   objective parameter (e.g. param.delta = 0.5)
    d              dimension
    x0             zeros | ones | comma-separated values
    budget         objective evaluations per run
    repetitions    runs per method; repetition r uses seed + r
    seed           base seed
    estimator      central | forward | single-point   (O-ZD only)
    generator      qr | householder | butterfly      (O-ZD only)
    householder_m  reflector count for the householder generator
    schedule       power | constant | smooth-capped
    alpha_scale    1 | ell/d | sqrt(ell/d) | ell/(d*L1)
    theta, rho     step and smoothing decay exponents
                   (for smooth-capped, theta is the smoothing exponent)
    h, h_scale     smoothing scale; h_scale is 1 | 1/d^2
    methods        comma list of kind:ell:c, kind in ozd | gaussian | spherical

A method's step-size scale is ``c * alpha_scale``.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigurationError, EstimationError
from .estimators import KINDS
from .directions import GENERATORS
from .objectives import make_objective
from .optimizer import make_schedule, run_baseline, run_ozd
from .rng import RngStream

METHOD_KINDS = ("ozd", "gaussian", "spherical")
ALPHA_SCALES = ("1", "ell/d", "sqrt(ell/d)", "ell/(d*L1)")
H_SCALES = ("1", "1/d^2")
CSV_COLUMNS = ("eval_index", "mean_gap", "std_gap")
LOG_FLOOR = 1e-16
OBJECTIVE_STREAM = 1


def fmt(value: float) -> str:
    return format(float(value), ".17g")


@dataclass(frozen=True)
class MethodSpec:
    kind: str
    ell: int
    c: float

    @property
    def label(self) -> str:
        return f"{self.kind}_l{self.ell}"


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    objective: str
    d: int
    methods: tuple
    budget: int
    repetitions: int = 10
    seed: int = 0
    x0: str = "zeros"
    estimator: str = "central"
    generator: str = "qr"
    householder_m: int = 1
    schedule: str = "power"
    alpha_scale: str = "1"
    theta: float = 0.0
    h: float = 1e-3
    h_scale: str = "1"
    rho: float = 0.0
    params: dict = field(default_factory=dict)
    output_dir: str = "results"

    def start_point(self) -> np.ndarray:
        if self.x0 == "zeros":
            return np.zeros(self.d)
        if self.x0 == "ones":
            return np.ones(self.d)
        values = np.array([float(v) for v in self.x0.split(",")])
        if values.shape != (self.d,):
            raise ConfigurationError(f"x0: expected {self.d} values, got {values.size}")
        return values

    def build_objective(self, rep: int):
        return make_objective(self.objective, self.d, RngStream(self.seed + rep, OBJECTIVE_STREAM), **self.params)

    def schedule_for(self, method: MethodSpec, objective):
        ell, d = method.ell, self.d
        scale = {
            "1": 1.0,
            "ell/d": ell / d,
            "sqrt(ell/d)": math.sqrt(ell / d),
            "ell/(d*L1)": ell / (d * objective.L1) if objective.L1 else math.nan,
        }[self.alpha_scale]
        if math.isnan(scale):
            raise ConfigurationError(f"alpha_scale: {self.objective} has no smoothness constant L1")
        h = self.h / d**2 if self.h_scale == "1/d^2" else self.h
        alpha = method.c * scale
        if self.schedule == "power":
            return make_schedule("power", alpha=alpha, theta=self.theta, h=h, rho=self.rho)
        if self.schedule == "constant":
            return make_schedule("constant", alpha=alpha, h=h, rho=self.rho)
        if self.schedule == "smooth-capped":
            return make_schedule("smooth-capped", alpha=alpha, h=h, theta=self.theta, ell=ell, d=d, L1=objective.L1)
        raise ConfigurationError(f"schedule: unsupported kind {self.schedule!r}")

    def validate(self) -> None:
        if self.d < 1:
            raise ConfigurationError("d: must be >= 1")
        if self.repetitions < 1:
            raise ConfigurationError("repetitions: must be >= 1")
        if not self.methods:
            raise ConfigurationError("methods: at least one method is required")
        if self.budget < 2 * max(m.ell for m in self.methods):
            raise ConfigurationError("budget: must be >= 2 * max(ell)")
        if self.estimator not in KINDS:
            raise ConfigurationError(f"estimator: expected one of {KINDS}")
        if self.generator not in GENERATORS:
            raise ConfigurationError(f"generator: expected one of {GENERATORS}")
        if self.alpha_scale not in ALPHA_SCALES:
            raise ConfigurationError(f"alpha_scale: expected one of {ALPHA_SCALES}")
        if self.h_scale not in H_SCALES:
            raise ConfigurationError(f"h_scale: expected one of {H_SCALES}")
        for m in self.methods:
            if m.kind not in METHOD_KINDS:
                raise ConfigurationError(f"methods: unknown kind {m.kind!r}")
            if m.kind == "ozd" and not 1 <= m.ell <= self.d:
                raise ConfigurationError(f"methods: ozd needs 1 <= ell <= d, got {m.ell}")
        self.start_point()
        objective = self.build_objective(0)
        for m in self.methods:
            try:
                self.schedule_for(m, objective)
            except ConfigurationError as err:
                raise ConfigurationError(f"schedule ({m.label}): {err}") from err


def _parse_methods(text: str):
    methods = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        parts = item.split(":")
        if len(parts) != 3:
            raise ConfigurationError(f"methods: {item!r} is not kind:ell:c")
        try:
            methods.append(MethodSpec(parts[0], int(parts[1]), float(parts[2])))
        except ValueError as err:
            raise ConfigurationError(f"methods: {item!r}: {err}") from err
    return tuple(methods)


_INT_KEYS = ("d", "budget", "repetitions", "seed", "householder_m")
_FLOAT_KEYS = ("theta", "h", "rho")
_STR_KEYS = ("objective", "x0", "estimator", "generator", "schedule", "alpha_scale", "h_scale")


def parse_config(text: str, overrides: dict | None = None) -> list[ExperimentConfig]:
    """Parse config text into one :class:`ExperimentConfig` per section."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.Error as err:
        raise ConfigurationError(f"config syntax: {err}") from err
    sections = parser.sections() or ["DEFAULT"]
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    known = set(_INT_KEYS + _FLOAT_KEYS + _STR_KEYS + ("methods", "output_dir"))
    configs = []
    for name in sections:
        sec = parser[name]
        kwargs, params = {}, {}
        for key, raw in sec.items():
            if key.startswith("param."):
                params[key[len("param."):]] = float(raw)
            elif key not in known:
                raise ConfigurationError(f"{key}: unknown config key in section [{name}]")
        for key in known:
            if key not in sec:
                continue
            raw = sec[key]
            try:
                if key in _INT_KEYS:
                    kwargs[key] = int(raw)
                elif key in _FLOAT_KEYS:
                    kwargs[key] = float(raw)
                elif key == "methods":
                    kwargs[key] = _parse_methods(raw)
                else:
                    kwargs[key] = raw.strip()
            except ValueError as err:
                raise ConfigurationError(f"{key}: cannot parse {raw!r}") from err
        kwargs.update(overrides)
        for key in ("objective", "d", "methods", "budget"):
            if key not in kwargs:
                raise ConfigurationError(f"{key}: required in section [{name}]")
        cfg = ExperimentConfig(name=name.lower(), params=params, **kwargs)
        cfg.validate()
        configs.append(cfg)
    return configs


def load_config(path, overrides: dict | None = None) -> list[ExperimentConfig]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigurationError(f"config: cannot read {path}: {err}") from err
    return parse_config(text, overrides)


@dataclass
class SummaryStats:
    name: str
    budget: int
    series: dict  # label -> (mean, std), each of length budget
    finals: dict = field(default_factory=dict)  # label -> final gaps per repetition
    failed: list = field(default_factory=list)

    def _ok(self, label):
        values = np.asarray(self.finals[label], dtype=float)
        return values[~np.isnan(values)]

    def final_median(self, label: str) -> float:
        """Median over successful repetitions; NaN when every run failed."""
        ok = self._ok(label)
        return float(np.median(ok)) if ok.size else math.nan

    def final_mean(self, label: str) -> float:
        ok = self._ok(label)
        return float(np.mean(ok)) if ok.size else math.nan


def _run_one(cfg: ExperimentConfig, rep: int):
    """All methods for one repetition; returns label -> (padded gaps, final gap, metadata) or error."""
    f = cfg.build_objective(rep)
    x0 = cfg.start_point()
    out = {}
    for m in cfg.methods:
        rng = RngStream(cfg.seed + rep, zlib.crc32(m.label.encode()))
        sched = cfg.schedule_for(m, f)
        try:
            if m.kind == "ozd":
                tr = run_ozd(f, x0, sched, m.ell, cfg.generator, cfg.estimator, cfg.budget, rng,
                             householder_m=cfg.householder_m)
            else:
                tr = run_baseline(f, x0, sched, m.ell, m.kind, cfg.budget, rng)
        except EstimationError as err:
            out[m.label] = (None, math.nan, {"failed": str(err)})
            continue
        gaps = np.full(cfg.budget, tr.final_gap)
        gaps[:tr.evaluations] = tr.gaps
        meta = {k: tr.metadata[k] for k in ("iterations", "evaluations", "h_clamped")}
        out[m.label] = (gaps, tr.final_gap, meta)
    return rep, out


def run_experiment(cfg: ExperimentConfig, out_dir=None, jobs: int = 1) -> SummaryStats:
    """Run every method for every repetition and write CSV summaries.

    Writes ``<out>/<name>/<method>_l<ell>.csv`` (eval_index, mean_gap,
    std_gap), ``finals.csv`` and ``metadata.json``. Per-evaluation series of
    runs that stop short of the budget are padded with their final gap; the
    std is the population std across repetitions on the linear gap scale.
    """
    cfg.validate()
    reps = range(cfg.repetitions)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = dict(pool.map(_run_one, [cfg] * cfg.repetitions, reps))
    else:
        results = dict(_run_one(cfg, r) for r in reps)

    series, finals, failed, run_meta = {}, {}, [], []
    for m in cfg.methods:
        rows, fin = [], []
        for r in reps:
            gaps, final, meta = results[r][m.label]
            run_meta.append({"method": m.label, "repetition": r, "seed": cfg.seed + r, **meta})
            if gaps is None:
                failed.append({"method": m.label, "repetition": r, "error": meta["failed"]})
            else:
                rows.append(gaps)
            fin.append(final)
        if rows:
            stack = np.vstack(rows)
            series[m.label] = (stack.mean(axis=0), stack.std(axis=0))
        finals[m.label] = np.array(fin)
    summary = SummaryStats(cfg.name, cfg.budget, series, finals, failed)

    target = Path(out_dir if out_dir is not None else cfg.output_dir) / cfg.name
    target.mkdir(parents=True, exist_ok=True)
    for label, (mean, std) in series.items():
        write_series_csv(target / f"{label}.csv", mean, std)
    _write_finals(target / "finals.csv", cfg, finals)
    meta = {
        "library_version": __version__,
        "created": datetime.now(timezone.utc).isoformat(),
        "config": {**asdict(cfg), "methods": [asdict(m) for m in cfg.methods]},
        "objective_regenerated_per_repetition": True,
        "objective_seed": "seed + repetition, stream 1",
        "std": "population std of the linear gap across repetitions",
        "runs": run_meta,
        "failed": failed,
    }
    (target / "metadata.json").write_text(json.dumps(meta, indent=2, default=_json_default) + "\n", encoding="utf-8")
    return summary


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


def write_series_csv(path, mean, std) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for i, (m, s) in enumerate(zip(mean, std), start=1):
        w.writerow((i, fmt(m), fmt(s)))
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def _write_finals(path, cfg, finals) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("repetition", "seed", "method", "final_gap"))
    for label, values in finals.items():
        for r, v in enumerate(values):
            w.writerow((r, cfg.seed + r, label, fmt(v)))
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_series_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != CSV_COLUMNS:
        raise ConfigurationError(f"{path}: unexpected columns {rows[0]}")
    data = np.array(rows[1:], dtype=float).reshape(-1, 3)
    return data[:, 1], data[:, 2]


def load_summary(directory) -> SummaryStats:
    """Rebuild a summary from the per-method CSVs of one experiment directory."""
    directory = Path(directory)
    series = {}
    for path in sorted(directory.glob("*_l*.csv")):
        series[path.stem] = read_series_csv(path)
    if not series:
        raise ConfigurationError(f"summary: no series CSVs in {directory}")
    budget = len(next(iter(series.values()))[0])
    return SummaryStats(directory.name, budget, series)


def emit_plot_data(summary: SummaryStats, path, style: str = "linear", svg_path=None) -> Path:
    """Write ``eval_index, <series>_mean, <series>_std, ...`` for plotting.

    In ``log-y`` style nonpositive means are clamped to 1e-16 and the number
    of clamped values is noted in a leading ``#`` comment line.
    """
    if not summary.series:
        raise ConfigurationError("summary: no series to plot")
    if style not in ("linear", "log-y"):
        raise ConfigurationError(f"style: expected linear or log-y, got {style!r}")
    labels = list(summary.series)
    means = [np.asarray(summary.series[k][0], dtype=float) for k in labels]
    stds = [np.asarray(summary.series[k][1], dtype=float) for k in labels]
    n = len(means[0])
    if any(len(m) != n for m in means):
        raise ConfigurationError("summary: series lengths differ")
    buf = io.StringIO()
    if style == "log-y":
        clamped = sum(int(np.sum(m <= 0)) for m in means)
        means = [np.where(m <= 0, LOG_FLOOR, m) for m in means]
        buf.write(f"# log-y: {clamped} nonpositive mean values clamped to {LOG_FLOOR:g}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["eval_index"] + [f"{k}_{s}" for k in labels for s in ("mean", "std")])
    for i in range(n):
        row = [i + 1]
        for m, s in zip(means, stds):
            row += [fmt(m[i]), fmt(s[i])]
        w.writerow(row)
    path = Path(path)
    path.write_text(buf.getvalue(), encoding="utf-8")
    if svg_path is not None:
        _render_svg(labels, means, stds, style, svg_path)
    return path


def _render_svg(labels, means, stds, style, svg_path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    x = np.arange(1, len(means[0]) + 1)
    for label, m, s in zip(labels, means, stds):
        ax.plot(x, m, label=label, lw=1)
        lo = np.maximum(m - s, LOG_FLOOR) if style == "log-y" else m - s
        ax.fill_between(x, lo, m + s, alpha=0.2)
    if style == "log-y":
        ax.set_yscale("log")
    ax.set_xlabel("function evaluations")
    ax.set_ylabel("f(x_k) - f*")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(svg_path, format="svg", metadata={"Date": None})
    plt.close(fig)


# ---------------------------------------------------------------- verification

def _suite_orthogonality(seed):
    from .directions import sample_directions, validate_orthonormal

    reports = []
    for gen_id in ("qr", "householder", "butterfly"):
        dims = (1, 2, 4, 8, 16) if gen_id == "butterfly" else (1, 2, 3, 5, 8, 16)
        ok = all(
            validate_orthonormal(sample_directions(gen_id, d, ell, RngStream(seed, s), m=2), 1e-12)
            for d in dims for ell in sorted({1, max(1, d // 2), d}) for s in range(20)
        )
        reports.append(_report(f"orthogonality[{gen_id}]", ok, "max |G^T G - I| <= 1e-12"))
    return reports


def _report(name, ok, tolerance, estimate=np.nan, se=np.nan, samples=0):
    from .oracles import OracleReport

    return OracleReport(name, estimate, se, samples, passed=bool(ok), tolerance=tolerance)


def _suite_smoothing_lemma_affine(seed):
    from .objectives import affine
    from .oracles import surrogate_samples, verify_smoothing_lemma

    c = np.array([1.0, -2.0, 0.5, 3.0, -1.5])
    f = affine(c)
    x = np.linspace(-1, 1, 5)
    rep = verify_smoothing_lemma(f, x, 0.1, 5, 20_000, RngStream(seed, 10))
    exact = np.max(np.abs(surrogate_samples(f, x, 0.1, 5, 200, RngStream(seed, 11)) - c)) <= 1e-10
    rep.passed = bool(rep.passed and exact)
    rep.tolerance += "; every surrogate equals c within 1e-10"
    return [rep]


def _suite_smoothing_lemma(seed, N=100_000):
    from .objectives import make_quadratic, make_shifted_l1
    from .oracles import verify_smoothing_lemma

    d = 5
    gen = RngStream(seed, 20).generator()
    f1 = make_quadratic(d, RngStream(seed, OBJECTIVE_STREAM))
    f2 = make_shifted_l1(d)
    points = {"quadratic": gen.standard_normal(d), "shifted_l1": f2.x_star + 0.05 * gen.standard_normal(d)}
    reports = []
    for f in (f1, f2):
        for kind in KINDS:
            for ell in (1, 3, 5):
                rep = verify_smoothing_lemma(f, points[f.name], 0.1, ell, N, RngStream(seed, 21 + ell), kind=kind)
                rep.name = f"smoothing-lemma[{f.name},{kind},ell={ell}]"
                reports.append(rep)
    return reports


def _suite_variance_scaling(seed, dims=(5, 10), N=100_000):
    from .objectives import make_table3_objective
    from .oracles import variance_scaling_ratio

    gen = RngStream(seed, 30).generator()
    return [variance_scaling_ratio(make_table3_objective("l1", d), gen.standard_normal(d), 0.1, N, gen) for d in dims]


def _suite_variance_constant(seed):
    from .objectives import make_table3_objective
    from .oracles import variance_constant_sweep

    return [variance_constant_sweep(lambda d: make_table3_objective("l1", d), (5, 10, 20), 0.1, 20_000,
                                    RngStream(seed, 31))]


def _suite_smooth_variance(seed, d=10, n_points=20, N=10_000):
    from .objectives import make_quadratic
    from .oracles import verify_variance_bound

    f = make_quadratic(d, RngStream(seed, OBJECTIVE_STREAM))
    gen = RngStream(seed, 40).generator()
    reports = []
    for ell in (1, 5, 10):
        results = [verify_variance_bound(f, gen.standard_normal(d), 0.1, ell, N, gen, kind="smooth") for _ in range(n_points)]
        worst = max(results, key=lambda r: r.estimate / r.details["bound"])
        reports.append(_report(f"smooth-variance[ell={ell}]", all(r.passed for r in results),
                               f"{worst.tolerance} at {n_points} points", worst.estimate, worst.standard_error, N))
    return reports


def _suite_smoothing_properties(seed, d=5, n_points=20):
    from .objectives import make_quadratic, make_shifted_l1
    from .oracles import verify_smoothing_properties

    f1 = make_quadratic(d, RngStream(seed, OBJECTIVE_STREAM))
    f2 = make_shifted_l1(d)
    return [verify_smoothing_properties(f, h, n_points, RngStream(seed, 50 + i))
            for i, (f, h) in enumerate((f, h) for f in (f1, f2) for h in (0.05, 0.2))]


def _suite_goldstein(seed, K=100, draws=100_000):
    from scipy.stats import chisquare

    from .oracles import goldstein_sample_index

    reports = []
    for label, w in (("uniform", np.ones(K)), ("power-0.6", np.arange(1, K + 1) ** -0.6)):
        idx = goldstein_sample_index(w, RngStream(seed, 60), size=draws)
        counts = np.bincount(idx, minlength=K)
        p = chisquare(counts, draws * w / w.sum()).pvalue
        reports.append(_report(f"goldstein-sampler[{label}]", p > 1e-3, "chi-square p > 0.001", p, 0.0, draws))
    return reports


def _suite_sampling(seed):
    from .oracles import check_ball_sampling, check_sphere_sampling

    return [check_ball_sampling(d, 100_000, RngStream(seed, 70 + d)) for d in (2, 5, 10)] + [
        check_sphere_sampling(5, 100_000, RngStream(seed, 80))]


SUITES = {
    "orthogonality": _suite_orthogonality,
    "smoothing-lemma-affine": _suite_smoothing_lemma_affine,
    "smoothing-lemma": _suite_smoothing_lemma,
    "variance-scaling": _suite_variance_scaling,
    "variance-constant": _suite_variance_constant,
    "smooth-variance": _suite_smooth_variance,
    "smoothing-properties": _suite_smoothing_properties,
    "goldstein": _suite_goldstein,
    "sampling": _suite_sampling,
}


def _brief(value):
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size == 1:
        return f"{arr[0]:.6g}"
    return "[" + ", ".join(f"{v:.4g}" for v in arr.ravel()[:6]) + (", ...]" if arr.size > 6 else "]")


def run_verification(suite=("full",), seed: int = 0, report_path=None):
    """Run oracle checks; returns ``(reports, exit_status, report_text)``, status 2 on any failure."""
    names = list(SUITES) if "full" in suite else list(suite)
    for name in names:
        if name not in SUITES:
            raise ConfigurationError(f"suite: unknown check {name!r}; expected one of {sorted(SUITES)} or full")
    reports = []
    for name in names:
        reports.extend(SUITES[name](seed))
    lines = [f"ozd verification report (seed={seed}, version {__version__})"]
    for r in reports:
        status = {True: "PASS", False: "FAIL", None: "INFO"}[r.passed]
        lines.append(f"{status}  {r.name}  estimate={_brief(r.estimate)}  se={_brief(r.standard_error)}  "
                     f"N={r.samples}  tol: {r.tolerance}")
    failed = sum(r.passed is False for r in reports)
    lines.append(f"{len(reports) - failed}/{len(reports)} checks passed")
    text = "\n".join(lines) + "\n"
    if report_path is not None:
        Path(report_path).write_text(text, encoding="utf-8")
    return reports, (2 if failed else 0), text
