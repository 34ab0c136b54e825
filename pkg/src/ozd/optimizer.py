"""Orthogonal zeroth-order descent and unstructured finite-difference baselines.

Both optimizers iterate ``x_{k+1} = x_k - alpha_k g_k`` where ``g_k`` is a
finite-difference surrogate at ``x_k`` with smoothing ``h_k``. Runs are
bounded by a budget of objective evaluations so that methods with
different per-iteration costs are compared on the same axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .directions import sample_directions
from .errors import ConfigurationError, DomainError, EstimationError, StateError
from .estimators import (
    BASELINES, KINDS, evals_per_estimate, gaussian_directions, spherical_directions,
    surrogate_from_columns,
)
from .rng import as_generator

SCHEDULE_KINDS = ("power", "constant", "nonsmooth-convex-optimal", "nonsmooth-nonconvex-optimal", "smooth-capped")
H_FLOOR = 1e-12


@dataclass(frozen=True)
class Schedule:
    """Step sizes ``alpha (k+1)^-theta`` and smoothing ``h (k+1)^-rho``, ``k >= 0``."""

    kind: str
    alpha: float
    h: float
    theta: float = 0.0
    rho: float = 0.0
    K: Optional[int] = None
    c: float = 1.0
    alpha_cap: Optional[float] = None

    def step_size(self, k: int) -> float:
        return self.alpha * (k + 1) ** -self.theta

    def smoothing(self, k: int) -> float:
        return self.h * (k + 1) ** -self.rho

    def step_sizes(self, n: int) -> np.ndarray:
        return self.alpha * np.arange(1, n + 1, dtype=float) ** -self.theta

    def describe(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


def _positive(**values):
    for name, v in values.items():
        if v is None:
            raise ConfigurationError(f"missing required parameter {name!r}")
        if not v > 0:
            raise ConfigurationError(f"{name} must be > 0, got {v}")


def make_schedule(kind: str, **p) -> Schedule:
    """Build and validate a step-size / smoothing schedule.

    ``power``
        ``alpha, theta, h, rho``. Requires ``1/2 < theta < 1`` and
        ``theta + rho > 1`` so that ``sum alpha_k = inf``,
        ``sum alpha_k^2 < inf`` and ``sum alpha_k h_k < inf``.
    ``constant``
        ``alpha, h`` and optional smoothing decay ``rho >= 0``. Makes no
        convergence claim and is validated for positivity only.
    ``smooth-capped``
        ``alpha, h, theta, ell, d, L1``. Constant step with smoothing
        ``h (k+1)^-theta``; requires ``alpha < ell / (d L1)`` and ``theta > 1``.
    ``nonsmooth-convex-optimal``
        ``ell, d, dist0, L0, K, h`` and optional ``c`` (default 1) and ``eps``.
        Constant ``alpha = sqrt(ell/d) dist0 / (sqrt(2 c K) L0)``. With ``eps``
        the horizon must satisfy ``K >= 8 c L0^2 dist0^2 (d/ell) / eps^2``
        and ``h <= eps / (2 L0)``.
    ``nonsmooth-nonconvex-optimal``
        ``ell, d, gap0, L0, K, h`` and optional ``c``, ``eps``. Constant
        ``alpha = sqrt(gap0 ell h / (K c L0^3 d sqrt(d)))``; ``gap0`` is
        ``f_h(x0) - min f``. With ``eps`` requires
        ``K >= 4 gap0 c L0^3 d sqrt(d) / (eps^2 ell h)``.
    """
    c = float(p.get("c", 1.0))
    _positive(c=c)
    if kind == "power":
        alpha, theta, h, rho = (p.get(k) for k in ("alpha", "theta", "h", "rho"))
        _positive(alpha=alpha, h=h)
        if theta is None or rho is None:
            raise ConfigurationError("power schedule needs theta and rho")
        if not 0.5 < theta < 1.0:
            raise ConfigurationError(f"power schedule needs 1/2 < theta < 1 (alpha_k square-summable, not summable); got theta={theta}")
        if not theta + rho > 1.0:
            raise ConfigurationError(f"power schedule needs theta + rho > 1 (alpha_k h_k summable); got {theta} + {rho}")
        return Schedule("power", float(alpha), float(h), float(theta), float(rho), c=c)
    if kind == "constant":
        alpha, h, rho = p.get("alpha"), p.get("h"), float(p.get("rho", 0.0))
        _positive(alpha=alpha, h=h)
        if rho < 0:
            raise ConfigurationError(f"rho must be >= 0, got {rho}")
        return Schedule("constant", float(alpha), float(h), 0.0, rho, K=p.get("K"), c=c)
    if kind == "smooth-capped":
        alpha, h, theta = p.get("alpha"), p.get("h"), p.get("theta")
        ell, d, L1 = p.get("ell"), p.get("d"), p.get("L1")
        _positive(alpha=alpha, h=h, ell=ell, d=d, L1=L1)
        cap = ell / (d * L1)
        if not alpha < cap:
            raise ConfigurationError(f"smooth-capped schedule needs alpha < ell/(d L1) = {cap:.6g}; got alpha={alpha:.6g}")
        if theta is None or not theta > 1.0:
            raise ConfigurationError(f"smooth-capped schedule needs smoothing exponent theta > 1 (alpha_k h_k summable); got {theta}")
        return Schedule("smooth-capped", float(alpha), float(h), 0.0, float(theta), K=p.get("K"), c=c, alpha_cap=cap)
    if kind == "nonsmooth-convex-optimal":
        ell, d, dist0, L0, K, h = (p.get(k) for k in ("ell", "d", "dist0", "L0", "K", "h"))
        _positive(ell=ell, d=d, dist0=dist0, L0=L0, K=K, h=h)
        eps = p.get("eps")
        if eps is not None:
            k_min = 8.0 * c * L0**2 * dist0**2 * (d / ell) / eps**2
            if K < k_min:
                raise ConfigurationError(f"horizon K={K} below required 8 c L0^2 ||x0-x*||^2 (d/ell) / eps^2 = {k_min:.6g}")
            if h > eps / (2.0 * L0):
                raise ConfigurationError(f"smoothing h={h} exceeds eps/(2 L0) = {eps / (2.0 * L0):.6g}")
        alpha = math.sqrt(ell / d) * dist0 / (math.sqrt(2.0 * c * K) * L0)
        return Schedule(kind, alpha, float(h), K=int(K), c=c)
    if kind == "nonsmooth-nonconvex-optimal":
        ell, d, gap0, L0, K, h = (p.get(k) for k in ("ell", "d", "gap0", "L0", "K", "h"))
        _positive(ell=ell, d=d, gap0=gap0, L0=L0, K=K, h=h)
        eps = p.get("eps")
        const = c * L0**3 * d * math.sqrt(d)
        if eps is not None:
            k_min = 4.0 * gap0 * const / (eps**2 * ell * h)
            if K < k_min:
                raise ConfigurationError(f"horizon K={K} below required 4 (f_h(x0)-min f) c L0^3 d^1.5 / (eps^2 ell h) = {k_min:.6g}")
        alpha = math.sqrt(gap0 * ell * h / (K * const))
        return Schedule(kind, alpha, float(h), K=int(K), c=c)
    raise ConfigurationError(f"unknown schedule kind {kind!r}; expected one of {SCHEDULE_KINDS}")


@dataclass
class OzdState:
    x: np.ndarray
    k: int = 0
    weighted_sum: Optional[np.ndarray] = None
    weight_total: float = 0.0
    eval_count: int = 0

    def accumulate(self, alpha: float) -> None:
        """Add ``alpha * x`` for the current iterate to the running average."""
        if self.weighted_sum is None:
            self.weighted_sum = np.zeros_like(self.x)
        self.weighted_sum = self.weighted_sum + alpha * self.x
        self.weight_total += alpha


def averaged_iterate(state: OzdState) -> np.ndarray:
    if state.weighted_sum is None or state.weight_total <= 0:
        raise StateError("averaged iterate undefined before the first completed step")
    return state.weighted_sum / state.weight_total


@dataclass
class RunTrace:
    """Record of one optimizer run.

    ``gaps`` has one entry per objective evaluation: the gap of the iterate
    being probed, repeated ``evals_per_iter`` times per iteration.
    ``iter_gaps[k]`` is the gap of ``x_k`` for ``k = 0..K`` and
    ``avg_gaps[k]`` that of the averaged iterate over ``x_0..x_k``.
    """

    gaps: np.ndarray
    iter_gaps: np.ndarray
    avg_gaps: np.ndarray
    alphas: np.ndarray
    hs: np.ndarray
    final_x: np.ndarray
    final_avg: np.ndarray
    evals_per_iter: int
    metadata: dict = field(default_factory=dict)
    iterates: Optional[np.ndarray] = None

    @property
    def iterations(self) -> int:
        return len(self.alphas)

    @property
    def evaluations(self) -> int:
        return len(self.gaps)

    @property
    def final_gap(self) -> float:
        return float(self.iter_gaps[-1])


def _run(f, x0, schedule, budget, per_iter, estimate, metadata, keep_iterates):
    if budget < per_iter:
        raise DomainError(f"budget {budget} is below the {per_iter} evaluations needed per iteration")
    state = OzdState(np.array(x0, dtype=float))
    if state.x.shape != (f.dim,):
        raise DomainError(f"x0 has shape {state.x.shape}, expected ({f.dim},)")
    n_iter = budget // per_iter
    gaps = np.empty(n_iter * per_iter)
    iter_gaps = np.empty(n_iter + 1)
    avg_gaps = np.empty(n_iter)
    alphas = np.empty(n_iter)
    hs = np.empty(n_iter)
    iterates = np.empty((n_iter + 1, f.dim)) if keep_iterates else None
    clamped_at = None

    iter_gaps[0] = f.gap(state.x)
    for k in range(n_iter):
        alpha, h = schedule.step_size(k), schedule.smoothing(k)
        if h < H_FLOOR:
            h = H_FLOOR
            clamped_at = k if clamped_at is None else clamped_at
        if keep_iterates:
            iterates[k] = state.x
        try:
            g = estimate(state.x, h)
        except EstimationError as err:
            raise EstimationError(f"iteration {k}: {err}", point=err.point) from err
        gaps[k * per_iter:(k + 1) * per_iter] = iter_gaps[k]
        state.accumulate(alpha)
        avg_gaps[k] = f.gap(averaged_iterate(state))
        state.x = state.x - alpha * g
        state.k += 1
        state.eval_count += per_iter
        alphas[k], hs[k] = alpha, h
        iter_gaps[k + 1] = f.gap(state.x)
    if keep_iterates:
        iterates[n_iter] = state.x

    metadata = dict(metadata)
    metadata.update(
        objective=f.name, d=f.dim, schedule=schedule.describe(), budget=budget,
        evaluations=int(state.eval_count), iterations=n_iter,
        h_clamped=clamped_at is not None,
    )
    if clamped_at is not None:
        metadata["h_clamped_from_iteration"] = clamped_at
    return RunTrace(gaps, iter_gaps, avg_gaps, alphas, hs, state.x, averaged_iterate(state),
                    per_iter, metadata, iterates)


def run_ozd(f, x0, schedule: Schedule, ell: int, generator: str = "qr", estimator: str = "central",
            budget: int = 1000, rng=0, householder_m: int = 1, keep_iterates: bool = False) -> RunTrace:
    """Orthogonal zeroth-order descent with a fresh direction block per iteration."""
    if estimator not in KINDS:
        raise DomainError(f"unknown estimator {estimator!r}; expected one of {KINDS}")
    if not 1 <= ell <= f.dim:
        raise DomainError(f"ell must satisfy 1 <= ell <= d={f.dim}, got {ell}")
    gen = as_generator(rng)

    def estimate(x, h):
        dirs = sample_directions(generator, f.dim, ell, gen, m=householder_m)
        return surrogate_from_columns(f, x, dirs.columns, h, estimator)

    meta = {"method": "ozd", "ell": ell, "generator": generator, "estimator": estimator, "seed": _seed_of(rng)}
    if generator == "householder":
        meta["householder_m"] = householder_m
    return _run(f, x0, schedule, budget, evals_per_estimate(estimator, ell), estimate, meta, keep_iterates)


def run_baseline(f, x0, schedule: Schedule, ell: int, kind: str = "gaussian", budget: int = 1000,
                 rng=0, keep_iterates: bool = False) -> RunTrace:
    """Central finite differences along ``ell`` i.i.d. Gaussian or spherical directions."""
    if kind not in BASELINES:
        raise DomainError(f"unknown baseline {kind!r}; expected one of {BASELINES}")
    if ell < 1:
        raise DomainError(f"ell must be >= 1, got {ell}")
    gen = as_generator(rng)
    d = f.dim

    def estimate(x, h):
        if kind == "gaussian":
            return surrogate_from_columns(f, x, gaussian_directions(d, ell, gen), h, "central", scale=1.0 / ell)
        return surrogate_from_columns(f, x, spherical_directions(d, ell, gen), h, "central", scale=d / ell)

    meta = {"method": kind, "ell": ell, "estimator": "central", "seed": _seed_of(rng)}
    return _run(f, x0, schedule, budget, 2 * ell, estimate, meta, keep_iterates)


def _seed_of(rng):
    if hasattr(rng, "seed") and hasattr(rng, "stream"):
        return {"seed": int(rng.seed), "stream": int(rng.stream)}
    if isinstance(rng, (int, np.integer)):
        return {"seed": int(rng), "stream": 0}
    return None
