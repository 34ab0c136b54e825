"""Benchmark objectives behind a single black-box interface.

Objectives are vectorised: ``obj.fn`` maps an array of shape ``(..., d)``
to shape ``(...)``. Calling the object on a single point returns a float.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError
from .rng import as_generator, standard_normal

TABLE3_NAMES = ("sparse-group-lasso", "huber", "elastic-net", "l1", "inf-norm", "total-variation")


@dataclass(frozen=True)
class Objective:
    name: str
    dim: int
    fn: Callable[[np.ndarray], np.ndarray]
    L0: Optional[float] = None
    L1: Optional[float] = None
    f_star: Optional[float] = None
    x_star: Optional[np.ndarray] = None
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    convex: bool = True
    thread_safe: bool = True
    params: dict = field(default_factory=dict)

    def __call__(self, x) -> float:
        return float(self.fn(np.asarray(x, dtype=float)))

    def batch(self, points) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(points, dtype=float)), dtype=float)

    def gap(self, x) -> float:
        """``f(x) - f_star``, or ``f(x)`` when the minimum is unknown."""
        value = self(x)
        return value - self.f_star if self.f_star is not None else value


def power_iteration(matrix: np.ndarray, tol: float = 1e-10, max_iter: int = 10_000) -> float:
    """Largest eigenvalue of a symmetric PSD matrix.

    Stops when the Rayleigh quotient changes by at most ``tol`` relative.
    """
    n = matrix.shape[0]
    v = np.ones(n) / np.sqrt(n)
    lam = float(v @ matrix @ v)
    for _ in range(max_iter):
        w = matrix @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        new = float(v @ matrix @ v)
        if abs(new - lam) <= tol * max(abs(new), 1e-300):
            return new
        lam = new
    raise ConfigurationError(f"power iteration did not converge in {max_iter} iterations")


def make_quadratic(d: int, rng=None, A=None) -> Objective:
    """``f(x) = 0.5 * ||A x||^2`` with ``A`` i.i.d. standard Gaussian unless given."""
    if d < 1:
        raise ConfigurationError("d must be >= 1")
    if A is None:
        A = standard_normal(as_generator(rng), (d, d))
    A = np.array(A, dtype=float)
    if A.shape != (d, d):
        raise ConfigurationError(f"A must be {d}x{d}, got {A.shape}")
    H = A.T @ A
    L1 = power_iteration(H)

    def fn(x):
        ax = x @ A.T
        return 0.5 * np.sum(ax * ax, axis=-1)

    return Objective(
        name="quadratic", dim=d, fn=fn, L1=L1, f_star=0.0, x_star=np.zeros(d),
        grad=lambda x: np.asarray(x, dtype=float) @ H, params={"A": A},
    )


def make_shifted_l1(d: int) -> Objective:
    """``f(x) = ||x - v||_1`` with ``v = (0, 1, ..., d-1)``."""
    if d < 1:
        raise ConfigurationError("d must be >= 1")
    shift = np.arange(d, dtype=float)
    return Objective(
        name="shifted_l1", dim=d, fn=lambda x: np.sum(np.abs(x - shift), axis=-1),
        L0=float(np.sqrt(d)), f_star=0.0, x_star=shift,
    )


def _norm(x):
    return np.sqrt(np.sum(x * x, axis=-1))


def make_table3_objective(name: str, d: int, **params) -> Objective:
    """Extended convex test functions, all minimised at the origin with value 0."""
    zero = np.zeros(d)
    if name == "sparse-group-lasso":
        groups = int(params.get("groups", 3))
        size = int(params.get("group_size", 3))
        if groups * size > d:
            raise ConfigurationError(f"{groups} groups of {size} do not fit in d={d}")
        cut = groups * size

        def fn(x):
            blocks = x[..., :cut].reshape(x.shape[:-1] + (groups, size))
            return np.sum(_norm(blocks), axis=-1)

        return Objective(name, d, fn, L0=float(np.sqrt(groups)), f_star=0.0, x_star=zero,
                         params={"groups": groups, "group_size": size})
    if name == "huber":
        delta = float(params.get("delta", 0.5))
        if delta <= 0:
            raise ConfigurationError("huber delta must be > 0")

        def fn(x):
            r = _norm(x)
            return np.where(r <= delta, 0.5 * r * r, delta * r - 0.5 * delta * delta)

        return Objective(name, d, fn, L0=delta, L1=1.0, f_star=0.0, x_star=zero,
                         grad=lambda x: np.asarray(x) * min(1.0, delta / max(np.linalg.norm(x), 1e-300)),
                         params={"delta": delta})
    if name == "elastic-net":
        a = float(params.get("alpha", 0.5))
        b = float(params.get("beta", 0.5))
        return Objective(name, d, lambda x: a * np.sum(np.abs(x), axis=-1) + 0.5 * b * np.sum(x * x, axis=-1),
                         f_star=0.0, x_star=zero, params={"alpha": a, "beta": b})
    if name == "l1":
        return Objective(name, d, lambda x: np.sum(np.abs(x), axis=-1), L0=float(np.sqrt(d)),
                         f_star=0.0, x_star=zero)
    if name == "inf-norm":
        return Objective(name, d, lambda x: np.max(np.abs(x), axis=-1), L0=1.0, f_star=0.0, x_star=zero)
    if name == "total-variation":
        if d < 2:
            raise ConfigurationError("total variation needs d >= 2")
        # ||D x||_1 <= sqrt(d-1) ||D x||_2 <= 2 sqrt(d-1) ||x||_2
        return Objective(name, d, lambda x: np.sum(np.abs(np.diff(x, axis=-1)), axis=-1),
                         L0=2.0 * np.sqrt(d - 1), f_star=0.0, x_star=zero)
    raise ConfigurationError(f"unknown objective {name!r}; expected one of {TABLE3_NAMES}")


def make_objective(name: str, d: int, rng=None, **params) -> Objective:
    """Build any library objective by name (used by the experiment harness)."""
    if name in ("quadratic", "f1"):
        return make_quadratic(d, rng)
    if name in ("shifted_l1", "f2"):
        return make_shifted_l1(d)
    return make_table3_objective(name, d, **params)


def affine(c, b: float = 0.0) -> Objective:
    """``f(x) = <c, x> + b``; handy for exactness checks."""
    c = np.asarray(c, dtype=float)
    return Objective("affine", c.size, lambda x: x @ c + b, L0=float(np.linalg.norm(c)), L1=0.0,
                     grad=lambda x: c.copy(), convex=True, params={"c": c})
