"""Finite-difference gradient surrogates.

Structured kinds use the columns ``p_i`` of an :class:`OrthoDirections`
block and the ``d / ell`` prefactor:

    central       (d/ell) sum_i (f(x + h p_i) - f(x - h p_i)) / (2h) p_i
    forward       (d/ell) sum_i (f(x + h p_i) - f(x)) / h p_i
    single-point  (d/ell) sum_i f(x + h p_i) / h p_i

Unstructured baselines draw ``ell`` i.i.d. directions: Gaussian vectors
with a ``1 / ell`` prefactor (``E[u u^T] = I``) or sphere points with a
``d / ell`` prefactor (``E[u u^T] = I / d``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .directions import OrthoDirections
from .errors import DomainError, EstimationError
from .rng import as_generator, standard_normal

KINDS = ("central", "forward", "single-point")
BASELINES = ("gaussian", "spherical")


def evals_per_estimate(kind: str, ell: int) -> int:
    if kind in ("central", "gaussian", "spherical"):
        return 2 * ell
    if kind == "forward":
        return ell + 1
    if kind == "single-point":
        return ell
    raise DomainError(f"unknown estimator kind {kind!r}")


@dataclass(frozen=True)
class GradientEstimate:
    vector: np.ndarray
    evals_used: int


@dataclass
class EvalCounter:
    evaluations: int = 0

    def add(self, n: int) -> None:
        self.evaluations += int(n)


def _evaluate(f, points):
    values = f.batch(points)
    bad = ~np.isfinite(values)
    if bad.any():
        idx = np.unravel_index(np.argmax(bad), bad.shape)
        point = np.asarray(points)[idx]
        raise EstimationError(f"objective returned {values[idx]} at probe point {point}", point=point)
    return values


def surrogate_from_columns(f, x, cols, h: float, kind: str = "central", scale=None) -> np.ndarray:
    """Surrogate for a direction block of shape ``(d, ell)`` or a stack ``(n, d, ell)``.

    ``scale`` overrides the ``d / ell`` prefactor. Returns shape ``(d,)`` or ``(n, d)``.
    """
    if h <= 0:
        raise DomainError(f"h must be > 0, got {h}")
    x = np.asarray(x, dtype=float)
    cols = np.asarray(cols, dtype=float)
    d, ell = cols.shape[-2:]
    if d != x.shape[-1]:
        raise DomainError(f"directions have dimension {d} but x has dimension {x.shape[-1]}")
    if scale is None:
        scale = d / ell
    dirs = np.swapaxes(cols, -1, -2)  # (..., ell, d)
    plus = _evaluate(f, x + h * dirs)
    if kind == "central":
        minus = _evaluate(f, x - h * dirs)
        weights = (plus - minus) / (2.0 * h)
    elif kind == "forward":
        weights = (plus - _evaluate(f, x)) / h
    elif kind == "single-point":
        weights = plus / h
    else:
        raise DomainError(f"unknown estimator kind {kind!r}; expected one of {KINDS}")
    return scale * np.einsum("...i,...id->...d", weights, dirs)


def _structured(f, x, dirs: OrthoDirections, h, kind, counter):
    vec = surrogate_from_columns(f, x, dirs.columns, h, kind)
    used = evals_per_estimate(kind, dirs.count)
    if counter is not None:
        counter.add(used)
    return GradientEstimate(vec, used)


def central_surrogate(f, x, dirs: OrthoDirections, h: float, counter: EvalCounter | None = None) -> GradientEstimate:
    return _structured(f, x, dirs, h, "central", counter)


def forward_surrogate(f, x, dirs: OrthoDirections, h: float, counter: EvalCounter | None = None) -> GradientEstimate:
    return _structured(f, x, dirs, h, "forward", counter)


def single_point_surrogate(f, x, dirs: OrthoDirections, h: float, counter: EvalCounter | None = None) -> GradientEstimate:
    return _structured(f, x, dirs, h, "single-point", counter)


def structured_surrogate(f, x, dirs: OrthoDirections, h: float, kind: str = "central",
                         counter: EvalCounter | None = None) -> GradientEstimate:
    return _structured(f, x, dirs, h, kind, counter)


def gaussian_directions(d: int, ell: int, rng, n: int | None = None) -> np.ndarray:
    """i.i.d. standard Gaussian directions as columns, ``(d, ell)`` or ``(n, d, ell)``."""
    shape = (d, ell) if n is None else (n, d, ell)
    return standard_normal(as_generator(rng), shape)


def spherical_directions(d: int, ell: int, rng, n: int | None = None) -> np.ndarray:
    u = gaussian_directions(d, ell, rng, n)
    return u / np.linalg.norm(u, axis=-2, keepdims=True)


def _baseline(f, x, ell, h, rng, kind, counter):
    if ell < 1:
        raise DomainError(f"ell must be >= 1, got {ell}")
    d = np.asarray(x).shape[-1]
    if kind == "gaussian":
        vec = surrogate_from_columns(f, x, gaussian_directions(d, ell, rng), h, "central", scale=1.0 / ell)
    else:
        vec = surrogate_from_columns(f, x, spherical_directions(d, ell, rng), h, "central", scale=d / ell)
    if counter is not None:
        counter.add(2 * ell)
    return GradientEstimate(vec, 2 * ell)


def gaussian_surrogate(f, x, ell: int, h: float, rng, counter: EvalCounter | None = None) -> GradientEstimate:
    return _baseline(f, x, ell, h, rng, "gaussian", counter)


def spherical_surrogate(f, x, ell: int, h: float, rng, counter: EvalCounter | None = None) -> GradientEstimate:
    return _baseline(f, x, ell, h, rng, "spherical", counter)
