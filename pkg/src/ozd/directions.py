"""Random column-orthonormal direction matrices.

Three generators are provided:

* ``qr``          -- Haar-distributed, via QR of a Gaussian matrix with the
                     sign of ``diag(R)`` folded into ``Q``.
* ``householder`` -- product of ``m`` random Householder reflectors.
* ``butterfly``   -- recursive 2x2 rotation blocks, ``d`` a power of two.

Every generator returns the first ``ell`` columns of a ``d x d`` orthogonal
matrix ``G``, i.e. the directions ``G e_1, ..., G e_ell``.
"""

from __future__ import annotations

import gc
import time
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .rng import as_generator, standard_normal

GENERATORS = ("qr", "householder", "butterfly")


@dataclass(frozen=True)
class OrthoDirections:
    columns: np.ndarray

    @property
    def dim(self) -> int:
        return self.columns.shape[0]

    @property
    def count(self) -> int:
        return self.columns.shape[1]

    def __iter__(self):
        return iter(self.columns.T)


def _check_shape(d, ell):
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got d={d}")
    if not 1 <= ell <= d:
        raise DomainError(f"direction count must satisfy 1 <= ell <= d, got ell={ell}, d={d}")


def haar_qr_batch(d: int, ell: int, n: int, rng) -> np.ndarray:
    """``n`` independent Haar direction blocks, shape ``(n, d, ell)``.

    Uses the reduced QR of a ``d x ell`` Gaussian block. After the sign
    correction its ``Q`` factor is uniform on the Stiefel manifold, which is
    the law of the first ``ell`` columns of a Haar matrix on ``O(d)``.
    """
    _check_shape(d, ell)
    gen = as_generator(rng)
    a = standard_normal(gen, (n, d, ell))
    q, r = np.linalg.qr(a)
    signs = np.sign(np.diagonal(r, axis1=-2, axis2=-1)).copy()
    signs[signs == 0] = 1.0
    return q * signs[:, None, :]


def sample_haar_qr(d: int, ell: int, rng) -> OrthoDirections:
    return OrthoDirections(haar_qr_batch(d, ell, 1, rng)[0])


def householder_from_vectors(vectors, ell: int) -> OrthoDirections:
    """First ``ell`` columns of ``H(v_1) H(v_2) ... H(v_m)``, ``H(v) = I - 2 v v^T``.

    ``vectors`` has shape ``(m, d)``; rows are normalised before use.
    """
    v = np.atleast_2d(np.asarray(vectors, dtype=float))
    d = v.shape[1]
    _check_shape(d, ell)
    v = v / np.linalg.norm(v, axis=1, keepdims=True)
    m = np.eye(d, ell)
    for vj in v[::-1]:
        m = m - 2.0 * np.outer(vj, vj @ m)
    return OrthoDirections(m)


def sample_householder(d: int, ell: int, m: int, rng) -> OrthoDirections:
    _check_shape(d, ell)
    if m < 1:
        raise DomainError(f"reflector count must be >= 1, got m={m}")
    gen = as_generator(rng)
    return householder_from_vectors(standard_normal(gen, (m, d)), ell)


def householder_batch(d: int, ell: int, m: int, n: int, rng) -> np.ndarray:
    _check_shape(d, ell)
    if m < 1:
        raise DomainError(f"reflector count must be >= 1, got m={m}")
    gen = as_generator(rng)
    v = standard_normal(gen, (n, m, d))
    v /= np.linalg.norm(v, axis=-1, keepdims=True)
    out = np.broadcast_to(np.eye(d, ell), (n, d, ell)).copy()
    for j in range(m - 1, -1, -1):
        vj = v[:, j, :]
        out -= 2.0 * vj[:, :, None] * np.einsum("nd,nde->ne", vj, out)[:, None, :]
    return out


def _log2_exact(d: int) -> int:
    if d < 1 or d & (d - 1):
        raise DomainError(f"butterfly matrices need d to be a power of two, got d={d}")
    return d.bit_length() - 1


def butterfly_from_angles(angles) -> np.ndarray:
    """Full ``2**n x 2**n`` butterfly matrix for the given rotation angles."""
    g = np.ones((1, 1))
    for theta in np.atleast_1d(np.asarray(angles, dtype=float)):
        c, s = np.cos(theta), np.sin(theta)
        g = np.kron(np.array([[c, s], [-s, c]]), g)
    return g


def sample_butterfly(d: int, ell: int, rng) -> OrthoDirections:
    n = _log2_exact(d)
    _check_shape(d, ell)
    gen = as_generator(rng)
    angles = 2.0 * np.pi * gen.random(n)
    return OrthoDirections(butterfly_from_angles(angles)[:, :ell])


def sample_directions(generator: str, d: int, ell: int, rng, m: int = 1) -> OrthoDirections:
    """Dispatch on generator id (``qr``, ``householder`` or ``butterfly``)."""
    if generator == "qr":
        return sample_haar_qr(d, ell, rng)
    if generator == "householder":
        return sample_householder(d, ell, m, rng)
    if generator == "butterfly":
        return sample_butterfly(d, ell, rng)
    raise DomainError(f"unknown generator {generator!r}; expected one of {GENERATORS}")


def sample_directions_batch(generator: str, d: int, ell: int, n: int, rng, m: int = 1) -> np.ndarray:
    """Stack of ``n`` direction blocks, shape ``(n, d, ell)``."""
    if generator == "qr":
        return haar_qr_batch(d, ell, n, rng)
    if generator == "householder":
        return householder_batch(d, ell, m, n, rng)
    gen = as_generator(rng)
    return np.stack([sample_directions(generator, d, ell, gen, m).columns for _ in range(n)])


def validate_orthonormal(dirs, tol: float = 1e-12) -> bool:
    cols = dirs.columns if isinstance(dirs, OrthoDirections) else np.asarray(dirs)
    gram = cols.T @ cols
    return bool(np.max(np.abs(gram - np.eye(gram.shape[0]))) <= tol)


@dataclass(frozen=True)
class TimingRow:
    d: int
    mean: float
    std: float


def benchmark_generation(d_list, method: str = "qr", repetitions: int = 500, m: int = 1, seed: int = 0):
    """Wall-clock cost of generating a full ``d x d`` direction matrix.

    Returns one :class:`TimingRow` per dimension with the mean and sample
    standard deviation in seconds over ``repetitions`` draws.
    """
    if repetitions < 2:
        raise DomainError("repetitions must be >= 2")
    gen = np.random.Generator(np.random.Philox(seed))
    rows = []
    for d in d_list:
        sample_directions(method, d, d, gen, m=m)  # warm-up, untimed
        samples = np.empty(repetitions)
        # collector pauses would dominate the spread at small d, as in timeit
        gc_was_enabled = gc.isenabled()
        gc.disable()
        try:
            for r in range(repetitions):
                t0 = time.perf_counter()
                sample_directions(method, d, d, gen, m=m)
                samples[r] = time.perf_counter() - t0
        finally:
            if gc_was_enabled:
                gc.enable()
        rows.append(TimingRow(int(d), float(samples.mean()), float(samples.std(ddof=1))))
    return rows
