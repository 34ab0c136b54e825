"""Reproducible random streams.

Every random draw in the package goes through a :class:`RngStream`, a
``(seed, stream)`` pair of 64-bit unsigned integers that keys numpy's
counter-based Philox4x64 bit generator. Identical pairs yield identical
draw sequences on every platform numpy supports.

Gaussian variates are produced by the Box-Muller transform applied to the
stream's uniform doubles (see :func:`standard_normal`), so traces do not
depend on numpy's internal normal sampler.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream: int = 0

    def __post_init__(self):
        for name in ("seed", "stream"):
            value = getattr(self, name)
            if not 0 <= int(value) <= _MASK64:
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {value}")

    def generator(self) -> np.random.Generator:
        """A fresh generator positioned at the start of this stream."""
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, index: int) -> "RngStream":
        """Derive an independent sub-stream, e.g. one per repetition or sample block."""
        return RngStream(self.seed, _splitmix64(self.stream ^ _splitmix64(int(index))))


def as_generator(rng) -> np.random.Generator:
    """Accept an RngStream, a Generator (consumed in place) or an int seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng)).generator()
    raise TypeError(f"cannot build a generator from {type(rng).__name__}")


def standard_normal(gen: np.random.Generator, shape) -> np.ndarray:
    """Standard Gaussian array via Box-Muller on uniform doubles.

    Consumes ``2 * ceil(n / 2)`` uniforms for ``n`` outputs; the first half of
    the pairs supplies the cosine branch, the second half the sine branch.
    """
    shape = (shape,) if np.isscalar(shape) else tuple(shape)
    n = int(np.prod(shape, dtype=np.int64))
    m = (n + 1) // 2
    u = gen.random(2 * m)
    radius = np.sqrt(-2.0 * np.log1p(-u[:m]))  # 1 - U lies in (0, 1]
    angle = 2.0 * np.pi * u[m:]
    z = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])
    return z[:n].reshape(shape)
