"""Seeded random directions on the sphere, in the ball and from the Gaussian.

Every stream is a Philox counter-based generator keyed by ``(seed, stream_id)``,
so a stream's full sample sequence depends only on those two integers.
Drawing a block of ``m`` directions yields exactly the rows that ``m``
successive single draws would have produced.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass
class RngState:
    """A deterministic random stream.

    Parameters
    ----------
    seed:
        Root seed (unsigned 64-bit).
    stream_id:
        Stream key (unsigned 64-bit). Distinct ids give independent streams.
    """

    seed: int = 0
    stream_id: int = 0
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.seed = int(self.seed) & _MASK64
        self.stream_id = int(self.stream_id) & _MASK64
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self._gen = np.random.Generator(np.random.Philox(ss))

    @property
    def counter(self) -> int:
        """Number of 256-bit Philox blocks consumed so far."""
        st = self._gen.bit_generator.state["state"]["counter"]
        value = 0
        for i, word in enumerate(st):
            value |= int(word) << (64 * i)
        return value

    @property
    def generator(self) -> np.random.Generator:
        return self._gen


def split_stream(rng: RngState, trial: int) -> RngState:
    """Child stream keyed by ``trial``; the parent is left untouched."""
    words = np.random.SeedSequence(
        entropy=(rng.stream_id, int(trial) & _MASK64, 0x5EED)
    ).generate_state(2, np.uint32)
    child_id = (int(words[0]) << 32) | int(words[1])
    return RngState(rng.seed, child_id)


def gaussian_sample(rng: RngState, n: int, size: int | None = None) -> np.ndarray:
    """Standard normal vector of length ``n`` (or a ``(size, n)`` block)."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    shape = (n,) if size is None else (size, n)
    return rng.generator.standard_normal(shape)


def _row_norms(g):
    return np.sqrt((g * g).sum(axis=-1))


def sphere_sample(rng: RngState, n: int, size: int | None = None) -> np.ndarray:
    """Uniform direction on the unit sphere by Gaussian normalisation."""
    g = gaussian_sample(rng, n, size)
    norms = _row_norms(g)
    # Measure-zero event; redraw the offending rows.
    while np.any(norms == 0.0):
        if size is None:
            g = gaussian_sample(rng, n)
        else:
            bad = np.flatnonzero(norms == 0.0)
            g[bad] = gaussian_sample(rng, n, bad.size)
        norms = _row_norms(g)
    return g / norms[..., None] if size is not None else g / norms


def ball_sample(rng: RngState, n: int, size: int | None = None) -> np.ndarray:
    """Uniform point in the closed unit ball.

    A sphere direction scaled by ``U**(1/n)`` with ``U`` uniform on ``(0, 1]``.
    For blocks, all directions are drawn before all radii.
    """
    u = sphere_sample(rng, n, size)
    radius = (1.0 - rng.generator.random(size)) ** (1.0 / n)
    if size is None:
        return u * radius
    return u * radius[:, None]
