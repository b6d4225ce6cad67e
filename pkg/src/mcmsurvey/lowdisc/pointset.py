"""The point-set container shared by all generators, plus plain Monte Carlo."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

KINDS = (
    "mc",
    "lattice",
    "sobol",
    "sobol_interlaced_2",
    "sobol_interlaced_3",
    "triangle_mapped",
)
NET_KINDS = ("sobol", "sobol_interlaced_2", "sobol_interlaced_3")

# stream tags keep the random draws of different generators independent
STREAM_MC = 0x4D43
STREAM_LATTICE_SHIFT = 0x4C53
STREAM_DIGITAL_SHIFT = 0x4453


class PointSetError(ValueError):
    pass


class MOutOfRange(PointSetError):
    pass


class DimsOutOfRange(PointSetError):
    pass


class PrecisionOverflow(PointSetError):
    pass


class KindMismatch(PointSetError):
    pass


class EmptyPointSet(PointSetError):
    pass


def rng_for(seed: int, *stream: int) -> np.random.Generator:
    """Counter-based (Philox) generator keyed by ``seed`` and a stream path."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *stream])
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True, eq=False)
class UnitPointSet:
    """``n_shifts`` blocks of ``n_points`` points in [0, 1)^dims.

    ``points`` has shape (n_shifts, n_points, dims). ``precision`` is the
    number of significant binary digits per coordinate for digital-net
    kinds (None for mc and lattice sets).
    """

    kind: str
    points: np.ndarray
    seed: Optional[int] = None
    precision: Optional[int] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PointSetError(f"unknown point-set kind {self.kind!r}")
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 2:
            pts = pts[None]
        if pts.ndim != 3 or pts.shape[1] == 0:
            raise EmptyPointSet("point set must hold at least one point")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n_points(self) -> int:
        return self.points.shape[1]

    @property
    def n_shifts(self) -> int:
        return self.points.shape[0]

    @property
    def dims(self) -> int:
        return self.points.shape[2]

    def flat(self) -> np.ndarray:
        return self.points.reshape(-1, self.dims)


def mc_uniform(n: int, seed: int, n_shifts: int = 1, dims: int = 2) -> UnitPointSet:
    """``n`` pseudo-uniform points per block; block ``r`` uses its own stream."""
    if n < 1:
        raise EmptyPointSet("n must be >= 1")
    blocks = [rng_for(seed, STREAM_MC, r).random((n, dims)) for r in range(n_shifts)]
    return UnitPointSet("mc", np.stack(blocks), seed=seed)
