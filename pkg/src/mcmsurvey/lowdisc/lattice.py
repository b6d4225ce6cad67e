"""Base-2 rank-1 lattice rules with Cranley-Patterson shifts."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from .pointset import MOutOfRange, PointSetError, UnitPointSet


@dataclass(frozen=True)
class GeneratingVector:
    max_log2: int
    components: tuple[int, ...]

    def __post_init__(self):
        comps = tuple(int(c) for c in self.components)
        object.__setattr__(self, "components", comps)
        if len(comps) < 2:
            raise PointSetError("generating vector needs at least 2 components")
        for c in comps:
            if c % 2 == 0 or not 0 < c < 2**self.max_log2:
                raise PointSetError(f"component {c} must be odd and below 2^{self.max_log2}")


@lru_cache(maxsize=None)
def default_generating_vector() -> GeneratingVector:
    """The bundled 10-dimensional vector (see ``tools/build_lattice_vector.py``)."""
    text = resources.files(__package__).joinpath("data/lattice_vector.txt").read_text()
    values = [int(tok) for tok in text.split()]
    return GeneratingVector(values[0], tuple(values[1:]))


def _cp_shift(k: np.ndarray, m: int, shift) -> np.ndarray:
    x = k / float(1 << m)
    if shift is None:
        return x
    x = x + np.asarray(shift, dtype=float)
    x -= np.floor(x)
    # 1 - tiny can round up to 1.0
    x[x >= 1.0] = 0.0
    return x


def rank1_lattice(m: int, gen: GeneratingVector | None = None, shift=None, dims: int = 2):
    """The 2^m-point lattice ``frac(n z / 2^m + shift)``, n = 0 .. 2^m - 1."""
    gen = gen or default_generating_vector()
    if not 0 <= m <= gen.max_log2:
        raise MOutOfRange(f"m={m} outside [0, {gen.max_log2}]")
    z = np.array(gen.components[:dims], dtype=np.int64)
    n = np.arange(1 << m, dtype=np.int64)
    k = (n[:, None] * z[None, :]) & ((1 << m) - 1)
    return UnitPointSet("lattice", _cp_shift(k, m, shift)[None])


def lattice_sequence(n: int, gen: GeneratingVector | None = None, shift=None, dims: int = 2):
    """First ``n`` points of the embedded lattice sequence (radical-inverse order).

    Any prefix of length 2^m is the full 2^m-point lattice, so this is the
    extensible form used when a point count is not a power of two.
    """
    gen = gen or default_generating_vector()
    mm = gen.max_log2
    if n > (1 << mm):
        raise MOutOfRange(f"n={n} exceeds 2^{mm}")
    z = np.array(gen.components[:dims], dtype=np.int64)
    idx = np.arange(n, dtype=np.int64)
    rev = np.zeros_like(idx)
    for b in range(mm):
        rev |= ((idx >> b) & 1) << (mm - 1 - b)
    k = (rev[:, None] * z[None, :]) & ((1 << mm) - 1)
    return UnitPointSet("lattice", _cp_shift(k, mm, shift)[None])
