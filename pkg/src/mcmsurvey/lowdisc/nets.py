"""Base-2 digital nets: Sobol' points, digit interlacing and digital shifts.

Coordinates are handled as integers ``k`` with ``x = k / 2^precision``; every
operation here is exact in binary arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from .pointset import (
    NET_KINDS,
    STREAM_DIGITAL_SHIFT,
    DimsOutOfRange,
    KindMismatch,
    MOutOfRange,
    PointSetError,
    PrecisionOverflow,
    UnitPointSet,
    rng_for,
)

FLOAT_BITS = 53


@dataclass(frozen=True, eq=False)
class DirectionNumbers:
    """Generating-matrix columns, ``columns[d, j]`` for dimension d, column j."""

    columns: np.ndarray
    precision: int

    def __post_init__(self):
        cols = np.asarray(self.columns, dtype=np.uint64)
        object.__setattr__(self, "columns", cols)
        if cols.ndim != 2 or cols.shape[1] > self.precision:
            raise PointSetError("columns must be (dims, <= precision)")
        for j in range(cols.shape[1]):
            lead = np.uint64(1) << np.uint64(self.precision - 1 - j)
            # upper triangular with unit diagonal: row j set, rows below j clear
            if np.any((cols[:, j] & lead) == 0) or np.any(cols[:, j] & (lead - np.uint64(1))):
                raise PointSetError(f"column {j} violates the leading-bit invariant")

    @property
    def dims(self) -> int:
        return self.columns.shape[0]


@lru_cache(maxsize=None)
def default_direction_numbers() -> DirectionNumbers:
    text = resources.files(__package__).joinpath("data/sobol_directions.txt").read_text()
    values = [int(tok) for tok in text.split()]
    dims, prec = values[0], values[1]
    cols = np.array(values[2:], dtype=np.uint64).reshape(dims, prec)
    return DirectionNumbers(cols, prec)


def _gray_digits(n: int, dirs: DirectionNumbers, dims: int) -> np.ndarray:
    """Integer coordinates (n, dims) of the first ``n`` points, Gray-code order."""
    nbits = max(int(n - 1).bit_length(), 1)
    if nbits > dirs.columns.shape[1]:
        raise MOutOfRange(f"{n} points need {nbits} columns, have {dirs.columns.shape[1]}")
    idx = np.arange(n, dtype=np.uint64)
    gray = idx ^ (idx >> np.uint64(1))
    out = np.zeros((n, dims), dtype=np.uint64)
    for b in range(nbits):
        bit = ((gray >> np.uint64(b)) & np.uint64(1)).astype(bool)
        out[bit] ^= dirs.columns[:dims, b]
    return out


def sobol(m: int, dims: int = 2, dirs: DirectionNumbers | None = None) -> UnitPointSet:
    """The first 2^m Sobol' points (Gray-code order) in ``dims`` dimensions.

    The first 2^m points only involve the leading m rows of each generating
    matrix, so the set is returned with ``precision = m``.
    """
    dirs = dirs or default_direction_numbers()
    if dims > dirs.dims or dims < 1:
        raise DimsOutOfRange(f"dims={dims}, direction numbers provide {dirs.dims}")
    if m < 0:
        raise MOutOfRange("m must be >= 0")
    k = _gray_digits(1 << m, dirs, dims) >> np.uint64(dirs.precision - m)
    return UnitPointSet("sobol", (k.astype(float) / 2.0**m)[None], precision=m)


def sobol_sequence(n: int, dims: int = 2, dirs: DirectionNumbers | None = None) -> UnitPointSet:
    """First ``n`` points of the Sobol' sequence (n need not be a power of two)."""
    dirs = dirs or default_direction_numbers()
    if dims > dirs.dims:
        raise DimsOutOfRange(f"dims={dims}, direction numbers provide {dirs.dims}")
    m = max(int(n - 1).bit_length(), 1)
    k = _gray_digits(n, dirs, dims) >> np.uint64(dirs.precision - m)
    return UnitPointSet("sobol", (k.astype(float) / 2.0**m)[None], precision=m)


def _to_int(x: np.ndarray, bits: int) -> np.ndarray:
    k = np.asarray(x) * 2.0**bits
    if np.any(k != np.floor(k)):
        raise PrecisionOverflow(f"coordinates carry more than {bits} binary digits")
    return k.astype(np.uint64)


def interlace(base: UnitPointSet, alpha: int, precision: int | None = None) -> UnitPointSet:
    """Interleave the digits of ``alpha`` consecutive source dimensions.

    Output dimension d takes source dimensions alpha*d .. alpha*d + alpha - 1;
    binary digit i of source k becomes output digit alpha*i + k.
    """
    if alpha not in (2, 3):
        raise PointSetError("alpha must be 2 or 3")
    if base.kind != "sobol":
        raise KindMismatch(f"interlace expects a Sobol' set, got {base.kind!r}")
    bits = base.precision if precision is None else precision
    if bits is None or alpha * bits > FLOAT_BITS:
        raise PrecisionOverflow(f"alpha*precision = {alpha}*{bits} exceeds {FLOAT_BITS} bits")
    if base.dims % alpha:
        raise DimsOutOfRange(f"{base.dims} source dims not divisible by alpha={alpha}")
    src = _to_int(base.points, bits)
    R, N, S = src.shape
    out = np.zeros((R, N, S // alpha), dtype=np.uint64)
    width = alpha * bits
    for d in range(S // alpha):
        for k in range(alpha):
            col = src[:, :, alpha * d + k]
            for i in range(bits):
                bit = (col >> np.uint64(bits - 1 - i)) & np.uint64(1)
                out[:, :, d] |= bit << np.uint64(width - 1 - (alpha * i + k))
    kind = f"sobol_interlaced_{alpha}"
    return UnitPointSet(kind, out.astype(float) / 2.0**width, seed=base.seed, precision=width)


def shift_masks(seed: int, shift_index: int, dims: int, bits: int = FLOAT_BITS) -> np.ndarray:
    rng = rng_for(seed, STREAM_DIGITAL_SHIFT, shift_index)
    return rng.integers(0, 1 << bits, size=dims, dtype=np.uint64)


def apply_digital_shift(points: UnitPointSet, masks: np.ndarray) -> UnitPointSet:
    """XOR every coordinate's 53 binary digits with ``masks`` (one per dim, or per block)."""
    if points.kind not in NET_KINDS:
        raise KindMismatch(
            f"digital shifts apply to digital nets, not {points.kind!r}; "
            "lattices use modulo-1 shifts"
        )
    k = _to_int(points.points, FLOAT_BITS)
    masks = np.asarray(masks, dtype=np.uint64)
    if masks.ndim == 1:
        masks = masks[None, None, :]
    elif masks.ndim == 2:
        masks = masks[:, None, :]
    shifted = (k ^ masks).astype(float) / 2.0**FLOAT_BITS
    return UnitPointSet(points.kind, shifted, seed=points.seed, precision=FLOAT_BITS)


def digital_shift(points: UnitPointSet, seed: int | None) -> UnitPointSet:
    """Random digital shift; block r of the set gets the mask for (seed, r).

    ``seed=None`` means the zero mask (identity).
    """
    if seed is None:
        masks = np.zeros((points.n_shifts, points.dims), dtype=np.uint64)
    else:
        masks = np.stack([shift_masks(seed, r, points.dims) for r in range(points.n_shifts)])
    out = apply_digital_shift(points, masks)
    return UnitPointSet(out.kind, out.points, seed=seed, precision=out.precision)
