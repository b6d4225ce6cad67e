"""Integration point sets: MC, rank-1 lattices, Sobol' and interlaced Sobol' nets."""

from __future__ import annotations

import numpy as np

from .lattice import (
    GeneratingVector,
    default_generating_vector,
    lattice_sequence,
    rank1_lattice,
)
from .nets import (
    DirectionNumbers,
    apply_digital_shift,
    default_direction_numbers,
    digital_shift,
    interlace,
    shift_masks,
    sobol,
    sobol_sequence,
)
from .pointset import (
    KINDS,
    NET_KINDS,
    STREAM_LATTICE_SHIFT,
    DimsOutOfRange,
    EmptyPointSet,
    KindMismatch,
    MOutOfRange,
    PointSetError,
    PrecisionOverflow,
    UnitPointSet,
    mc_uniform,
    rng_for,
)
from .triangle import (
    QuadPointSet,
    allocate_counts,
    map_to_triangle,
    quad_point_set,
    unit_to_reference,
)

# short names accepted on the command line and in config files
KIND_ALIASES = {
    "mc": "mc",
    "lattice": "lattice",
    "sobol": "sobol",
    "sobol2": "sobol_interlaced_2",
    "sobol3": "sobol_interlaced_3",
}


def canonical_kind(kind: str) -> str:
    if kind in KINDS:
        return kind
    try:
        return KIND_ALIASES[kind]
    except KeyError:
        raise PointSetError(f"unknown point-set kind {kind!r}") from None


def _alpha(kind: str) -> int:
    return int(kind.rsplit("_", 1)[1]) if kind.startswith("sobol_interlaced") else 1


def lattice_shift(seed: int, r: int) -> np.ndarray:
    return rng_for(seed, STREAM_LATTICE_SHIFT, r).random(2)


def make_point_set(kind: str, m: int, seed: int | None, n_shifts: int = 1) -> UnitPointSet:
    """2^m points per shift in the unit square, ``n_shifts`` randomizations.

    Lattices get Cranley-Patterson shifts, nets get digital shifts and MC
    blocks are independent draws. ``seed=None`` leaves qMC sets unshifted.
    """
    kind = canonical_kind(kind)
    if n_shifts < 1:
        raise PointSetError("n_shifts must be >= 1")
    if kind == "mc":
        return mc_uniform(1 << m, 0 if seed is None else seed, n_shifts)
    if kind == "lattice":
        blocks = [
            rank1_lattice(m, shift=None if seed is None else lattice_shift(seed, r)).points[0]
            for r in range(n_shifts)
        ]
        return UnitPointSet("lattice", np.stack(blocks), seed=seed)
    if kind == "triangle_mapped":
        raise KindMismatch("triangle-mapped sets are built with quad_point_set")
    alpha = _alpha(kind)
    base = sobol(m, 2 * alpha) if alpha > 1 else sobol(m, 2)
    if alpha > 1:
        base = interlace(base, alpha)
    stacked = UnitPointSet(base.kind, np.repeat(base.points, n_shifts, axis=0),
                           precision=base.precision)
    return digital_shift(stacked, seed) if seed is not None else stacked


def sequence_points(kind: str, n: int, seed: int | None, stream: int = 0) -> UnitPointSet:
    """First ``n`` points of the kind's extensible sequence, randomized per stream."""
    kind = canonical_kind(kind)
    sub = None
    if seed is not None:
        sub = int(np.random.SeedSequence([int(seed), 0x5452, stream]).generate_state(1, np.uint64)[0])
    if kind == "mc":
        return mc_uniform(n, 0 if sub is None else sub)
    if kind == "lattice":
        return lattice_sequence(n, shift=None if sub is None else lattice_shift(sub, 0))
    alpha = _alpha(kind)
    base = sobol_sequence(n, 2 * alpha)
    if alpha > 1:
        base = interlace(base, alpha)
    return digital_shift(base, sub) if sub is not None else base


__all__ = [
    "DirectionNumbers", "EmptyPointSet", "GeneratingVector", "KINDS", "KIND_ALIASES",
    "DimsOutOfRange", "KindMismatch", "MOutOfRange", "NET_KINDS", "PointSetError",
    "PrecisionOverflow", "QuadPointSet", "UnitPointSet", "allocate_counts",
    "apply_digital_shift", "canonical_kind", "default_direction_numbers",
    "default_generating_vector", "digital_shift", "interlace", "lattice_sequence",
    "make_point_set", "map_to_triangle", "mc_uniform", "quad_point_set",
    "rank1_lattice", "sequence_points", "shift_masks", "sobol", "sobol_sequence",
    "unit_to_reference",
]
