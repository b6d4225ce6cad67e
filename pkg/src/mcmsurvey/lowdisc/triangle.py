"""Measure-preserving maps from the unit square onto triangles.

Pairs of binary digits of (u1, u2) form base-4 digits ``d = 2*b1 + b2`` that
select one of the four midpoint-subdivision children of the current
triangle (A, B, C):

    0 -> (A, mAB, mAC)        corner at A
    1 -> (mAB, B, mBC)        corner at B
    2 -> (mAC, mBC, C)        corner at C
    3 -> (mBC, mAC, mAB)      central, rotated by 180 degrees

Every child keeps counter-clockwise orientation. After ``depth`` digits the
point returned is vertex A of the final child, which is the exact limit
point when all later digits are zero; in particular u = (0, 0) maps to the
first vertex of the triangle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry import ConvexQuad, Triangle, area, triangulate
from .pointset import UnitPointSet

DEFAULT_DEPTH = 26


def unit_to_reference(u, depth: int = DEFAULT_DEPTH) -> np.ndarray:
    """Map points of [0,1)^2 into the reference triangle (0,0), (1,0), (0,1)."""
    u = np.asarray(u, dtype=float)
    if depth < 1:
        raise ValueError("depth must be >= 1")
    k = np.floor(u * 2.0**depth).astype(np.int64)
    shape = u.shape[:-1]
    A = np.zeros(shape + (2,))
    B = np.broadcast_to(np.array([1.0, 0.0]), shape + (2,)).copy()
    C = np.broadcast_to(np.array([0.0, 1.0]), shape + (2,)).copy()
    for i in range(depth):
        b1 = (k[..., 0] >> (depth - 1 - i)) & 1
        b2 = (k[..., 1] >> (depth - 1 - i)) & 1
        d = (2 * b1 + b2)[..., None]
        mAB, mAC, mBC = 0.5 * (A + B), 0.5 * (A + C), 0.5 * (B + C)
        A, B, C = (
            np.select([d == 0, d == 1, d == 2], [A, mAB, mAC], mBC),
            np.select([d == 0, d == 1, d == 2], [mAB, B, mBC], mAC),
            np.select([d == 0, d == 1, d == 2], [mAC, mBC, C], mAB),
        )
    return A


def map_to_triangle(u, tri: Triangle, depth: int = DEFAULT_DEPTH) -> np.ndarray:
    """Uniform points on [0,1)^2 to uniform points on ``tri`` (vectorized)."""
    st = unit_to_reference(u, depth)
    v = tri.as_array()
    return v[0] + st[..., :1] * (v[1] - v[0]) + st[..., 1:] * (v[2] - v[0])


def allocate_counts(n_total: int, areas) -> list[int]:
    """Proportional point counts; rounding leftovers go to the earliest triangles."""
    areas = np.asarray(areas, dtype=float)
    exact = n_total * areas / areas.sum()
    counts = np.floor(exact).astype(int)
    short = n_total - int(counts.sum())
    # largest remainders first, ties broken by triangle order
    order = sorted(range(len(areas)), key=lambda i: (-(exact[i] - counts[i]), i))
    for i in order[:short]:
        counts[i] += 1
    return counts.tolist()


@dataclass(frozen=True, eq=False)
class QuadPointSet:
    """Per-triangle unit point sets, kept so they can be re-mapped after inflation."""

    base_kind: str
    unit: tuple[UnitPointSet, ...]
    depth: int = DEFAULT_DEPTH
    seed: int | None = None

    kind = "triangle_mapped"

    @property
    def counts(self) -> list[int]:
        return [u.n_points for u in self.unit]

    @property
    def n_points(self) -> int:
        return sum(self.counts)

    @property
    def n_shifts(self) -> int:
        return 1

    def mapped(self, quad: ConvexQuad) -> tuple[np.ndarray, np.ndarray]:
        """Points (N, 2) on ``quad`` and the triangle index of each."""
        pts, idx = [], []
        for i, (tri, u) in enumerate(zip(triangulate(quad), self.unit)):
            pts.append(map_to_triangle(u.points[0], tri, self.depth))
            idx.append(np.full(u.n_points, i))
        return np.concatenate(pts), np.concatenate(idx)


def quad_point_set(kind: str, n_total: int, quad: ConvexQuad, seed: int,
                   depth: int = DEFAULT_DEPTH) -> QuadPointSet:
    """Independent point sets on the two triangles of ``quad``, sized by area."""
    from . import sequence_points

    counts = allocate_counts(n_total, [area(t) for t in triangulate(quad)])
    unit = tuple(
        sequence_points(kind, c, seed, stream=i) for i, c in enumerate(counts)
    )
    return QuadPointSet(kind, unit, depth, seed)
