"""Search domains: rectangles, convex quadrilaterals and their triangles.

All coordinates are in meters. Shapes are immutable and validated on
construction, so the operations below never re-check their invariants.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np


class GeometryError(ValueError):
    """A shape violates one of its construction invariants."""


class InflationBreaksConvexity(GeometryError):
    pass


def _pt(p) -> tuple[float, float]:
    x, y = (float(v) for v in p)
    if not (np.isfinite(x) and np.isfinite(y)):
        raise GeometryError(f"non-finite coordinate {p!r}")
    return (x, y)


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


@dataclass(frozen=True)
class Rect:
    lo: tuple[float, float]
    hi: tuple[float, float]

    def __post_init__(self):
        lo, hi = _pt(self.lo), _pt(self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if not (lo[0] < hi[0] and lo[1] < hi[1]):
            raise GeometryError(f"Rect needs lo < hi componentwise, got {lo} / {hi}")

    @property
    def extent(self) -> np.ndarray:
        return np.subtract(self.hi, self.lo)

    @property
    def center(self) -> np.ndarray:
        return 0.5 * np.add(self.lo, self.hi)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.lo), np.asarray(self.hi)


@dataclass(frozen=True)
class Triangle:
    vertices: tuple[tuple[float, float], tuple[float, float], tuple[float, float]]

    def __post_init__(self):
        if len(self.vertices) != 3:
            raise GeometryError("Triangle needs exactly 3 vertices")
        v = tuple(_pt(p) for p in self.vertices)
        object.__setattr__(self, "vertices", v)
        if _cross(*v) <= 0.0:
            raise GeometryError("Triangle must have positive (counter-clockwise) signed area")

    def as_array(self) -> np.ndarray:
        return np.array(self.vertices)


@dataclass(frozen=True)
class ConvexQuad:
    """Strictly convex quadrilateral, vertices counter-clockwise."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.vertices) != 4:
            raise GeometryError("ConvexQuad needs exactly 4 vertices")
        v = tuple(_pt(p) for p in self.vertices)
        object.__setattr__(self, "vertices", v)
        if len(set(v)) != 4:
            raise GeometryError("ConvexQuad has repeated vertices")
        for i in range(4):
            if _cross(v[i], v[(i + 1) % 4], v[(i + 2) % 4]) <= 0.0:
                raise GeometryError(
                    "ConvexQuad must be strictly convex with counter-clockwise vertices"
                )

    def as_array(self) -> np.ndarray:
        return np.array(self.vertices)

    @property
    def centroid(self) -> np.ndarray:
        # vertex centroid, used as the inflation reference point
        return self.as_array().mean(axis=0)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        a = self.as_array()
        return a.min(axis=0), a.max(axis=0)

    @property
    def extent(self) -> np.ndarray:
        lo, hi = self.bounds()
        return hi - lo


Shape = Union[Rect, ConvexQuad, Triangle]


@dataclass(frozen=True)
class DomainSpec:
    """A search region together with its inflation step ``inflation`` (Xi)."""

    shape: Union[Rect, ConvexQuad]
    inflation: tuple[float, float] = field(default=(0.2, 0.2))

    def __post_init__(self):
        xi = _pt(self.inflation)
        object.__setattr__(self, "inflation", xi)
        if not isinstance(self.shape, (Rect, ConvexQuad)):
            raise GeometryError("domain shape must be a Rect or a ConvexQuad")
        ext = self.shape.extent
        for d in range(2):
            if not xi[d] > 0.0:
                raise GeometryError(f"inflation component {d} must be > 0, got {xi[d]}")
            if not xi[d] < 0.1 * ext[d]:
                raise GeometryError(
                    f"inflation component {d} ({xi[d]}) must be below 10% of the "
                    f"domain extent ({ext[d]})"
                )

    @property
    def area(self) -> float:
        return area(self.shape)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.shape.bounds()


def area(shape: Shape) -> float:
    if isinstance(shape, Rect):
        w, h = shape.extent
        return float(w * h)
    if isinstance(shape, Triangle):
        return 0.5 * _cross(*shape.vertices)
    if isinstance(shape, ConvexQuad):
        t1, t2 = triangulate(shape)
        return area(t1) + area(t2)
    if isinstance(shape, DomainSpec):
        return area(shape.shape)
    raise TypeError(f"unsupported shape {type(shape).__name__}")


def inflate(domain: DomainSpec) -> DomainSpec:
    """Grow the domain by one inflation step.

    Rectangles move ``lo`` down and ``hi`` up by Xi. Quadrilateral vertices
    move by ``Xi * sign(v - centroid)`` per axis, which reduces to the
    rectangle rule for an axis-aligned box.
    """
    xi = np.asarray(domain.inflation)
    shape = domain.shape
    if isinstance(shape, Rect):
        lo, hi = shape.bounds()
        new = Rect(tuple(lo - xi), tuple(hi + xi))
    else:
        v = shape.as_array()
        moved = v + xi * np.sign(v - shape.centroid)
        try:
            new = ConvexQuad(tuple(map(tuple, moved)))
        except GeometryError as exc:
            raise InflationBreaksConvexity(str(exc)) from exc
    return DomainSpec(new, domain.inflation)


def triangulate(quad: ConvexQuad) -> tuple[Triangle, Triangle]:
    """Split along the v0-v2 diagonal."""
    v0, v1, v2, v3 = quad.vertices
    return Triangle((v0, v1, v2)), Triangle((v0, v2, v3))


def contains(shape, point, tol: float = 1e-9) -> bool | np.ndarray:
    """Closed containment test; vectorized over ``point`` of shape (..., 2).

    ``tol`` is relative to the shape's size and absorbs rounding of points
    mapped exactly onto an edge.
    """
    if isinstance(shape, DomainSpec):
        shape = shape.shape
    p = np.asarray(point, dtype=float)
    if isinstance(shape, Rect):
        lo, hi = shape.bounds()
        slack = tol * float(np.max(hi - lo))
        inside = np.all((p >= lo - slack) & (p <= hi + slack), axis=-1)
    else:
        v = shape.as_array()
        scale = float(np.max(v.max(axis=0) - v.min(axis=0)))
        inside = np.ones(p.shape[:-1], dtype=bool)
        for i in range(len(v)):
            a, b = v[i], v[(i + 1) % len(v)]
            edge = b - a
            c = edge[0] * (p[..., 1] - a[1]) - edge[1] * (p[..., 0] - a[0])
            inside &= c >= -tol * scale * np.hypot(*edge)
    return bool(inside) if inside.ndim == 0 else inside


def map_unit_to_rect(u, rect: Rect) -> np.ndarray:
    """Affine map of unit-square points onto ``rect`` (componentwise inverse CDF)."""
    lo, hi = rect.bounds()
    return lo + np.asarray(u, dtype=float) * (hi - lo)


def rect_to_unit(x, rect: Rect) -> np.ndarray:
    lo, hi = rect.bounds()
    return (np.asarray(x, dtype=float) - lo) / (hi - lo)


def scale_shape(shape, factor: float):
    """Multiply every coordinate by ``factor`` (unit conversion at config boundaries)."""
    if isinstance(shape, Rect):
        return Rect(tuple(np.multiply(shape.lo, factor)), tuple(np.multiply(shape.hi, factor)))
    if isinstance(shape, ConvexQuad):
        return ConvexQuad(tuple(map(tuple, shape.as_array() * factor)))
    if isinstance(shape, Triangle):
        return Triangle(tuple(map(tuple, shape.as_array() * factor)))
    if isinstance(shape, DomainSpec):
        return DomainSpec(
            scale_shape(shape.shape, factor), tuple(np.multiply(shape.inflation, factor))
        )
    raise TypeError(f"unsupported shape {type(shape).__name__}")
