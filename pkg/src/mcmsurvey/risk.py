"""Residual-risk estimation: exposure along a trajectory and its MC/qMC average."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynamics import Trajectory
from .geometry import ConvexQuad, DomainSpec, Rect, map_unit_to_rect
from .lowdisc import EmptyPointSet, QuadPointSet, UnitPointSet, mc_uniform, quad_point_set
from .sensor import SensorParams, detection_rate, detection_rate_and_grad

ORACLE_LOG2 = 14
DEFAULT_ORACLE_SEED = 20240601
# targets per vectorized block; bounds the (time x target) temporaries
CHUNK = 2048


@dataclass(frozen=True)
class RiskEstimate:
    value: float
    n_points: int
    n_shifts: int
    kind: str
    per_shift: tuple[float, ...]
    std_error: float = float("nan")
    seed: int | None = None


def trapezoid_weights(times) -> np.ndarray:
    dt = np.diff(np.asarray(times, dtype=float))
    w = np.zeros(len(dt) + 1)
    w[:-1] += 0.5 * dt
    w[1:] += 0.5 * dt
    return w


def _chunks(n: int, size: int = CHUNK):
    return [slice(i, min(i + size, n)) for i in range(0, n, size)]


def _map(fn, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(fn, items))


def exposure_many(traj: Trajectory, targets, sensor: SensorParams,
                  workers: int = 1) -> np.ndarray:
    """Time-integrated detection rate for every target in ``targets`` (N, 2)."""
    targets = np.asarray(targets, dtype=float).reshape(-1, 2)
    w = trapezoid_weights(traj.times)
    pose = traj.states[:, None, :]

    def block(sl):
        return w @ detection_rate(pose, targets[sl], sensor)

    parts = _map(block, _chunks(len(targets)), workers)
    return np.concatenate(parts) if parts else np.zeros(0)


def exposure(traj: Trajectory, omega, sensor: SensorParams) -> float:
    return float(exposure_many(traj, np.asarray(omega, dtype=float)[None], sensor)[0])


def target_points(points, domain) -> tuple[np.ndarray, str]:
    """Physical targets of shape (R, N, 2) for a point set on a domain."""
    shape = domain.shape if isinstance(domain, DomainSpec) else domain
    if isinstance(points, QuadPointSet):
        if not isinstance(shape, ConvexQuad):
            raise TypeError("triangle-mapped points need a ConvexQuad domain")
        pts, _ = points.mapped(shape)
        return pts[None], points.kind
    if isinstance(points, UnitPointSet):
        if not isinstance(shape, Rect):
            raise TypeError("unit-square point sets map onto Rect domains only")
        return map_unit_to_rect(points.points, shape), points.kind
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 2:
        arr = arr[None]
    return arr, "premapped"


def risk_estimate(traj: Trajectory, points, domain, sensor: SensorParams,
                  workers: int = 1) -> RiskEstimate:
    """Mean survival probability exp(-exposure) over the points, per shift and overall."""
    targets, kind = target_points(points, domain)
    R, N = targets.shape[:2]
    if N == 0:
        raise EmptyPointSet("no integration points")
    surv = np.exp(-exposure_many(traj, targets.reshape(-1, 2), sensor, workers)).reshape(R, N)
    per_shift = surv.mean(axis=1)
    value = float(per_shift.mean())
    if R > 1:
        stderr = float(per_shift.std(ddof=1) / np.sqrt(R))
    else:
        stderr = float(surv.std(ddof=1) / np.sqrt(N)) if N > 1 else float("nan")
    seed = getattr(points, "seed", None)
    return RiskEstimate(value, N, R, kind, tuple(float(v) for v in per_shift), stderr, seed)


def oracle_points(omega_init: DomainSpec, seed: int, m: int = ORACLE_LOG2):
    shape = omega_init.shape
    if isinstance(shape, Rect):
        return mc_uniform(1 << m, seed)
    return quad_point_set("mc", 1 << m, shape, seed)


def post_risk_oracle(traj: Trajectory, omega_init: DomainSpec, sensor: SensorParams,
                     seed: int = DEFAULT_ORACLE_SEED, m: int = ORACLE_LOG2,
                     workers: int = 1) -> RiskEstimate:
    """Independent 2^14-point Monte Carlo risk on the initial domain."""
    return risk_estimate(traj, oracle_points(omega_init, seed, m), omega_init, sensor, workers)


@dataclass(eq=False)
class RiskGradient:
    """Risk value and its gradient with respect to the sampled states.

    ``d_states`` has shape (T, 4); the r column is always zero because the
    detection rate does not depend on the turn rate.
    """

    value: float
    d_states: np.ndarray
    survival: np.ndarray = field(repr=False)


def risk_and_state_gradient(states: np.ndarray, weights: np.ndarray, targets: np.ndarray,
                            sensor: SensorParams, workers: int = 1) -> RiskGradient:
    targets = np.asarray(targets, dtype=float).reshape(-1, 2)
    n = len(targets)
    pose = states[:, None, :]

    def block(sl):
        gam, (gx, gy, gpsi) = detection_rate_and_grad(pose, targets[sl], sensor)
        s = np.exp(-(weights @ gam))
        return s, np.stack([gx @ s, gy @ s, gpsi @ s], axis=1)

    parts = _map(block, _chunks(n), workers)
    surv = np.concatenate([p[0] for p in parts])
    G = sum(p[1] for p in parts)
    d_states = np.zeros_like(states)
    d_states[:, :3] = -(weights[:, None] * G) / n
    return RiskGradient(float(surv.mean()), d_states, surv)
