"""Forward-looking sonar detection-rate model.

The detection rate of a target at ``omega`` seen from pose (x, y, psi) is

    gamma = lambda * p(rho) * F_alpha(bearing) * F_eps(elevation)

with ``p`` a normal CDF of the sonar-equation excess and the two ``F``
factors smooth boxes built from two logistic sigmoids each. Angles are in
radians here; the sigmoid slopes ``p_alpha`` and ``p_eps`` are per radian.

Every function is vectorized: poses broadcast against targets, so a
(T, 1) pose grid and an (N,) target array give a (T, N) result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np
from scipy.special import expit, ndtr

LN10 = math.log(10.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
# rho floor: coincident target and vehicle saturate p at 1
RHO_FLOOR = np.finfo(float).eps


@dataclass(frozen=True)
class SensorParams:
    """Sensor constants. Angles are stored in radians; use ``from_degrees``."""

    lam: float = 20.0
    fom: float = 72.0
    a: float = 5.2
    sigma: float = 9.0
    alpha_fov: float = math.radians(120.0)
    p_alpha: float = 25.0
    eps_fov: float = math.radians(5.0)
    eps_de: float = math.radians(-6.0)
    p_eps: float = 400.0
    h: float = 20.0
    range_norm: str = "euclidean"

    def __post_init__(self):
        checks = {
            "lam": self.lam > 0,
            "sigma": self.sigma > 0,
            "alpha_fov": 0 < self.alpha_fov < 2 * math.pi,
            "p_alpha": self.p_alpha > 0,
            "p_eps": self.p_eps > 0,
            "h": self.h > 0,
            "eps_fov": self.eps_fov > 0,
        }
        for name, ok in checks.items():
            if not ok:
                raise ValueError(f"sensor parameter {name} = {getattr(self, name)} out of range")
        if self.range_norm not in ("euclidean", "l1"):
            raise ValueError(f"range_norm must be 'euclidean' or 'l1', got {self.range_norm!r}")

    @classmethod
    def from_degrees(cls, **kw) -> "SensorParams":
        for k in ("alpha_fov", "eps_fov", "eps_de"):
            if k in kw:
                kw[k] = math.radians(kw[k])
        return cls(**kw)

    def to_degrees(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        for k in ("alpha_fov", "eps_fov", "eps_de"):
            out[k] = math.degrees(out[k])
        return out

    def elevation_band(self) -> tuple[float, float]:
        """Elevation interval (radians) covered by the vertical beam."""
        return self.eps_de - 0.5 * self.eps_fov, self.eps_de + 0.5 * self.eps_fov

    def range_band(self) -> tuple[float, float]:
        """Horizontal ranges at which the vertical gate is above 1/2."""
        lo, hi = self.elevation_band()
        if hi >= 0.0:
            return self.h / math.tan(-lo), math.inf
        return self.h / math.tan(-lo), self.h / math.tan(-hi)


def _offsets(pose, omega):
    x, y, psi = pose[..., 0], pose[..., 1], pose[..., 2]
    omega = np.asarray(omega, dtype=float)
    return omega[..., 0] - x, omega[..., 1] - y, psi


def _range(dx, dy, norm: str):
    if norm == "l1":
        return np.abs(dx) + np.abs(dy)
    return np.hypot(dx, dy)


def target_range(pose, omega, params: SensorParams):
    dx, dy, _ = _offsets(np.asarray(pose, dtype=float), omega)
    return _range(dx, dy, params.range_norm)


def range_probability_of(rho, params: SensorParams):
    """Normal-CDF detection probability as a function of range."""
    rho = np.maximum(np.asarray(rho, dtype=float), RHO_FLOOR)
    z = (params.fom - 20.0 * np.log10(rho + params.a * rho)) / params.sigma
    return ndtr(z)


def range_probability(pose, omega, params: SensorParams):
    return range_probability_of(target_range(pose, omega, params), params)


def relative_bearing(pose, omega):
    """Bearing in the body frame, 0 dead ahead and +pi/2 to port."""
    pose = np.asarray(pose, dtype=float)
    dx, dy, psi = _offsets(pose, omega)
    c, s = np.cos(psi), np.sin(psi)
    dxb = dx * c + dy * s
    dyb = -dx * s + dy * c
    return np.arctan2(dyb, dxb)


def _box(value, lo, hi, slope):
    # S(slope*(v - lo)) + S(slope*(hi - v)) - 1, written without cancellation
    return expit(slope * (value - lo)) - expit(slope * (value - hi))


def horizontal_gate_of(bearing, params: SensorParams):
    half = 0.5 * params.alpha_fov
    return _box(np.asarray(bearing, dtype=float), -half, half, params.p_alpha)


def horizontal_gate(pose, omega, params: SensorParams):
    return horizontal_gate_of(relative_bearing(pose, omega), params)


def elevation_of(rho, params: SensorParams):
    return np.arctan2(-params.h, np.asarray(rho, dtype=float))


def vertical_gate_of(rho, params: SensorParams):
    lo, hi = params.elevation_band()
    return _box(elevation_of(rho, params), lo, hi, params.p_eps)


def vertical_gate(pose, omega, params: SensorParams):
    return vertical_gate_of(target_range(pose, omega, params), params)


def detection_rate(pose, omega, params: SensorParams):
    """gamma(pose, omega) in 1/s, in [0, lam]."""
    pose = np.asarray(pose, dtype=float)
    rho = target_range(pose, omega, params)
    return (
        params.lam
        * range_probability_of(rho, params)
        * horizontal_gate(pose, omega, params)
        * vertical_gate_of(rho, params)
    )


def detection_rate_and_grad(pose, omega, params: SensorParams):
    """gamma and its partial derivatives with respect to x, y and psi.

    Returns ``(gamma, (dgamma_dx, dgamma_dy, dgamma_dpsi))``, each broadcast
    to the common shape of pose and omega.
    """
    pose = np.asarray(pose, dtype=float)
    dx, dy, psi = _offsets(pose, omega)
    r2 = dx * dx + dy * dy
    rho_e = np.sqrt(r2)
    if params.range_norm == "l1":
        rho = np.abs(dx) + np.abs(dy)
        drho_dx, drho_dy = -np.sign(dx), -np.sign(dy)
    else:
        rho = rho_e
        safe = np.where(rho_e > 0, rho_e, 1.0)
        drho_dx, drho_dy = -dx / safe, -dy / safe
    rho_c = np.maximum(rho, RHO_FLOOR)
    clamped = rho < RHO_FLOOR

    # range factor
    z = (params.fom - 20.0 * np.log10(rho_c * (1.0 + params.a))) / params.sigma
    P = ndtr(z)
    dP = np.where(clamped, 0.0, INV_SQRT_2PI * np.exp(-0.5 * z * z) * (-20.0 / (LN10 * params.sigma)) / rho_c)

    # horizontal gate
    c, s = np.cos(psi), np.sin(psi)
    bearing = np.arctan2(-dx * s + dy * c, dx * c + dy * s)
    half = 0.5 * params.alpha_fov
    sa = expit(params.p_alpha * (bearing + half))
    sb = expit(params.p_alpha * (bearing - half))
    Fa = sa - sb
    dFa = params.p_alpha * (sa * (1.0 - sa) - sb * (1.0 - sb))
    safe_r2 = np.where(r2 > 0, r2, 1.0)
    dbear_dx = np.where(r2 > 0, dy / safe_r2, 0.0)
    dbear_dy = np.where(r2 > 0, -dx / safe_r2, 0.0)

    # vertical gate
    lo, hi = params.elevation_band()
    eps = np.arctan2(-params.h, rho)
    se = expit(params.p_eps * (eps - lo))
    sf = expit(params.p_eps * (eps - hi))
    Fe = se - sf
    dFe = params.p_eps * (se * (1.0 - se) - sf * (1.0 - sf))
    deps_drho = params.h / (rho * rho + params.h * params.h)

    lam = params.lam
    gamma = lam * P * Fa * Fe
    g_rho = lam * Fa * (dP * Fe + P * dFe * deps_drho)
    g_bear = lam * P * Fe * dFa
    gx = g_rho * drho_dx + g_bear * dbear_dx
    gy = g_rho * drho_dy + g_bear * dbear_dy
    gpsi = -g_bear
    return gamma, (gx, gy, gpsi)
