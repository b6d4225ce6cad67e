"""Nomoto steering model and its fixed-step RK4 integration.

State is (x, y, psi, r) with

    x' = V cos psi,  y' = V sin psi,  psi' = r,  r' = (K p - r) / T

and the rudder ``p`` interpolated linearly between equally spaced knots
on normalized time. Radians throughout; degrees only at I/O boundaries.

The (psi, r) subsystem is linear in (r, p), so one classical RK4 step maps
(r, p0, p_mid, p1) to the next r and to the four stage headings by fixed
coefficient vectors. ``integrate`` evaluates exactly those RK4 formulas,
with the r recurrence run by ``scipy.signal.lfilter`` and the position
update by cumulative sums, instead of a Python loop over steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter


class NonFiniteState(FloatingPointError):
    pass


@dataclass(frozen=True)
class VehicleParams:
    v: float = 2.5
    k_gain: float = 5.0
    t_const: float = 0.5
    p_max: float = math.radians(35.0)

    def __post_init__(self):
        if not (self.v > 0 and self.t_const > 0 and self.p_max > 0):
            raise ValueError("vehicle parameters v, t_const and p_max must be positive")


@dataclass(frozen=True)
class VehicleState:
    x: float = 0.0
    y: float = 0.0
    psi: float = 0.0
    r: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.psi, self.r], dtype=float)


@dataclass(frozen=True, eq=False)
class ControlSchedule:
    t_f: float
    knots: np.ndarray

    def __post_init__(self):
        knots = np.array(self.knots, dtype=float)
        knots.setflags(write=False)
        object.__setattr__(self, "knots", knots)
        if not self.t_f > 0:
            raise ValueError(f"t_f must be positive, got {self.t_f}")
        if knots.ndim != 1 or len(knots) < 2:
            raise ValueError("a schedule needs at least 2 knots")

    @property
    def n_knots(self) -> int:
        return len(self.knots)

    def check_bounds(self, p_max: float) -> bool:
        return bool(np.all(np.abs(self.knots) <= p_max))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled states; ``states[:, k]`` is x, y, psi, r."""

    times: np.ndarray
    states: np.ndarray
    controls: np.ndarray
    v: float = 2.5

    @property
    def t_f(self) -> float:
        return float(self.times[-1])

    @property
    def positions(self) -> np.ndarray:
        return self.states[:, :2]

    def prefix(self, n: int) -> "Trajectory":
        return Trajectory(self.times[:n], self.states[:n], self.controls[:n], self.v)


def state_derivative(s, p, params: VehicleParams) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    psi, r = s[..., 2], s[..., 3]
    return np.stack(
        [params.v * np.cos(psi), params.v * np.sin(psi), r,
         (params.k_gain * np.asarray(p) - r) / params.t_const],
        axis=-1,
    )


def rk4_step(s, p0, pm, p1, h, params: VehicleParams) -> np.ndarray:
    """One textbook RK4 step; reference implementation for tests."""
    k1 = state_derivative(s, p0, params)
    k2 = state_derivative(s + 0.5 * h * k1, pm, params)
    k3 = state_derivative(s + 0.5 * h * k2, pm, params)
    k4 = state_derivative(s + h * k3, p1, params)
    return s + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


@dataclass(frozen=True)
class StepCoefficients:
    """RK4 stage quantities as linear forms over the basis (r, p0, p_mid, p1)."""

    r_next: np.ndarray
    dpsi: np.ndarray
    psi_off: np.ndarray  # (4 stages, 4): stage heading minus step-start heading


def step_coefficients(h: float, params: VehicleParams) -> StepCoefficients:
    c, kg = 1.0 / params.t_const, params.k_gain
    e = np.eye(4)
    r, p0, pm, p1 = e
    k1 = c * (kg * p0 - r)
    r2 = r + 0.5 * h * k1
    k2 = c * (kg * pm - r2)
    r3 = r + 0.5 * h * k2
    k3 = c * (kg * pm - r3)
    r4 = r + h * k3
    k4 = c * (kg * p1 - r4)
    r_next = r + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    dpsi = h / 6.0 * (r + 2 * r2 + 2 * r3 + r4)
    psi_off = np.stack([np.zeros(4), 0.5 * h * r, 0.5 * h * r2, h * r3])
    return StepCoefficients(r_next, dpsi, psi_off)


RK4_WEIGHTS = np.array([1.0, 2.0, 2.0, 1.0])


@dataclass(frozen=True)
class Grid:
    """Discretization of normalized time for a schedule with ``n_knots`` knots.

    ``steps_per_knot`` output samples per knot interval, each split into
    ``substeps`` RK4 steps.
    """

    n_knots: int
    steps_per_knot: int
    substeps: int

    @property
    def n_out(self) -> int:
        return (self.n_knots - 1) * self.steps_per_knot

    @property
    def n_fine(self) -> int:
        return self.n_out * self.substeps

    def interp(self, tau: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Knot index and weight of the linear interpolant at normalized times."""
        pos = np.asarray(tau) * (self.n_knots - 1)
        idx = np.minimum(np.floor(pos).astype(int), self.n_knots - 2)
        return idx, pos - idx

    def control_weights(self):
        n = self.n_fine
        nodes = self.interp(np.arange(n + 1) / n)
        mids = self.interp((np.arange(n) + 0.5) / n)
        return nodes, mids


def default_substeps(t_f: float, n_knots: int, steps_per_knot: int,
                     params: VehicleParams) -> int:
    """Fewest RK4 substeps keeping the fine step at or below the Nomoto lag T."""
    h_out = t_f / ((n_knots - 1) * steps_per_knot)
    return max(1, math.ceil(h_out / params.t_const))


def _eval_controls(knots: np.ndarray, weights) -> np.ndarray:
    idx, w = weights
    return (1.0 - w) * knots[..., idx] + w * knots[..., idx + 1]


@dataclass(frozen=True, eq=False)
class FineSolution:
    """Everything the adjoint pass needs from one forward integration."""

    grid: Grid
    h: float
    coef: StepCoefficients
    basis: np.ndarray       # (n_fine, 4): r_i, p_i, p_mid_i, p_{i+1}
    psi: np.ndarray         # (n_fine + 1,)
    stage_psi: np.ndarray   # (n_fine, 4)
    states: np.ndarray      # (n_fine + 1, 4)
    controls: np.ndarray    # (n_fine + 1,)


def integrate_fine(s0, schedule: ControlSchedule, grid: Grid,
                   params: VehicleParams) -> FineSolution:
    s0 = VehicleState(*s0) if not isinstance(s0, VehicleState) else s0
    knots = schedule.knots
    nodes_w, mids_w = grid.control_weights()
    P = _eval_controls(knots, nodes_w)
    Q = _eval_controls(knots, mids_w)
    n = grid.n_fine
    h = schedule.t_f / n
    coef = step_coefficients(h, params)
    a = coef.r_next[0]
    u = coef.r_next[1] * P[:-1] + coef.r_next[2] * Q + coef.r_next[3] * P[1:]
    drive = np.concatenate([[s0.r], u])
    # divergence is reported below as NonFiniteState
    with np.errstate(over="ignore", invalid="ignore"):
        r = lfilter([1.0], [1.0, -a], drive)
        basis = np.stack([r[:-1], P[:-1], Q, P[1:]], axis=1)
        dpsi = basis @ coef.dpsi
        psi = s0.psi + np.concatenate([[0.0], np.cumsum(dpsi)])
        stage_psi = psi[:-1, None] + basis @ coef.psi_off.T
        cw = np.cos(stage_psi) @ RK4_WEIGHTS
        sw = np.sin(stage_psi) @ RK4_WEIGHTS
        k = h * params.v / 6.0
        x = s0.x + np.concatenate([[0.0], np.cumsum(k * cw)])
        y = s0.y + np.concatenate([[0.0], np.cumsum(k * sw)])
    states = np.stack([x, y, psi, r], axis=1)
    if not np.all(np.isfinite(states)):
        raise NonFiniteState("integration produced a non-finite state")
    return FineSolution(grid, h, coef, basis, psi, stage_psi, states, P)


def integrate(s0, schedule: ControlSchedule, steps_per_knot: int,
              params: VehicleParams, substeps: int | None = None) -> Trajectory:
    """RK4 trajectory sampled ``steps_per_knot`` times per knot interval.

    Each output interval is split into ``substeps`` RK4 steps (default: enough
    to keep the step at or below the Nomoto time constant, which RK4 needs
    for stability on the lag equation).
    """
    if steps_per_knot < 1:
        raise ValueError("steps_per_knot must be >= 1")
    if substeps is None:
        substeps = default_substeps(schedule.t_f, schedule.n_knots, steps_per_knot, params)
    grid = Grid(schedule.n_knots, steps_per_knot, substeps)
    fine = integrate_fine(s0, schedule, grid, params)
    sel = slice(None, None, substeps)
    times = schedule.t_f * np.arange(grid.n_out + 1) / grid.n_out
    return Trajectory(times, fine.states[sel], fine.controls[sel], params.v)


def path_length(traj: Trajectory) -> float:
    """Constant-speed path length V * t_f."""
    return traj.v * traj.t_f


def polyline_length(traj: Trajectory) -> float:
    return float(np.sum(np.hypot(*np.diff(traj.positions, axis=0).T)))


TRAJECTORY_HEADER = "t,x,y,psi_deg,r_degps,p_deg"


def trajectory_to_csv(traj: Trajectory, path) -> None:
    data = np.column_stack([
        traj.times, traj.states[:, 0], traj.states[:, 1],
        np.degrees(traj.states[:, 2]), np.degrees(traj.states[:, 3]),
        np.degrees(traj.controls),
    ])
    np.savetxt(path, data, delimiter=",", header=TRAJECTORY_HEADER, comments="", fmt="%.17g")


def trajectory_from_csv(path, v: float = 2.5) -> Trajectory:
    with open(path) as fh:
        header = fh.readline().strip()
    if header != TRAJECTORY_HEADER:
        raise ValueError(f"unexpected trajectory header {header!r}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    states = np.column_stack([data[:, 1], data[:, 2], np.radians(data[:, 3]), np.radians(data[:, 4])])
    return Trajectory(data[:, 0], states, np.radians(data[:, 5]), v)
