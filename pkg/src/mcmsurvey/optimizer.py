"""Minimum-time survey planning by single shooting.

Decision vector: (t_f, p_1 .. p_K) with the rudder knots on normalized
time, so the dynamics hold by construction and the objective is linear in
t_f. The single risk constraint is handled by an augmented Lagrangian; the
bound-constrained subproblems go to L-BFGS-B (a projected quasi-Newton
method), which keeps every knot inside |p| <= p_max.

Gradients come from a discrete adjoint of the RK4 recurrence in
``dynamics.integrate_fine``; ``gradient_check`` compares them with central
differences.
"""

from __future__ import annotations

import logging
import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .dynamics import (
    RK4_WEIGHTS,
    ControlSchedule,
    Grid,
    NonFiniteState,
    Trajectory,
    VehicleParams,
    VehicleState,
    default_substeps,
    integrate,
    integrate_fine,
    step_coefficients,
)
from .geometry import DomainSpec, contains
from .risk import RiskEstimate, risk_and_state_gradient, risk_estimate, target_points, trapezoid_weights
from .sensor import SensorParams

log = logging.getLogger(__name__)


class NotConverged(RuntimeWarning):
    pass


class DegenerateDomain(UserWarning):
    pass


@dataclass(frozen=True)
class NlpSettings:
    risk_tolerance: float = 1e-3
    max_outer: int = 20
    max_inner: int = 200
    penalty_init: float = 10.0
    penalty_growth: float = 4.0
    grad_step: float = 1e-6
    time_scaling: bool = True
    gradient: str = "adjoint"
    n_knots: int = 60
    steps_per_knot: int = 4
    # t_f may grow to this multiple of the warm start before substeps go stale
    t_f_headroom: float = 2.0
    workers: int = 1

    def __post_init__(self):
        for name in ("risk_tolerance", "max_outer", "max_inner", "penalty_init", "grad_step",
                     "n_knots", "steps_per_knot", "t_f_headroom", "workers"):
            if not getattr(self, name) > 0:
                raise ValueError(f"NlpSettings.{name} must be positive")
        if not self.penalty_growth > 1:
            raise ValueError("penalty_growth must exceed 1")
        if self.gradient not in ("adjoint", "fd"):
            raise ValueError("gradient must be 'adjoint' or 'fd'")
        if self.n_knots < 2:
            raise ValueError("n_knots must be >= 2")


@dataclass(eq=False)
class Solution:
    schedule: ControlSchedule
    trajectory: Trajectory
    t_f: float
    internal_risk: RiskEstimate
    converged: bool
    iterations: dict = field(default_factory=dict)
    history: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# warm start


def swath_spacing(sensor: SensorParams, overlap: float = 0.9) -> float:
    """Lateral distance between adjacent lawnmower legs."""
    _, rho_hi = sensor.range_band()
    rho_hi = min(rho_hi, 1e6)
    half = rho_hi * math.sin(min(0.5 * sensor.alpha_fov, 0.5 * math.pi))
    return 2.0 * half * overlap


def _lawnmower_segments(lo, hi, start, heading, sensor: SensorParams):
    """(length, curvature) pieces of a boustrophedon sweep starting at ``start``."""
    rho_lo, _ = sensor.range_band()
    spacing = swath_spacing(sensor)
    half = 0.5 * spacing / 0.9
    x0, y0 = lo
    x1, y1 = hi
    segs = []
    east = math.cos(heading) >= 0.0
    leg_heading = 0.0 if east else math.pi
    turn = (leg_heading - heading + math.pi) % (2 * math.pi) - math.pi
    r_align = 0.5 * spacing
    pos = np.array(start, dtype=float)
    if abs(turn) > 1e-9:
        segs.append((abs(turn) * r_align, math.copysign(1.0 / r_align, turn)))
        # chord of the alignment arc
        c = np.array([math.sin(leg_heading) - math.sin(heading),
                      -(math.cos(leg_heading) - math.cos(heading))]) * r_align * math.copysign(1, turn)
        pos = pos + c
    up = (pos[1] - y0) <= (y1 - pos[1])
    far_y = y1 if up else y0
    reach = abs(far_y - pos[1]) - half
    n_legs = 1 + max(0, math.ceil(reach / spacing - 1e-9))
    if (hi[1] - lo[1]) <= spacing:
        warnings.warn("domain thinner than one swath; using a single crossing leg", DegenerateDomain)
        n_legs = 1
    gap = abs(far_y - pos[1]) - half
    leg_gap = gap / (n_legs - 1) if n_legs > 1 else spacing
    leg_gap = min(leg_gap, spacing) if n_legs > 1 else spacing
    x_east, x_west = x1 + 1.1 * rho_lo, x0 - 1.1 * rho_lo
    x = pos[0]
    direction = 1.0 if east else -1.0
    side = 1.0 if up else -1.0
    for k in range(n_legs):
        target = x_east if direction > 0 else x_west
        segs.append((max(abs(target - x), 1.0), 0.0))
        x = target
        if k < n_legs - 1:
            rad = 0.5 * leg_gap
            # turning toward the unswept side: left when heading east and going up
            sign = side * direction
            segs.append((math.pi * rad, sign / rad))
            direction = -direction
    return segs


def initial_guess(domain: DomainSpec, start, sensor: SensorParams, vehicle: VehicleParams,
                  n_knots: int = 60, heading: float = 0.0) -> ControlSchedule:
    """Boustrophedon warm start: legs one swath apart joined by semicircular turns.

    Turns are realized through the rudder knots by averaging the required
    turn rate against each knot's hat function, which preserves the total
    heading change of every turn.
    """
    lo, hi = domain.bounds()
    if not contains(domain, start):
        raise ValueError(f"start {start} lies outside the domain")
    segs = _lawnmower_segments(lo, hi, start, heading, sensor)
    lengths = np.array([s[0] for s in segs])
    curv = np.array([s[1] for s in segs])
    total = float(lengths.sum())
    t_f = total / vehicle.v
    edges = np.concatenate([[0.0], np.cumsum(lengths)]) / total
    # fine sampling of the commanded turn rate on normalized time
    tau = (np.arange(200 * n_knots) + 0.5) / (200 * n_knots)
    seg = np.clip(np.searchsorted(edges, tau, side="right") - 1, 0, len(segs) - 1)
    rate = vehicle.v * curv[seg]
    pos = tau * (n_knots - 1)
    knots = np.empty(n_knots)
    for k in range(n_knots):
        hat = np.clip(1.0 - np.abs(pos - k), 0.0, None)
        knots[k] = (hat @ rate) / hat.sum() / vehicle.k_gain
    knots = np.clip(knots, -vehicle.p_max, vehicle.p_max)
    return ControlSchedule(t_f, knots)


# ---------------------------------------------------------------------------
# transcription


class ShootingProblem:
    """Risk of a schedule and its gradient with respect to (t_f, knots)."""

    def __init__(self, start: VehicleState, targets: np.ndarray, sensor: SensorParams,
                 vehicle: VehicleParams, n_knots: int, steps_per_knot: int, substeps: int,
                 workers: int = 1):
        self.start = start
        self.targets = np.asarray(targets, dtype=float).reshape(-1, 2)
        self.sensor = sensor
        self.vehicle = vehicle
        self.grid = Grid(n_knots, steps_per_knot, substeps)
        self.workers = workers
        nodes, mids = self.grid.control_weights()
        self._nodes, self._mids = nodes, mids
        self.n_evals = 0

    def schedule(self, z) -> ControlSchedule:
        return ControlSchedule(float(z[0]), np.asarray(z[1:]))

    def trajectory(self, z) -> Trajectory:
        return integrate(self.start, self.schedule(z), self.grid.steps_per_knot,
                         self.vehicle, self.grid.substeps)

    def risk(self, z) -> float:
        self.n_evals += 1
        traj = self.trajectory(z)
        return risk_estimate(traj, self.targets, None, self.sensor, self.workers).value

    def risk_and_grad(self, z) -> tuple[float, np.ndarray]:
        self.n_evals += 1
        sched = self.schedule(z)
        g = self.grid
        M = g.substeps
        fine = integrate_fine(self.start, sched, g, self.vehicle)
        out_states = fine.states[::M]
        t_f = sched.t_f
        w = trapezoid_weights(t_f * np.arange(g.n_out + 1) / g.n_out)
        rg = risk_and_state_gradient(out_states, w, self.targets, self.sensor, self.workers)

        n = g.n_fine
        gX = np.zeros(n + 1)
        gY = np.zeros(n + 1)
        gPsi = np.zeros(n + 1)
        gX[::M] = rg.d_states[:, 0]
        gY[::M] = rg.d_states[:, 1]
        gPsi[::M] = rg.d_states[:, 2]

        coef = fine.coef
        h = fine.h
        v = self.vehicle.v
        k = h * v / 6.0
        Gx = np.cumsum(gX[::-1])[::-1][1:]
        Gy = np.cumsum(gY[::-1])[::-1][1:]
        sp = fine.stage_psi
        sin_s, cos_s = np.sin(sp), np.cos(sp)
        g_stage = k * RK4_WEIGHTS * (-sin_s * Gx[:, None] + cos_s * Gy[:, None])
        a_psi = gPsi.copy()
        a_psi[:-1] += g_stage.sum(axis=1)
        A_after = np.cumsum(a_psi[::-1])[::-1][1:]
        g_basis = g_stage @ coef.psi_off + A_after[:, None] * coef.dpsi[None, :]
        # adjoint of r_{i+1} = a r_i + u_i, with nothing downstream of r_n
        a = coef.r_next[0]
        lam_rev = lfilter([1.0], [1.0, -a], g_basis[::-1, 0])
        lam = np.concatenate([lam_rev[::-1], [0.0]])
        lam_next = lam[1:]

        gP = np.zeros(n + 1)
        gP[:-1] += g_basis[:, 1] + lam_next * coef.r_next[1]
        gP[1:] += g_basis[:, 3] + lam_next * coef.r_next[3]
        gQ = g_basis[:, 2] + lam_next * coef.r_next[2]
        gk = np.zeros(g.n_knots)
        for (idx, wt), gv in ((self._nodes, gP), (self._mids, gQ)):
            gk += np.bincount(idx, (1.0 - wt) * gv, minlength=g.n_knots)
            gk += np.bincount(idx + 1, wt * gv, minlength=g.n_knots)

        # d/dh through the step coefficients, by complex step (they are polynomials in h)
        dc = _coef_derivative(h, self.vehicle)
        basis = fine.basis
        dR_dh = lam_next @ (basis @ dc.r_next)
        dR_dh += A_after @ (basis @ dc.dpsi)
        dR_dh += np.sum(g_stage * (basis @ dc.psi_off.T))
        # position increments scale with h through k = h V / 6
        dR_dh += (v / 6.0) * (Gx @ (cos_s @ RK4_WEIGHTS) + Gy @ (sin_s @ RK4_WEIGHTS))
        # exposure weights scale with t_f for fixed states
        E = -np.log(np.where(rg.survival > 0, rg.survival, 1.0))
        direct = -np.mean(np.where(rg.survival > 0, rg.survival * E, 0.0)) / t_f
        d_tf = dR_dh / n + direct
        return rg.value, np.concatenate([[d_tf], gk])

    def risk_and_grad_fd(self, z, step: float = 1e-6) -> tuple[float, np.ndarray]:
        """Forward differences, relative step on t_f and absolute on knots."""
        z = np.asarray(z, dtype=float)
        f0 = self.risk(z)
        grad = np.empty_like(z)
        for i in range(len(z)):
            dz = step * max(abs(z[i]), 1.0) if i == 0 else step
            zp = z.copy()
            zp[i] += dz
            grad[i] = (self.risk(zp) - f0) / dz
        return f0, grad


def _coef_derivative(h: float, vehicle: VehicleParams):
    eps = 1e-30
    c = step_coefficients(complex(h, eps), vehicle)
    return type(c)(c.r_next.imag / eps, c.dpsi.imag / eps, c.psi_off.imag / eps)


def central_difference(fun, z, step):
    z = np.asarray(z, dtype=float)
    grad = np.empty_like(z)
    for i in range(len(z)):
        zp, zm = z.copy(), z.copy()
        zp[i] += step[i]
        zm[i] -= step[i]
        grad[i] = (fun(zp) - fun(zm)) / (2 * step[i])
    return grad


# ---------------------------------------------------------------------------
# projected quasi-Newton


@dataclass(frozen=True)
class InnerResult:
    x: np.ndarray
    f: float
    iterations: int
    evaluations: int
    status: str


def _two_loop(g, s_hist, y_hist):
    q = g.copy()
    alphas = []
    for s, y in zip(reversed(s_hist), reversed(y_hist)):
        a = (s @ q) / (y @ s)
        alphas.append(a)
        q -= a * y
    if s_hist:
        s, y = s_hist[-1], y_hist[-1]
        q *= (s @ y) / (y @ y)
    for (s, y), a in zip(zip(s_hist, y_hist), reversed(alphas)):
        b = (y @ q) / (y @ s)
        q += (a - b) * s
    return q


def projected_lbfgs(fun, x0, lo, hi, max_iter: int = 200, memory: int = 10,
                    max_step: float = 0.1, gtol: float = 1e-7, ftol: float = 1e-10) -> InnerResult:
    """Minimize ``fun`` (returning value and gradient) over the box [lo, hi].

    Limited-memory BFGS on the free variables, with variables held at an
    active bound dropped from the direction, and Armijo backtracking along
    the projection arc. ``max_step`` caps the infinity norm of the trial
    step, which keeps the first iterations local on rough landscapes.
    """
    x = np.clip(np.asarray(x0, dtype=float), lo, hi)
    f, g = fun(x)
    n_eval = 1
    s_hist: list = []
    y_hist: list = []
    status = "max_iter"
    it = 0
    for it in range(1, max_iter + 1):
        pg = np.clip(x - g, lo, hi) - x
        if np.max(np.abs(pg)) <= gtol:
            status = "gtol"
            it -= 1
            break
        active = ((x <= lo) & (g > 0)) | ((x >= hi) & (g < 0))
        gf = np.where(active, 0.0, g)
        d = -_two_loop(gf, s_hist, y_hist)
        d[active] = 0.0
        if not d @ gf < 0:
            d = -gf
            s_hist.clear()
            y_hist.clear()
        dmax = np.max(np.abs(d))
        alpha = min(1.0, max_step / dmax) if dmax > 0 else 1.0
        for _ in range(40):
            x_new = np.clip(x + alpha * d, lo, hi)
            f_new, g_new = fun(x_new)
            n_eval += 1
            if f_new <= f + 1e-4 * (g @ (x_new - x)):
                break
            alpha *= 0.5
        else:
            status = "line_search"
            break
        s = x_new - x
        yv = g_new - g
        if s @ yv > 1e-12 * np.linalg.norm(s) * np.linalg.norm(yv):
            s_hist.append(s)
            y_hist.append(yv)
            if len(s_hist) > memory:
                s_hist.pop(0)
                y_hist.pop(0)
        decrease = f - f_new
        x, f, g = x_new, f_new, g_new
        if decrease <= ftol * max(1.0, abs(f)):
            status = "ftol"
            break
    return InnerResult(x, float(f), it, n_eval, status)


# ---------------------------------------------------------------------------
# augmented Lagrangian


def solve(domain: DomainSpec, start, m_risk: float, points, sensor: SensorParams,
          vehicle: VehicleParams, settings: NlpSettings = NlpSettings(),
          warm_start: ControlSchedule | None = None, heading: float = 0.0) -> Solution:
    """Minimize t_f subject to internal risk <= m_risk on ``domain``.

    The returned schedule is the shortest feasible outer iterate. When no
    outer iterate is feasible the last one is returned with
    ``converged=False`` and a ``NotConverged`` warning.
    """
    if not 0.0 < m_risk < 1.0:
        raise ValueError("requested risk must lie in (0, 1)")
    t0 = time.perf_counter()
    start_state = VehicleState(float(start[0]), float(start[1]), heading, 0.0)
    guess = warm_start or initial_guess(domain, start, sensor, vehicle, settings.n_knots, heading)
    if guess.n_knots != settings.n_knots:
        raise ValueError("warm start knot count differs from settings.n_knots")
    targets, _ = target_points(points, domain)
    substeps = default_substeps(settings.t_f_headroom * guess.t_f, settings.n_knots,
                                settings.steps_per_knot, vehicle)
    prob = ShootingProblem(start_state, targets, sensor, vehicle, settings.n_knots,
                           settings.steps_per_knot, substeps, settings.workers)

    # scaled variables: t_f / t_ref and knots / p_max
    t_ref = guess.t_f if settings.time_scaling else 1.0
    p_max = vehicle.p_max
    scale = np.concatenate([[t_ref], np.full(settings.n_knots, p_max)])
    lo = np.concatenate([[1e-3 * guess.t_f / t_ref], np.full(settings.n_knots, -1.0)])
    hi = np.concatenate([[settings.t_f_headroom * guess.t_f / t_ref], np.full(settings.n_knots, 1.0)])
    c_scale = 1.0 / m_risk
    tf_weight = t_ref / guess.t_f

    def constraint(y):
        z = y * scale
        if settings.gradient == "adjoint":
            r, g = prob.risk_and_grad(z)
        else:
            r, g = prob.risk_and_grad_fd(z, settings.grad_step)
        return r, (r - m_risk) * c_scale, g * scale * c_scale

    mu, rho = 0.0, settings.penalty_init

    def fun(yv):
        try:
            r, c, gc = constraint(yv)
        except NonFiniteState:
            return np.inf, np.zeros_like(yv)
        shifted = max(mu + rho * c, 0.0)
        obj = tf_weight * yv[0] + (shifted ** 2 - mu * mu) / (2.0 * rho)
        grad = gc * shifted
        grad[0] += tf_weight
        return obj, grad

    y = np.clip(np.concatenate([[guess.t_f / t_ref], guess.knots / p_max]), lo, hi)
    best = None
    r0 = constraint(y)[0]
    if r0 <= m_risk + settings.risk_tolerance:
        best = (y[0] * t_ref, y.copy())
    history = []
    prev_viol = np.inf
    inner_total = 0
    converged = False
    tol = settings.risk_tolerance
    outer = 0
    for outer in range(1, settings.max_outer + 1):
        res = projected_lbfgs(fun, y, lo, hi, settings.max_inner)
        inner_total += res.iterations
        y = res.x
        r, c, _ = constraint(y)
        t_f = y[0] * t_ref
        feasible = r <= m_risk + tol
        history.append({"outer": outer, "t_f": t_f, "risk": r, "mu": mu, "rho": rho,
                        "inner": res.iterations, "status": res.status})
        log.debug("outer %d: t_f=%.1f risk=%.5f mu=%.3g rho=%.3g inner=%d (%s)",
                  outer, t_f, r, mu, rho, res.iterations, res.status)
        if feasible and (best is None or t_f < best[0]):
            best = (t_f, y.copy())
        mu_new = max(0.0, mu + rho * c)
        viol = max(c, 0.0)
        if viol > 0.25 * prev_viol:
            rho *= settings.penalty_growth
        prev_viol = viol
        settled = abs(mu_new - mu) * m_risk <= tol * max(mu, 1.0)
        mu = mu_new
        if feasible and settled and abs(r - m_risk) <= tol:
            converged = True
            break
        if feasible and len(history) >= 2 and abs(history[-2]["t_f"] - t_f) <= 1e-6 * t_f \
                and abs(history[-2]["risk"] - r) <= 1e-9:
            converged = True
            break

    if best is not None:
        y_out = best[1]
        converged = True
    else:
        y_out = y
        converged = False
        warnings.warn(f"no feasible iterate after {outer} outer iterations", NotConverged)
    z = y_out * scale
    schedule = ControlSchedule(float(z[0]), np.clip(z[1:], -p_max, p_max))
    traj = integrate(start_state, schedule, settings.steps_per_knot, vehicle, substeps)
    internal = risk_estimate(traj, points, domain, sensor, settings.workers)
    its = {"outer": outer, "inner": inner_total, "evaluations": prob.n_evals,
           "seconds": time.perf_counter() - t0, "substeps": substeps}
    return Solution(schedule, traj, schedule.t_f, internal, converged, its, history)


# ---------------------------------------------------------------------------
# numerical hygiene


@dataclass(frozen=True)
class GradientReport:
    max_rel_error: float
    errors: tuple[float, ...]
    points: int


def gradient_check(domain: DomainSpec, start, points, sensor: SensorParams,
                   vehicle: VehicleParams, seed: int = 0, n_points: int = 10,
                   settings: NlpSettings = NlpSettings(), heading: float = 0.0) -> GradientReport:
    """Compare the adjoint constraint gradient with central differences.

    Schedules are random interior perturbations of the warm start. After
    scaling each component to natural units (relative t_f, fraction of
    p_max) the error of one check is ``max|g - g_fd| / max|g_fd|``.
    """
    rng = np.random.default_rng(seed)
    guess = initial_guess(domain, start, sensor, vehicle, settings.n_knots, heading)
    targets, _ = target_points(points, domain)
    substeps = default_substeps(settings.t_f_headroom * guess.t_f, settings.n_knots,
                                settings.steps_per_knot, vehicle)
    prob = ShootingProblem(VehicleState(start[0], start[1], heading, 0.0), targets, sensor,
                           vehicle, settings.n_knots, settings.steps_per_knot, substeps)
    errors = []
    for _ in range(n_points):
        knots = np.clip(guess.knots + rng.normal(0, 0.05, guess.n_knots) * vehicle.p_max,
                        -0.9 * vehicle.p_max, 0.9 * vehicle.p_max)
        z = np.concatenate([[guess.t_f * rng.uniform(0.8, 1.1)], knots])
        _, g = prob.risk_and_grad(z)
        step = settings.grad_step
        steps = np.concatenate([[step * z[0]], np.full(len(knots), step * vehicle.p_max)])
        g_fd = central_difference(prob.risk, z, steps)
        # derivatives per unit of relative t_f change and per p_max of rudder
        units = np.concatenate([[z[0]], np.full(len(knots), vehicle.p_max)])
        err = np.max(np.abs(g - g_fd) * units) / max(np.max(np.abs(g_fd) * units), 1e-300)
        errors.append(float(err))
    return GradientReport(max(errors), tuple(errors), n_points)
