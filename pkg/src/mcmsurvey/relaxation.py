"""Single-solve missions and the adaptive domain-inflation strategy.

A naive mission solves once on the requested domain and then measures the
residual risk with an independent Monte Carlo oracle; that measurement
routinely exceeds the request because the optimizer fits the few
integration points it was given. The relaxed mission re-solves on a
slightly larger domain (the same unit points, re-mapped) until the oracle
on the original domain is satisfied.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .dynamics import ControlSchedule, Trajectory, VehicleParams
from .geometry import ConvexQuad, DomainSpec, Rect, inflate
from .lowdisc import QuadPointSet, UnitPointSet, canonical_kind, make_point_set, quad_point_set
from .optimizer import NlpSettings, NotConverged, Solution, solve
from .risk import DEFAULT_ORACLE_SEED, ORACLE_LOG2, post_risk_oracle
from .sensor import SensorParams


class MaxInflationsExceeded(RuntimeError):
    def __init__(self, report: "MissionReport"):
        super().__init__(f"risk {report.achieved_risk:.4f} still above "
                         f"{report.requested_risk} after {report.inflations} inflations")
        self.report = report


@dataclass(frozen=True)
class PointSpec:
    """Descriptor of the integration points: kind, log2 count and seed."""

    kind: str = "lattice"
    m: int = 7
    seed: int | None = 0
    n_shifts: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", canonical_kind(self.kind))

    def build(self, domain: DomainSpec) -> UnitPointSet | QuadPointSet:
        """Unit points for ``domain``; quads get one triangle-mapped set."""
        if isinstance(domain.shape, ConvexQuad):
            return quad_point_set(self.kind, 1 << self.m, domain.shape, self.seed)
        return make_point_set(self.kind, self.m, self.seed, self.n_shifts)


@dataclass(frozen=True)
class MissionRequest:
    domain: DomainSpec
    start: tuple[float, float]
    m_risk: float = 0.05
    points: PointSpec = PointSpec()
    max_inflations: int = 50
    heading: float = 0.0
    oracle_seed: int = DEFAULT_ORACLE_SEED
    oracle_log2: int = ORACLE_LOG2
    abort_on_not_converged: bool = False

    def __post_init__(self):
        if not 0.0 < self.m_risk < 1.0:
            raise ValueError("requested risk must lie in (0, 1)")
        if not np.all(np.isfinite(self.start)):
            raise ValueError("start must be finite")
        if self.max_inflations < 0:
            raise ValueError("max_inflations must be >= 0")
        object.__setattr__(self, "start", (float(self.start[0]), float(self.start[1])))


@dataclass(frozen=True)
class IterationRecord:
    domain: DomainSpec
    post_risk: float
    t_f: float
    internal_risk: float
    converged: bool
    seconds: float


@dataclass(eq=False)
class MissionReport:
    requested_risk: float
    achieved_risk: float
    path_time: float
    computation_time: float
    initial_domain: DomainSpec
    final_domain: DomainSpec
    inflations: int
    per_iteration: list[IterationRecord]
    success: bool
    oracle_std_error: float
    schedule: ControlSchedule | None = field(default=None, repr=False)
    trajectory: Trajectory | None = field(default=None, repr=False)
    solution: Solution | None = field(default=None, repr=False)
    failure: str | None = None


def _solve_once(req, domain, unit, sensor, vehicle, settings, warm):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NotConverged)
        return solve(domain, req.start, req.m_risk, unit, sensor, vehicle, settings,
                     warm_start=warm, heading=req.heading)


def _oracle(req, traj, sensor, settings):
    return post_risk_oracle(traj, req.domain, sensor, req.oracle_seed, req.oracle_log2,
                            settings.workers)


def naive_mission(req: MissionRequest, sensor: SensorParams = SensorParams(),
                  vehicle: VehicleParams = VehicleParams(),
                  settings: NlpSettings = NlpSettings()) -> MissionReport:
    """One solve on the requested domain followed by the oracle check.

    Nothing guarantees ``achieved_risk <= requested_risk`` here; ``success``
    only records whether it happened to hold.
    """
    unit = req.points.build(req.domain)
    sol = _solve_once(req, req.domain, unit, sensor, vehicle, settings, None)
    post = _oracle(req, sol.trajectory, sensor, settings)
    seconds = sol.iterations["seconds"]
    rec = IterationRecord(req.domain, post.value, sol.t_f, sol.internal_risk.value,
                          sol.converged, seconds)
    ok = post.value <= req.m_risk
    return MissionReport(req.m_risk, post.value, sol.t_f, seconds, req.domain, req.domain, 0,
                         [rec], ok, post.std_error, sol.schedule, sol.trajectory, sol,
                         None if sol.converged else "solver did not converge")


def relaxed_mission(req: MissionRequest, sensor: SensorParams = SensorParams(),
                    vehicle: VehicleParams = VehicleParams(),
                    settings: NlpSettings = NlpSettings(), warm_start: bool = False,
                    raise_on_failure: bool = False) -> MissionReport:
    """Inflate the planning domain until the oracle risk on the original domain is met.

    Every iteration re-maps the same unit point set onto the current domain
    and solves from a fresh lawnmower guess; ``warm_start`` instead starts
    from the previous iteration's schedule, which is faster per solve but
    tends to keep the previous plan's gaps between integration points.
    A non-converged solve counts as infeasible and triggers an inflation.
    The report is successful iff the final oracle risk is at most the
    request; otherwise ``failure`` is set, and ``MaxInflationsExceeded`` is
    raised when ``raise_on_failure``.
    """
    unit = req.points.build(req.domain)
    domain = req.domain
    records: list[IterationRecord] = []
    total = 0.0
    warm = None
    sol = post = None
    inflations = 0
    failure = None
    while True:
        sol = _solve_once(req, domain, unit, sensor, vehicle, settings, warm)
        post = _oracle(req, sol.trajectory, sensor, settings)
        seconds = sol.iterations["seconds"]
        total += seconds
        records.append(IterationRecord(domain, post.value, sol.t_f, sol.internal_risk.value,
                                       sol.converged, seconds))
        if sol.converged and post.value <= req.m_risk:
            break
        if not sol.converged and req.abort_on_not_converged:
            failure = "solver did not converge"
            break
        if inflations >= req.max_inflations:
            failure = f"max_inflations={req.max_inflations} exceeded"
            break
        domain = inflate(domain)
        inflations += 1
        warm = sol.schedule if warm_start else None
    report = MissionReport(req.m_risk, post.value, sol.t_f, total, req.domain, domain, inflations,
                           records, failure is None, post.std_error, sol.schedule,
                           sol.trajectory, sol, failure)
    if failure is not None and raise_on_failure:
        raise MaxInflationsExceeded(report)
    return report


def default_start(domain: DomainSpec) -> tuple[float, float]:
    """Lower-left corner of the bounding box, or the nearest vertex for quads."""
    lo, _ = domain.bounds()
    shape = domain.shape
    if isinstance(shape, Rect):
        return float(lo[0]), float(lo[1])
    verts = shape.as_array()
    i = int(np.argmin(np.hypot(*(verts - lo).T)))
    return float(verts[i, 0]), float(verts[i, 1])
