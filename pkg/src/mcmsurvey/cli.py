"""Command-line front end and file outputs.

Subcommands::

    mcmsurvey points --kind lattice --m 7 --seed 1 --domain mission.ini --out pts.csv
    mcmsurvey plan   --config mission.ini --out-dir out/
    mcmsurvey relax  --config mission.ini --out-dir out/
    mcmsurvey risk   --config mission.ini --trajectory out/trajectory.csv
    mcmsurvey bench  --config mission.ini --runs 20 --out-dir out/
    mcmsurvey grid   --config mission.ini --trajectory out/trajectory.csv --out seen.pgm

Trajectory CSVs are in meters and seconds with angles in degrees; JSON
reports give domains in the configuration's domain units.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .bench import run_batch, write_batch
from .config import MissionConfig, ParseError, ValidationError, parse_config
from .dynamics import Trajectory, trajectory_from_csv, trajectory_to_csv
from .geometry import DomainSpec, Rect, contains
from .lowdisc import KIND_ALIASES, PointSetError
from .optimizer import solve
from .relaxation import MissionReport, naive_mission, relaxed_mission
from .risk import exposure_many, post_risk_oracle, target_points
from .sensor import SensorParams

log = logging.getLogger("mcmsurvey")


@dataclass(frozen=True, eq=False)
class EnsonifiedGrid:
    """Survival probability exp(-exposure) at cell centers.

    ``values[i, j]`` belongs to the cell at row ``i`` counted from the
    bottom (low y) and column ``j`` from the left; ``inside`` marks cells
    whose center lies in the domain.
    """

    values: np.ndarray
    lo: tuple[float, float]
    hi: tuple[float, float]
    inside: np.ndarray

    @property
    def resolution(self) -> int:
        return self.values.shape[0]

    def mean(self) -> float:
        return float(self.values[self.inside].mean())


def render_grid(traj: Trajectory, domain_init, sensor: SensorParams,
                resolution: int = 256, workers: int = 1) -> EnsonifiedGrid:
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    shape = domain_init.shape if isinstance(domain_init, DomainSpec) else domain_init
    lo, hi = shape.bounds()
    cx = lo[0] + (np.arange(resolution) + 0.5) * (hi[0] - lo[0]) / resolution
    cy = lo[1] + (np.arange(resolution) + 0.5) * (hi[1] - lo[1]) / resolution
    X, Y = np.meshgrid(cx, cy)
    centers = np.column_stack([X.ravel(), Y.ravel()])
    surv = np.exp(-exposure_many(traj, centers, sensor, workers)).reshape(resolution, resolution)
    inside = np.asarray(contains(shape, centers)).reshape(resolution, resolution)
    return EnsonifiedGrid(surv, tuple(lo), tuple(hi), inside)


def write_pgm(grid: EnsonifiedGrid, path) -> None:
    """Plain PGM, top row = high y, survival 1 -> 255."""
    pix = np.rint(255.0 * np.clip(grid.values, 0.0, 1.0)).astype(int)[::-1]
    h, w = pix.shape
    lines = ["P2", f"# survival probability over [{grid.lo[0]:g}, {grid.hi[0]:g}] x "
             f"[{grid.lo[1]:g}, {grid.hi[1]:g}] m", f"{w} {h}", "255"]
    for row in pix:
        for k in range(0, w, 17):
            lines.append(" ".join(str(v) for v in row[k:k + 17]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_pgm(path) -> np.ndarray:
    tokens = []
    for line in Path(path).read_text().splitlines():
        tokens.extend(line.split("#", 1)[0].split())
    if tokens[0] != "P2":
        raise ValueError("not a plain PGM file")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    return np.array(tokens[4:4 + w * h], dtype=int).reshape(h, w), maxval


# ---------------------------------------------------------------------------
# JSON helpers


def domain_json(domain: DomainSpec, unit: float) -> dict:
    s = domain.shape
    if isinstance(s, Rect):
        return {"shape": "rect", "lo": [c / unit for c in s.lo], "hi": [c / unit for c in s.hi]}
    return {"shape": "quad", "vertices": [[c / unit for c in v] for v in s.vertices]}


def report_json(rep: MissionReport, cfg: MissionConfig) -> dict:
    return {
        "requested_risk": rep.requested_risk,
        "achieved_risk": rep.achieved_risk,
        "oracle_std_error": rep.oracle_std_error,
        "path_time_s": rep.path_time,
        "computation_time_s": rep.computation_time,
        "initial_domain": domain_json(rep.initial_domain, cfg.unit),
        "final_domain": domain_json(rep.final_domain, cfg.unit),
        "inflations": rep.inflations,
        "success": rep.success,
        "failure": rep.failure,
        "unit_m": cfg.unit,
        "points": {"kind": cfg.points.kind, "m": cfg.points.m, "seed": cfg.points.seed},
        "per_iteration": [
            {"domain": domain_json(it.domain, cfg.unit), "post_risk": it.post_risk, "t_f": it.t_f,
             "internal_risk": it.internal_risk, "converged": it.converged, "seconds": it.seconds}
            for it in rep.per_iteration
        ],
    }


def _dump(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


def _prepare(args) -> MissionConfig:
    cfg = parse_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, points=replace(cfg.points, seed=args.seed), seed_base=args.seed)
    return cfg


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _oracle_roundtrip(traj: Trajectory, cfg: MissionConfig, csv_path: Path):
    """Write the trajectory and evaluate the oracle on what was written."""
    trajectory_to_csv(traj, csv_path)
    back = trajectory_from_csv(csv_path, cfg.vehicle.v)
    return post_risk_oracle(back, cfg.domain, cfg.sensor, cfg.oracle_seed, cfg.oracle_log2,
                            cfg.settings.workers)


# ---------------------------------------------------------------------------
# subcommands


def cmd_points(args) -> int:
    cfg = parse_config(args.domain) if args.domain else parse_config_default()
    seed = args.seed if args.seed is not None else cfg.points.seed
    spec = replace(cfg.points, kind=args.kind, m=args.m, seed=seed)
    unit_pts = spec.build(cfg.domain)
    pts, _ = target_points(unit_pts, cfg.domain)
    R, N = pts.shape[:2]
    data = np.column_stack([pts.reshape(-1, 2) / cfg.unit, np.repeat(np.arange(R), N)])
    np.savetxt(args.out, data, delimiter=",", header="x,y,shift_index", comments="",
               fmt=["%.17g", "%.17g", "%d"])
    return 0


def parse_config_default() -> MissionConfig:
    from .config import default_config
    return default_config()


def cmd_plan(args) -> int:
    cfg = _prepare(args)
    out = _out_dir(args.out_dir)
    (out / "resolved.ini").write_text(cfg.to_ini())
    req = cfg.request()
    unit = req.points.build(cfg.domain)
    sol = solve(cfg.domain, cfg.start, cfg.m_risk, unit, cfg.sensor, cfg.vehicle, cfg.settings,
                heading=cfg.heading)
    post = _oracle_roundtrip(sol.trajectory, cfg, out / "trajectory.csv")
    _dump({
        "t_f": sol.t_f,
        "internal_risk": sol.internal_risk.value,
        "oracle_risk": post.value,
        "requested_risk": cfg.m_risk,
        "converged": sol.converged,
        "iterations": sol.iterations,
        "knots_deg": np.degrees(sol.schedule.knots).tolist(),
        "domain": domain_json(cfg.domain, cfg.unit),
        "unit_m": cfg.unit,
    }, out / "solution.json")
    print(f"t_f = {sol.t_f:.1f} s, internal risk = {sol.internal_risk.value:.4f}, "
          f"oracle risk = {post.value:.4f}, converged = {sol.converged}")
    return 0


def cmd_relax(args) -> int:
    cfg = _prepare(args)
    out = _out_dir(args.out_dir)
    (out / "resolved.ini").write_text(cfg.to_ini())
    rep = relaxed_mission(cfg.request(), cfg.sensor, cfg.vehicle, cfg.settings,
                          warm_start=cfg.warm_start)
    post = _oracle_roundtrip(rep.trajectory, cfg, out / "trajectory.csv")
    rep.achieved_risk, rep.oracle_std_error = post.value, post.std_error
    rep.success = rep.success and post.value <= rep.requested_risk
    _dump(report_json(rep, cfg), out / "report.json")
    with open(out / "domains.csv", "w") as fh:
        fh.write("iteration,domain,post_risk,t_f,internal_risk,converged,seconds\n")
        for i, it in enumerate(rep.per_iteration):
            fh.write(f"{i},\"{json.dumps(domain_json(it.domain, cfg.unit))}\",{it.post_risk!r},"
                     f"{it.t_f!r},{it.internal_risk!r},{int(it.converged)},{it.seconds!r}\n")
    write_pgm(render_grid(rep.trajectory, cfg.domain, cfg.sensor, args.resolution), out / "grid.pgm")
    print(f"achieved risk = {rep.achieved_risk:.4f} (requested {rep.requested_risk}), "
          f"inflations = {rep.inflations}, t_f = {rep.path_time:.1f} s")
    return 0 if rep.success else 3


def cmd_naive(args) -> int:
    cfg = _prepare(args)
    out = _out_dir(args.out_dir)
    rep = naive_mission(cfg.request(), cfg.sensor, cfg.vehicle, cfg.settings)
    post = _oracle_roundtrip(rep.trajectory, cfg, out / "trajectory.csv")
    rep.achieved_risk, rep.oracle_std_error = post.value, post.std_error
    _dump(report_json(rep, cfg), out / "report.json")
    print(f"achieved risk = {rep.achieved_risk:.4f} (requested {rep.requested_risk})")
    return 0


def cmd_risk(args) -> int:
    cfg = _prepare(args)
    traj = trajectory_from_csv(args.trajectory, cfg.vehicle.v)
    est = post_risk_oracle(traj, cfg.domain, cfg.sensor, cfg.oracle_seed, cfg.oracle_log2,
                           cfg.settings.workers)
    print(json.dumps({"risk": est.value, "std_error": est.std_error, "n_points": est.n_points,
                      "per_shift": list(est.per_shift),
                      "seed": cfg.oracle_seed}))
    return 0


def cmd_bench(args) -> int:
    cfg = _prepare(args)
    out = _out_dir(args.out_dir)
    (out / "resolved.ini").write_text(cfg.to_ini())
    bc = cfg.batch(runs=args.runs)
    if args.workers:
        bc = replace(bc, workers=args.workers)
    result = run_batch(bc)
    write_batch(result, out)
    for kind, metrics in result.summary.items():
        s = metrics["risk"]
        print(f"{kind}: median risk {s.median:.4f}, max {s.max:.4f}, "
              f"median comp time {metrics['comp_time_s'].median:.1f} s")
    return 0


def cmd_grid(args) -> int:
    cfg = _prepare(args)
    traj = trajectory_from_csv(args.trajectory, cfg.vehicle.v)
    grid = render_grid(traj, cfg.domain, cfg.sensor, args.resolution, cfg.settings.workers)
    write_pgm(grid, args.out)
    print(f"mean survival over the domain = {grid.mean():.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mcmsurvey", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("points", help="write an integration point set as CSV")
    sp.add_argument("--kind", required=True, choices=sorted(KIND_ALIASES))
    sp.add_argument("--m", type=int, required=True, help="log2 of the point count")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--domain", help="config file whose [domain] the points are mapped onto")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_points)

    for name, func, help_ in (("plan", cmd_plan, "solve once and write the plan"),
                              ("relax", cmd_relax, "adaptive domain inflation"),
                              ("naive", cmd_naive, "one solve plus the oracle check")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True)
        sp.add_argument("--out-dir", required=True)
        sp.add_argument("--seed", type=int)
        if name == "relax":
            sp.add_argument("--resolution", type=int, default=256)
        sp.set_defaults(func=func)

    sp = sub.add_parser("risk", help="oracle risk of a trajectory CSV")
    sp.add_argument("--config", required=True)
    sp.add_argument("--trajectory", required=True)
    sp.add_argument("--seed", type=int)
    sp.set_defaults(func=cmd_risk)

    sp = sub.add_parser("bench", help="batch comparison of point-set kinds")
    sp.add_argument("--config", required=True)
    sp.add_argument("--runs", type=int)
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--workers", type=int)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("grid", help="ensonification raster (PGM) of a trajectory")
    sp.add_argument("--config", required=True)
    sp.add_argument("--trajectory", required=True)
    sp.add_argument("--resolution", type=int, default=256)
    sp.add_argument("--out", required=True)
    sp.add_argument("--seed", type=int)
    sp.set_defaults(func=cmd_grid)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ParseError, ValidationError, PointSetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
