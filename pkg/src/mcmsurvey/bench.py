"""Batch experiments comparing point-set kinds over many independent missions."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .dynamics import VehicleParams
from .geometry import contains
from .lowdisc import canonical_kind
from .optimizer import NlpSettings
from .relaxation import MissionRequest, naive_mission, relaxed_mission
from .sensor import SensorParams

METRICS = ("risk", "comp_time_s", "path_time_s", "inflations")


class EmptyRecords(ValueError):
    pass


@dataclass(frozen=True)
class SummaryStats:
    """Median, mean, population standard deviation and range of one metric."""

    median: float
    mean: float
    std: float
    min: float
    max: float
    count: int


@dataclass(frozen=True)
class BatchConfig:
    request: MissionRequest
    runs: int = 20
    kinds: tuple[str, ...] = ("lattice", "mc")
    seed_base: int = 0
    mode: str = "relaxed"
    sensor: SensorParams = SensorParams()
    vehicle: VehicleParams = VehicleParams()
    settings: NlpSettings = NlpSettings()
    workers: int = 1
    # uniform jitter (meters) applied to the start point, 0 keeps it fixed
    start_jitter: float = 0.0
    warm_start: bool = False

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if not self.kinds:
            raise ValueError("kinds must be non-empty")
        object.__setattr__(self, "kinds", tuple(canonical_kind(k) for k in self.kinds))
        if self.mode not in ("relaxed", "naive"):
            raise ValueError("mode must be 'relaxed' or 'naive'")


@dataclass(frozen=True)
class RunRecord:
    kind: str
    run: int
    seed: int
    risk: float
    comp_time_s: float
    path_time_s: float
    inflations: int
    success: bool
    error: str = ""


@dataclass(eq=False)
class BatchResult:
    records: list[RunRecord]
    summary: dict[str, dict[str, SummaryStats]] = field(default_factory=dict)


def run_seed(seed_base: int, run: int) -> int:
    return seed_base ^ run


def summarize(values) -> SummaryStats:
    """Summary of a sample; the median of an even count is the midpoint of the middle pair."""
    x = np.asarray(list(values), dtype=float)
    if x.size == 0:
        raise EmptyRecords("no records to summarize")
    return SummaryStats(float(np.median(x)), float(x.mean()), float(x.std(ddof=0)),
                        float(x.min()), float(x.max()), int(x.size))


def summarize_records(records) -> dict[str, dict[str, SummaryStats]]:
    records = list(records)
    if not records:
        raise EmptyRecords("no records to summarize")
    out = {}
    for kind in dict.fromkeys(r.kind for r in records):
        ok = [r for r in records if r.kind == kind and not r.error]
        if ok:
            out[kind] = {m: summarize(getattr(r, m) for r in ok) for m in METRICS}
    return out


def _jittered_start(cfg: BatchConfig, seed: int):
    start = cfg.request.start
    if cfg.start_jitter <= 0:
        return start
    rng = np.random.default_rng([seed, 0x4A17])
    for _ in range(100):
        cand = tuple(float(v) for v in np.asarray(start) + rng.uniform(-1, 1, 2) * cfg.start_jitter)
        if contains(cfg.request.domain, cand):
            return cand
    return start


def _one(args) -> RunRecord:
    cfg, kind, run = args
    seed = run_seed(cfg.seed_base, run)
    req = replace(cfg.request, points=replace(cfg.request.points, kind=kind, seed=seed),
                  start=_jittered_start(cfg, seed))
    try:
        if cfg.mode == "relaxed":
            rep = relaxed_mission(req, cfg.sensor, cfg.vehicle, cfg.settings, cfg.warm_start)
        else:
            rep = naive_mission(req, cfg.sensor, cfg.vehicle, cfg.settings)
    except Exception as exc:  # recorded, not fatal
        return RunRecord(kind, run, seed, math.nan, math.nan, math.nan, -1, False,
                         f"{type(exc).__name__}: {exc}")
    return RunRecord(kind, run, seed, rep.achieved_risk, rep.computation_time, rep.path_time,
                     rep.inflations, rep.success)


def run_batch(cfg: BatchConfig) -> BatchResult:
    """``cfg.runs`` missions per kind; run ``i`` uses seed ``seed_base ^ i``.

    Records come back ordered by kind then run index whatever the worker
    count.
    """
    jobs = [(cfg, kind, run) for kind in cfg.kinds for run in range(cfg.runs)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            records = list(pool.map(_one, jobs))
    else:
        records = [_one(j) for j in jobs]
    return BatchResult(records, summarize_records(records))


def write_records(records, path) -> None:
    names = list(RunRecord.__dataclass_fields__)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=names)
        w.writeheader()
        for r in records:
            w.writerow(asdict(r))


def write_summary(summary, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kind", "metric", "median", "mean", "std", "min", "max", "count"])
        for kind, metrics in summary.items():
            for name, s in metrics.items():
                w.writerow([kind, name, repr(s.median), repr(s.mean), repr(s.std),
                            repr(s.min), repr(s.max), s.count])


def write_batch(result: BatchResult, out_dir) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rec, summ = out / "records.csv", out / "summary.csv"
    write_records(result.records, rec)
    write_summary(result.summary, summ)
    return rec, summ
