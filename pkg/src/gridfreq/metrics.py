"""Reliability metrics and case-comparison reporting.

Three metrics summarize a run: the maximum shed fraction of total
expected load (R_ls), the total duration with any load shed (T_ls), and
the energy not served (EENS, trapezoidal integral of curtailed power).
The expected (unshed) load realization is the counterfactual baseline
for EENS.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .engine import Trajectory

SCHEMA_VERSION = 1


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class ShedEvent:
    trigger_s: float
    clear_s: float
    max_level: float

    @property
    def duration_s(self) -> float:
        return self.clear_s - self.trigger_s


@dataclass(frozen=True)
class Metrics:
    r_ls: float                      # max shed fraction of expected load
    t_ls_s: float                    # total shedding duration
    eens_mwh: float
    events: tuple[ShedEvent, ...] = ()
    scenario: str = ""
    case: str = ""
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.r_ls <= 0.5 + 1e-12:
            raise MetricsError(f"R_ls {self.r_ls} outside [0, 0.5]")
        if self.t_ls_s < 0 or self.eens_mwh < -1e-12:
            raise MetricsError("negative duration or EENS")


def compute_metrics(tr: Trajectory) -> Metrics:
    """Shed-rate, duration and EENS metrics from one trajectory."""
    if tr.load_expected_mw.size == 0:
        raise MetricsError("trajectory has no expected-load channel")
    t = tr.times
    expected = tr.load_expected_mw.sum(axis=1)
    served = tr.load_served_mw.sum(axis=1)
    unserved = expected - served
    if np.any(expected <= 0):
        raise MetricsError("expected load must be positive")

    frac = unserved / expected
    r_ls = float(frac.max())

    shedding = np.any(tr.shed_level > 0, axis=1)
    dt = tr.dt_out
    t_ls = float(np.count_nonzero(shedding) * dt)

    trapezoid = getattr(np, "trapezoid", np.trapz)
    eens = float(trapezoid(unserved, t)) / 3600.0

    events = []
    in_event = False
    start = 0.0
    peak = 0.0
    for k in range(len(t)):
        lvl = float(tr.shed_level[k].max())
        if shedding[k] and not in_event:
            in_event, start, peak = True, t[k], lvl
        elif shedding[k]:
            peak = max(peak, lvl)
        elif in_event:
            events.append(ShedEvent(trigger_s=float(start), clear_s=float(t[k]),
                                    max_level=peak))
            in_event = False
    if in_event:
        events.append(ShedEvent(trigger_s=float(start), clear_s=float(t[-1] + dt),
                                max_level=peak))

    return Metrics(r_ls=r_ls, t_ls_s=t_ls, eens_mwh=max(eens, 0.0),
                   events=tuple(events), scenario=tr.scenario_name,
                   case=tr.case, seed=tr.seed)


@dataclass(frozen=True)
class CaseComparison:
    a: Metrics
    b: Metrics
    eens_ratio: float = field(init=False)
    t_ls_reduction_pct: float = field(init=False)
    eens_reduction_pct: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "eens_ratio",
                           self.a.eens_mwh / self.b.eens_mwh
                           if self.b.eens_mwh > 0 else float("inf"))
        object.__setattr__(self, "t_ls_reduction_pct",
                           100.0 * (1.0 - self.b.t_ls_s / self.a.t_ls_s)
                           if self.a.t_ls_s > 0 else 0.0)
        object.__setattr__(self, "eens_reduction_pct",
                           100.0 * (1.0 - self.b.eens_mwh / self.a.eens_mwh)
                           if self.a.eens_mwh > 0 else 0.0)


def compare_cases(a: Metrics, b: Metrics) -> CaseComparison:
    return CaseComparison(a=a, b=b)


def format_comparison(cmp: CaseComparison) -> str:
    """Summary table of the two runs and their ratios."""
    rows = [
        ("", "Max shed R_ls", "Duration T_ls [s]", "EENS [MWh]"),
        (f"case {cmp.a.case} ({cmp.a.scenario})",
         f"{cmp.a.r_ls:.1%}", f"{cmp.a.t_ls_s:.1f}", f"{cmp.a.eens_mwh:.3f}"),
        (f"case {cmp.b.case} ({cmp.b.scenario})",
         f"{cmp.b.r_ls:.1%}", f"{cmp.b.t_ls_s:.1f}", f"{cmp.b.eens_mwh:.3f}"),
    ]
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()
             for r in rows]
    lines.append(f"EENS ratio a/b: {cmp.eens_ratio:.2f} "
                 f"(reduction {cmp.eens_reduction_pct:.1f}%), "
                 f"T_ls reduction {cmp.t_ls_reduction_pct:.1f}%")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def metrics_to_dict(m: Metrics) -> dict:
    d = asdict(m)
    d["schema_version"] = SCHEMA_VERSION
    return d


def metrics_from_dict(d: dict) -> Metrics:
    for key in ("r_ls", "t_ls_s", "eens_mwh"):
        if key not in d:
            raise MetricsError(f"metrics document missing key {key!r}")
    events = tuple(ShedEvent(**e) for e in d.get("events", ()))
    return Metrics(r_ls=d["r_ls"], t_ls_s=d["t_ls_s"], eens_mwh=d["eens_mwh"],
                   events=events, scenario=d.get("scenario", ""),
                   case=d.get("case", ""), seed=d.get("seed", 0))


def load_metrics(path: str | Path) -> Metrics:
    try:
        with open(path) as f:
            return metrics_from_dict(json.load(f))
    except json.JSONDecodeError as exc:
        raise MetricsError(f"{path}: not valid JSON: {exc}") from exc


def export_results(tr: Trajectory, m: Metrics, outdir: str | Path) -> list[Path]:
    """Write trajectory CSV, metrics JSON and events CSV; returns the paths."""
    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        traj_path = outdir / "trajectory.csv"
        tr.to_csv(traj_path)
        metrics_path = outdir / "metrics.json"
        with open(metrics_path, "w") as f:
            json.dump(metrics_to_dict(m), f, indent=2, sort_keys=True)
            f.write("\n")
        events_path = outdir / "events.csv"
        with open(events_path, "w") as f:
            f.write("trigger_s,clear_s,max_level\n")
            for ev in m.events:
                f.write(f"{ev.trigger_s:.10g},{ev.clear_s:.10g},{ev.max_level:.10g}\n")
    except OSError as exc:
        raise OSError(f"cannot write results under {outdir}: {exc}") from exc
    return [traj_path, metrics_path, events_path]
