"""Closed-loop and fixed-schedule runs, and their side-by-side comparison."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .decision import LookaheadConfig, execute_event, llp_run, run_meta
from .errors import MismatchedFixtures, ReschedulingFailure
from .planning import RuntimeContext, init_model
from .pta import check_constraints, is_marked, validate_string
from .records import COMPLETED, INCOMPLETE, VIOLATED, RunLog, RunTotals

TIMELINE_COLUMNS = ("hour", "power_mw", "price_per_mwh", "cumulative_cost")


def run_llp(machine, order, prices, cfg: LookaheadConfig | None = None,
            disturbances=()) -> RunLog:
    """Lookahead-controlled run; a rescheduling failure is logged, not raised."""
    cfg = cfg or LookaheadConfig()
    model = init_model(machine, order)
    try:
        return llp_run(model, prices, cfg, disturbances)
    except ReschedulingFailure as exc:
        return exc.log


def run_fixed(machine, order, prices, s) -> RunLog:
    """Execute ``s`` verbatim.

    A schedule that misses a deadline still runs to the end; the outcome is
    ``violated`` and the missed milestone is kept under ``extra``.
    """
    model = init_model(machine, order)
    s = validate_string(s)
    violation = check_constraints(model, 0, 0.0, s)
    ctx = RuntimeContext.start(model, prices)
    steps = []
    for e in s:
        step, ctx = execute_event(ctx, len(steps), e)
        steps.append(step)
    extra = {}
    if violation is not None:
        outcome = VIOLATED
        extra["violation"] = {
            "applies_at": violation.constraint.applies_at,
            "bound_h": violation.constraint.bound,
            "crossing_h": violation.crossing_time,
            "checked_h": violation.checked_at,
        }
    elif not is_marked(model, ctx.current_state):
        outcome = INCOMPLETE
    else:
        outcome = COMPLETED
    note = violation.describe() if violation else ""
    return RunLog(run_meta("fixed", model, prices, {"schedule": list(s)}), tuple(steps),
                  RunTotals.fold(steps, 0, model.start_time), outcome, note, extra)


def timeline(log: RunLog) -> dict:
    """Piecewise-constant power/price series of a run, one row per billed piece.

    ``hour`` is the piece start; ``cumulative_cost`` is the running cost at
    the piece end.
    """
    hours, power, price, cum = [], [], [], []
    total = 0.0
    for st in log.steps:
        for a, b, p in st.price_pieces:
            total += st.power_mw * p * (b - a)
            hours.append(a)
            power.append(st.power_mw)
            price.append(p)
            cum.append(total)
    return {
        "hour": np.asarray(hours, dtype=float),
        "power_mw": np.asarray(power, dtype=float),
        "price_per_mwh": np.asarray(price, dtype=float),
        "cumulative_cost": np.asarray(cum, dtype=float),
    }


def timeline_csv(log: RunLog) -> str:
    tl = timeline(log)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TIMELINE_COLUMNS)
    for row in zip(*(tl[c] for c in TIMELINE_COLUMNS)):
        w.writerow([repr(float(x)) for x in row])
    return buf.getvalue()


@dataclass(frozen=True)
class ComparisonReport:
    runs: dict
    savings_percent: float
    timeline: dict

    def to_dict(self) -> dict:
        names = list(self.runs)
        return {
            "runs": {
                k: {"schedule": list(v.schedule), "outcome": v.outcome,
                    "cost": v.totals.cost, "energy_mwh": v.totals.energy_mwh,
                    "end_h": v.totals.end_time}
                for k, v in self.runs.items()
            },
            "savings_percent": self.savings_percent,
            "baseline": names[1],
            "timeline": {
                k: {c: tl[c].tolist() for c in TIMELINE_COLUMNS}
                for k, tl in self.timeline.items()
            },
        }


def _fixture_key(log: RunLog):
    m = log.meta
    return m["machine"], m["order"], m["tariff_digest"], m["start_h"]


def compare(a: RunLog, b: RunLog, names=("a", "b")) -> ComparisonReport:
    """Savings of run ``a`` relative to the baseline run ``b``, in percent."""
    if _fixture_key(a) != _fixture_key(b):
        raise MismatchedFixtures("runs use different machine, order or tariff")
    ca, cb = a.totals.cost, b.totals.cost
    if cb == 0:
        savings = 0.0 if ca == 0 else float("-inf")
    else:
        savings = (cb - ca) / cb * 100.0
    runs = {names[0]: a, names[1]: b}
    return ComparisonReport(runs, savings, {k: timeline(v) for k, v in runs.items()})
