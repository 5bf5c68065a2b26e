"""Time-of-Use price schedules and exact energy-cost integrals.

A :class:`PriceSchedule` is a piecewise-constant price (currency per MWh)
over half-open grid-time segments ``[start, end)``.  Costs of a constant
power draw are integrated in closed form by splitting the interval at
segment boundaries.
"""

from __future__ import annotations

import bisect
import hashlib
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import GapAtSplice, NonpositiveInterval, OutOfCoverage, SpecInvalid
from .pta import TIME_TOL, PtaModel, transition_timings


@dataclass(frozen=True)
class Segment:
    start: float
    end: float
    price: float


class InvalidPriceSchedule(SpecInvalid):
    """A price schedule failed validation; ``index`` names the bad segment."""

    def __init__(self, index, message):
        self.index = index
        super().__init__(f"segments[{index}]: {message}")


@dataclass(frozen=True)
class PriceSchedule:
    segments: tuple
    _starts: list = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        segs = tuple(
            s if isinstance(s, Segment) else Segment(float(s[0]), float(s[1]), float(s[2]))
            for s in self.segments
        )
        if not segs:
            raise InvalidPriceSchedule(0, "schedule has no segments")
        for i, s in enumerate(segs):
            if not s.end > s.start:
                raise InvalidPriceSchedule(i, f"end {s.end} must be after start {s.start}")
            if s.price < 0:
                raise InvalidPriceSchedule(i, f"negative price {s.price}")
            if i and abs(s.start - segs[i - 1].end) > TIME_TOL:
                raise InvalidPriceSchedule(
                    i, f"start {s.start} does not meet previous end {segs[i - 1].end}"
                )
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "_starts", [s.start for s in segs])

    @classmethod
    def flat(cls, start: float, end: float, price: float) -> "PriceSchedule":
        return cls((Segment(start, end, price),))

    @property
    def start(self) -> float:
        return self.segments[0].start

    @property
    def end(self) -> float:
        return self.segments[-1].end

    def scaled(self, k: float) -> "PriceSchedule":
        return PriceSchedule(tuple(Segment(s.start, s.end, s.price * k) for s in self.segments))

    def to_dict(self) -> dict:
        return {
            "segments": [
                {"start_h": s.start, "end_h": s.end, "price_per_mwh": s.price}
                for s in self.segments
            ]
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "PriceSchedule":
        raw = data.get("segments") if isinstance(data, Mapping) else None
        if not isinstance(raw, list):
            raise SpecInvalid("segments: expected a list")
        segs = []
        for i, item in enumerate(raw):
            try:
                segs.append(
                    Segment(float(item["start_h"]), float(item["end_h"]),
                            float(item["price_per_mwh"]))
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise InvalidPriceSchedule(i, f"malformed segment ({exc})") from None
        return cls(tuple(segs))

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def load_prices(path) -> PriceSchedule:
    with open(path, encoding="utf-8") as fh:
        return PriceSchedule.from_dict(json.load(fh))


def price_at(sched: PriceSchedule, t: float) -> float:
    i = bisect.bisect_right(sched._starts, t) - 1
    if i < 0 or t >= sched.segments[i].end:
        raise OutOfCoverage(f"t={t} outside [{sched.start}, {sched.end})")
    return sched.segments[i].price


def price_pieces(sched: PriceSchedule, t_start: float, t_end: float) -> list:
    """Split ``[t_start, t_end]`` at segment boundaries: ``[(a, b, price), ...]``."""
    if not t_end > t_start:
        raise NonpositiveInterval(f"interval [{t_start}, {t_end}] is empty")
    if t_start < sched.start - TIME_TOL or t_end > sched.end + TIME_TOL:
        raise OutOfCoverage(
            f"interval [{t_start}, {t_end}] outside [{sched.start}, {sched.end}]"
        )
    segs = sched.segments
    i = max(bisect.bisect_right(sched._starts, t_start) - 1, 0)
    out = []
    while i < len(segs) and segs[i].start < t_end:
        a = max(segs[i].start, t_start)
        b = min(segs[i].end, t_end)
        if b > a:
            out.append((a, b, segs[i].price))
        i += 1
    if out:
        # absorb float drift past the coverage edges
        a0, b0, p0 = out[0]
        out[0] = (t_start, b0, p0)
        a1, b1, p1 = out[-1]
        out[-1] = (a1, t_end, p1)
    return out


def transition_energy_cost(power: float, t_start: float, t_end: float,
                           sched: PriceSchedule) -> float:
    """Exact integral of ``power * f(T)`` over ``[t_start, t_end]``."""
    cost = 0.0
    for a, b, p in price_pieces(sched, t_start, t_end):
        cost += power * p * (b - a)
    return cost


@dataclass(frozen=True)
class EnergyCostBreakdown:
    per_event: tuple  # ((event_index, cost), ...)
    total: float


def string_energy_cost(model: PtaModel, start_state: int, start_global: float,
                       s: Sequence[int], sched: PriceSchedule) -> EnergyCostBreakdown:
    per_event = []
    total = 0.0
    for i, ts, te in transition_timings(model, start_state, start_global, s):
        c = transition_energy_cost(model.machine.power(s[i]), ts, te, sched)
        per_event.append((i, c))
        total += c
    return EnergyCostBreakdown(tuple(per_event), total)


def splice_prices(current: PriceSchedule, update: PriceSchedule, at: float) -> PriceSchedule:
    """``current`` before ``at`` and ``update`` from ``at`` on."""
    if not update.start <= at + TIME_TOL or not update.end > at + TIME_TOL:
        raise GapAtSplice(f"update covering [{update.start}, {update.end}] does not cover {at}")
    head = [
        Segment(s.start, min(s.end, at), s.price)
        for s in current.segments
        if s.start < at - TIME_TOL
    ]
    if head and head[-1].end < at - TIME_TOL:
        raise GapAtSplice(f"current schedule ends at {head[-1].end}, before splice at {at}")
    tail = [
        Segment(max(s.start, at), s.end, s.price)
        for s in update.segments
        if s.end > at + TIME_TOL
    ]
    if head and tail:
        tail[0] = Segment(head[-1].end, tail[0].end, tail[0].price)
        cut = any(s.start < at - TIME_TOL and s.end > at + TIME_TOL for s in current.segments)
        if cut and head[-1].price == tail[0].price:
            # re-join a segment the splice point cut in two
            tail[0] = Segment(head.pop().start, tail[0].end, tail[0].price)
    return PriceSchedule(tuple(head + tail))
