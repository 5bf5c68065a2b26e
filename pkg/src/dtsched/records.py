"""Plain records produced by the controller and the simulator.

Everything here serializes to JSON and back without loss; ``to_json`` output
is canonical (sorted keys) so identical runs give identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

COMPLETED = "completed"
RESCHEDULING_FAILURE = "rescheduling_failure"
VIOLATED = "violated"
INCOMPLETE = "incomplete"


@dataclass(frozen=True)
class Candidate:
    """One lookahead string with its cost, or the reason it was rejected."""

    string: tuple
    terminal_state: int
    cost: float | None = None
    reason: str | None = None

    @property
    def valid(self) -> bool:
        return self.reason is None

    def to_dict(self) -> dict:
        return {
            "string": list(self.string),
            "terminal_state": self.terminal_state,
            "cost": self.cost,
            "reason": self.reason,
        }

    @classmethod
    def from_dict(cls, d) -> "Candidate":
        return cls(tuple(d["string"]), d["terminal_state"], d["cost"], d["reason"])


@dataclass(frozen=True)
class DecisionRecord:
    at_state: int
    at_global: float
    candidates: tuple
    chosen_event: int | None
    chosen_string: tuple = ()

    def to_dict(self) -> dict:
        return {
            "at_state": self.at_state,
            "at_global": self.at_global,
            "candidates": [c.to_dict() for c in self.candidates],
            "chosen_event": self.chosen_event,
            "chosen_string": list(self.chosen_string),
        }

    @classmethod
    def from_dict(cls, d) -> "DecisionRecord":
        return cls(
            d["at_state"],
            d["at_global"],
            tuple(Candidate.from_dict(c) for c in d["candidates"]),
            d["chosen_event"],
            tuple(d["chosen_string"]),
        )


@dataclass(frozen=True)
class StepRecord:
    index: int
    start: float  # grid hours
    end: float
    state_before: int
    state_after: int
    event: int
    power_mw: float
    energy_mwh: float
    cost: float
    price_pieces: tuple = ()  # ((a, b, price), ...) actually billed
    decision: DecisionRecord | None = None

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "start_h": self.start,
            "end_h": self.end,
            "state_before": self.state_before,
            "state_after": self.state_after,
            "event": self.event,
            "power_mw": self.power_mw,
            "energy_mwh": self.energy_mwh,
            "cost": self.cost,
            "price_pieces": [list(p) for p in self.price_pieces],
            "decision": self.decision.to_dict() if self.decision else None,
        }

    @classmethod
    def from_dict(cls, d) -> "StepRecord":
        dec = d.get("decision")
        return cls(
            d["index"], d["start_h"], d["end_h"], d["state_before"], d["state_after"],
            d["event"], d["power_mw"], d["energy_mwh"], d["cost"],
            tuple(tuple(p) for p in d["price_pieces"]),
            DecisionRecord.from_dict(dec) if dec else None,
        )


@dataclass(frozen=True)
class RunTotals:
    energy_mwh: float
    cost: float
    parts_produced: int
    end_time: float

    @classmethod
    def fold(cls, steps, start_state: int, start_time: float) -> "RunTotals":
        energy = cost = 0.0
        for st in steps:
            energy += st.energy_mwh
            cost += st.cost
        parts = steps[-1].state_after if steps else start_state
        end = steps[-1].end if steps else start_time
        return cls(energy, cost, parts, end)


@dataclass(frozen=True)
class RunLog:
    meta: dict
    steps: tuple
    totals: RunTotals
    outcome: str
    note: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def schedule(self) -> tuple:
        return tuple(st.event for st in self.steps)

    def to_dict(self) -> dict:
        return {
            "meta": self.meta,
            "steps": [st.to_dict() for st in self.steps],
            "totals": {
                "energy_mwh": self.totals.energy_mwh,
                "cost": self.totals.cost,
                "parts_produced": self.totals.parts_produced,
                "end_h": self.totals.end_time,
            },
            "outcome": self.outcome,
            "note": self.note,
            "extra": self.extra,
        }

    @classmethod
    def from_dict(cls, d) -> "RunLog":
        t = d["totals"]
        return cls(
            d["meta"],
            tuple(StepRecord.from_dict(s) for s in d["steps"]),
            RunTotals(t["energy_mwh"], t["cost"], t["parts_produced"], t["end_h"]),
            d["outcome"],
            d.get("note", ""),
            d.get("extra", {}),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunLog":
        return cls.from_dict(json.loads(text))
