"""Priced timed automaton for a single batch-production machine.

States are integers equal to the cumulative number of parts produced and
events are integers equal to the batch size (``0`` is an idle cycle).  The
automaton is a chain, so transitions are computed on demand instead of being
stored in a table.

All times are decimal hours.  ``global`` clock values are measured from the
order start ``T0``; grid times are ``T0 + global``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import (
    CapacityExceeded,
    ConsecutiveIdle,
    InvalidEvent,
    SpecInvalid,
)

#: Absolute tolerance (hours) used for every time comparison.
TIME_TOL = 1e-9

ScheduleString = tuple  # tuple[int, ...] of batch sizes


@dataclass(frozen=True)
class MachineSpec:
    """Physical parameters of the batch-production machine.

    ``power_map[b]`` is the power draw in MW while running a batch of size
    ``b``; index 0 is the idle (set-up) draw.
    """

    capacity: int
    processing_time: float
    setup_time: float
    power_map: tuple
    inventory_capacity: int
    allocated_inventory: int

    def __post_init__(self):
        pm = self.power_map
        if isinstance(pm, Mapping):
            try:
                pm = tuple(float(pm[k]) for k in sorted(pm, key=int))
                keys = sorted(int(k) for k in self.power_map)
            except (TypeError, ValueError):
                raise SpecInvalid("power_map: keys must be integer batch sizes")
            if keys != list(range(len(keys))):
                raise SpecInvalid(f"power_map: keys must be 0..H, got {keys}")
        else:
            pm = tuple(float(p) for p in pm)
        object.__setattr__(self, "power_map", pm)

        problems = []
        if int(self.capacity) != self.capacity or self.capacity < 1:
            problems.append(f"capacity: must be an integer >= 1, got {self.capacity}")
        if not self.processing_time > 0:
            problems.append(f"processing_time: must be > 0, got {self.processing_time}")
        if not self.setup_time > 0:
            problems.append(f"setup_time: must be > 0, got {self.setup_time}")
        if self.inventory_capacity < 0:
            problems.append("inventory_capacity: must be >= 0")
        if not 0 <= self.allocated_inventory <= self.inventory_capacity:
            problems.append(
                f"allocated_inventory: must satisfy 0 <= v <= r "
                f"(v={self.allocated_inventory}, r={self.inventory_capacity})"
            )
        if len(pm) != self.capacity + 1:
            problems.append(
                f"power_map: needs one entry per batch size 0..{self.capacity}, got {len(pm)}"
            )
        if any(p < 0 for p in pm):
            problems.append("power_map: powers must be >= 0")
        if any(b < a for a, b in zip(pm, pm[1:])):
            problems.append("power_map: must be non-decreasing in batch size")
        if problems:
            raise SpecInvalid(problems)

    def power(self, batch: int) -> float:
        return self.power_map[batch]

    def to_dict(self) -> dict:
        return {
            "capacity": self.capacity,
            "processing_time_h": self.processing_time,
            "setup_time_h": self.setup_time,
            "power_mw": list(self.power_map),
            "inventory_capacity": self.inventory_capacity,
            "allocated_inventory": self.allocated_inventory,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "MachineSpec":
        try:
            return cls(
                capacity=int(data["capacity"]),
                processing_time=float(data["processing_time_h"]),
                setup_time=float(data["setup_time_h"]),
                power_map=data["power_mw"],
                inventory_capacity=int(data["inventory_capacity"]),
                allocated_inventory=int(data["allocated_inventory"]),
            )
        except KeyError as exc:
            raise SpecInvalid(f"{exc.args[0]}: missing field") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, SpecInvalid):
                raise
            raise SpecInvalid(f"machine: {exc}") from None


@dataclass(frozen=True)
class Milestone:
    quantity: int
    deadline: float  # hours after T0


@dataclass(frozen=True)
class OrderSpec:
    """Customer demand: cumulative quantities due by deadlines.

    ``total_demand`` defaults to the last milestone's quantity.  It may be
    larger, which models a final quantity without a deadline, and an order
    with no milestones and ``total_demand=0`` is the empty order.
    """

    start_time: float
    milestones: tuple = ()
    total_demand: int | None = None

    def __post_init__(self):
        ms = tuple(
            m if isinstance(m, Milestone) else Milestone(int(m[0]), float(m[1]))
            for m in self.milestones
        )
        object.__setattr__(self, "milestones", ms)
        d = self.total_demand
        if d is None:
            d = ms[-1].quantity if ms else 0
        object.__setattr__(self, "total_demand", int(d))

        problems = []
        for i, m in enumerate(ms):
            if m.quantity < 1:
                problems.append(f"milestones[{i}].quantity: must be >= 1")
            if not m.deadline > 0:
                problems.append(f"milestones[{i}].deadline: must be > 0")
        for i, (a, b) in enumerate(zip(ms, ms[1:]), start=1):
            if b.quantity <= a.quantity or b.deadline <= a.deadline:
                problems.append(
                    f"milestones[{i}]: quantities and deadlines must be strictly increasing"
                )
        if ms and self.total_demand < ms[-1].quantity:
            problems.append("total_demand: smaller than the last milestone quantity")
        if self.total_demand < 0 or (ms and self.total_demand < 1):
            problems.append("total_demand: must be >= 1")
        if problems:
            raise SpecInvalid(problems)

    def to_dict(self) -> dict:
        return {
            "start_h": self.start_time,
            "milestones": [
                {"quantity": m.quantity, "deadline_h": m.deadline} for m in self.milestones
            ],
            "total_demand": self.total_demand,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "OrderSpec":
        try:
            ms = [
                Milestone(int(m["quantity"]), float(m["deadline_h"]))
                for m in data.get("milestones", [])
            ]
            return cls(float(data["start_h"]), tuple(ms), data.get("total_demand"))
        except KeyError as exc:
            raise SpecInvalid(f"{exc.args[0]}: missing field") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, SpecInvalid):
                raise
            raise SpecInvalid(f"order: {exc}") from None


@dataclass(frozen=True)
class ClockConstraint:
    """Global-clock deadline: ``applies_at`` parts by ``bound`` hours after T0."""

    applies_at: int
    bound: float
    kind: str = "global_deadline"


@dataclass(frozen=True)
class ClockState:
    local: float = 0.0
    global_: float = 0.0

    def advance(self, duration: float) -> "ClockState":
        # the local clock is reset by the transition that ends this dwell
        return ClockState(0.0, self.global_ + duration)


@dataclass(frozen=True)
class PtaModel:
    machine: MachineSpec
    order: OrderSpec
    constraints: tuple = ()
    initial_state: int = 0
    _by_state: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        cmap = {}
        for c in self.constraints:
            if not c.bound > 0 or c.applies_at > self.max_state:
                raise SpecInvalid(f"constraint: invalid {c}")
            cmap.setdefault(c.applies_at, []).append(c)
        object.__setattr__(self, "_by_state", cmap)

    @property
    def demand(self) -> int:
        return self.order.total_demand

    @property
    def capacity(self) -> int:
        return self.machine.capacity

    @property
    def max_state(self) -> int:
        return self.order.total_demand + self.machine.allocated_inventory

    @property
    def start_time(self) -> float:
        return self.order.start_time

    @property
    def states(self) -> range:
        return range(self.max_state + 1)

    @property
    def events(self) -> range:
        return range(self.machine.capacity + 1)

    @property
    def marked_states(self) -> frozenset:
        return frozenset(range(self.demand, self.max_state + 1))

    @property
    def constraint_map(self) -> dict:
        return {k: list(v) for k, v in self._by_state.items()}


def _check_event(model: PtaModel, event: int) -> None:
    if not 0 <= event <= model.capacity:
        raise InvalidEvent(f"event {event} outside 0..{model.capacity}")


def _check_state(model: PtaModel, state: int) -> None:
    if not 0 <= state <= model.max_state:
        raise CapacityExceeded(f"state {state} outside 0..{model.max_state}")


def validate_string(events: Iterable[int], last_event: int | None = None) -> ScheduleString:
    """Return ``events`` as a tuple, rejecting two adjacent idle events."""
    s = tuple(int(e) for e in events)
    prev = last_event
    for i, e in enumerate(s):
        if e == 0 and prev == 0:
            raise ConsecutiveIdle(f"two consecutive idle events at position {i}")
        prev = e
    return s


def delta(model: PtaModel, from_state: int, s: Sequence[int]) -> int:
    """Final state reached from ``from_state`` by the string ``s``."""
    _check_state(model, from_state)
    state = from_state
    for e in s:
        _check_event(model, e)
        state += e
        if state > model.max_state:
            raise CapacityExceeded(
                f"state {state} exceeds d+v={model.max_state}"
            )
    return state


def event_duration(model: PtaModel, event: int) -> float:
    _check_event(model, event)
    return model.machine.setup_time if event == 0 else model.machine.processing_time


def transition_timings(model: PtaModel, start_state: int, start_global: float,
                       s: Sequence[int]) -> list:
    """Grid start/end time of each event: ``[(i, T_s, T_e), ...]``."""
    delta(model, start_state, s)
    t0 = model.start_time
    clock = start_global
    out = []
    for i, e in enumerate(s):
        ts = t0 + clock
        clock += event_duration(model, e)
        out.append((i, ts, t0 + clock))
    return out


@dataclass(frozen=True)
class Violation:
    """A missed deadline.

    ``crossing_time`` is the grid time the threshold was first reached, or
    ``None`` when the bound elapsed before the threshold was reached.
    """

    constraint: ClockConstraint
    crossing_time: float | None
    checked_at: float

    def describe(self) -> str:
        c = self.constraint
        where = (
            f"reached at {self.crossing_time:g}"
            if self.crossing_time is not None
            else f"not reached by {self.checked_at:g}"
        )
        return f"milestone {c.applies_at} parts by +{c.bound:g}h {where}"


def pending_constraints(model: PtaModel, state: int) -> list:
    """Constraints whose threshold has not been reached at ``state``."""
    return [c for c in model.constraints if c.applies_at > state]


def check_constraints(model: PtaModel, start_state: int, start_global: float,
                      s: Sequence[int], last_event: int | None = None) -> Violation | None:
    """Return the first deadline ``s`` breaks, or ``None`` if none is broken.

    Constraints at or below ``start_state`` are treated as settled.  A
    deadline counts at the first event that takes the part count to or past
    its threshold; deadlines not yet reached whose bound has not elapsed are
    pending and do not fail the check.
    """
    s = validate_string(s, last_event)
    delta(model, start_state, s)
    t0 = model.start_time
    pending = sorted(pending_constraints(model, start_state), key=lambda c: c.applies_at)
    state, clock = start_state, start_global
    for e in s:
        state += e
        clock += event_duration(model, e)
        while pending and pending[0].applies_at <= state:
            c = pending.pop(0)
            if clock > c.bound + TIME_TOL:
                return Violation(c, t0 + clock, t0 + clock)
    for c in pending:
        if clock > c.bound + TIME_TOL:
            return Violation(c, None, t0 + clock)
    return None


def earliest_completion(model: PtaModel, state: int, global_clock: float,
                        target: int) -> float:
    """Earliest global time at which ``target`` parts can exist, using full batches."""
    if target <= state:
        return global_clock
    n = math.ceil((target - state) / model.capacity)
    return global_clock + n * model.machine.processing_time


def unreachable_constraint(model: PtaModel, state: int,
                           global_clock: float) -> ClockConstraint | None:
    """First pending deadline that cannot be met even with back-to-back full batches."""
    for c in pending_constraints(model, state):
        if earliest_completion(model, state, global_clock, c.applies_at) > c.bound + TIME_TOL:
            return c
    return None


def feasible_events(model: PtaModel, state: int, last_event: int | None = None) -> tuple:
    """Events enabled at ``state``, ascending; empty once production is complete."""
    if is_marked(model, state):
        return ()
    return tuple(
        b for b in model.events
        if state + b <= model.max_state and not (b == 0 and last_event == 0)
    )


def is_marked(model: PtaModel, state: int) -> bool:
    return model.demand <= state <= model.max_state
