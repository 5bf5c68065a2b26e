"""Model construction and runtime updates (tariff and order changes)."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Mapping

from .errors import RetroactiveUpdate, SpecInvalid
from .pta import TIME_TOL, ClockConstraint, MachineSpec, OrderSpec, PtaModel
from .tariff import PriceSchedule, splice_prices

TARIFF_UPDATE = "tariff_update"
ORDER_UPDATE = "order_update"


def init_model(machine: MachineSpec, order: OrderSpec) -> PtaModel:
    """Build the automaton for ``order`` on ``machine``.

    Each milestone becomes a global-clock deadline at its cumulative quantity.
    """
    if not isinstance(machine, MachineSpec):
        raise SpecInvalid("machine: expected MachineSpec")
    if not isinstance(order, OrderSpec):
        raise SpecInvalid("order: expected OrderSpec")
    constraints = tuple(ClockConstraint(m.quantity, m.deadline) for m in order.milestones)
    return PtaModel(machine, order, constraints)


@dataclass(frozen=True)
class Disturbance:
    at: float  # grid hours
    kind: str
    prices: PriceSchedule | None = None
    order: OrderSpec | None = None

    def __post_init__(self):
        if self.kind == TARIFF_UPDATE and self.prices is None:
            raise SpecInvalid("disturbance: tariff_update needs segments")
        if self.kind == ORDER_UPDATE and self.order is None:
            raise SpecInvalid("disturbance: order_update needs an order")
        if self.kind not in (TARIFF_UPDATE, ORDER_UPDATE):
            raise SpecInvalid(f"disturbance.kind: unknown kind {self.kind!r}")

    @classmethod
    def tariff(cls, at: float, prices: PriceSchedule) -> "Disturbance":
        return cls(at, TARIFF_UPDATE, prices=prices)

    @classmethod
    def order_change(cls, at: float, order: OrderSpec) -> "Disturbance":
        return cls(at, ORDER_UPDATE, order=order)

    def to_dict(self) -> dict:
        d = {"at_h": self.at, "kind": self.kind}
        if self.kind == TARIFF_UPDATE:
            d.update(self.prices.to_dict())
        else:
            d["order"] = self.order.to_dict()
        return d

    @classmethod
    def from_dict(cls, data: Mapping) -> "Disturbance":
        try:
            at, kind = float(data["at_h"]), data["kind"]
        except (KeyError, TypeError, ValueError):
            raise SpecInvalid("disturbance: needs numeric at_h and a kind") from None
        if kind == TARIFF_UPDATE:
            return cls.tariff(at, PriceSchedule.from_dict(data))
        if kind == ORDER_UPDATE:
            return cls.order_change(at, OrderSpec.from_dict(data.get("order", {})))
        raise SpecInvalid(f"disturbance.kind: unknown kind {kind!r}")


def load_disturbances(path) -> list:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    items = data.get("disturbances") if isinstance(data, Mapping) else None
    if not isinstance(items, list):
        raise SpecInvalid("disturbances: expected a list")
    out = []
    for i, item in enumerate(items):
        try:
            out.append(Disturbance.from_dict(item))
        except SpecInvalid as exc:
            raise SpecInvalid([f"disturbances[{i}].{p}" for p in exc.problems]) from None
    return out


@dataclass(frozen=True)
class RuntimeContext:
    model: PtaModel
    prices: PriceSchedule
    current_state: int = 0
    last_event: int | None = None
    global_clock: float = 0.0
    pending_disturbances: tuple = ()

    @classmethod
    def start(cls, model, prices, disturbances=(), state=0, last_event=None,
              global_clock=0.0) -> "RuntimeContext":
        pending = tuple(sorted(disturbances, key=lambda d: d.at))  # stable
        return cls(model, prices, state, last_event, global_clock, pending)

    @property
    def now(self) -> float:
        return self.model.start_time + self.global_clock

    def advanced(self, event: int, duration: float) -> "RuntimeContext":
        return replace(
            self,
            current_state=self.current_state + event,
            last_event=event,
            global_clock=self.global_clock + duration,
        )


def _rebuild_for_order(ctx: RuntimeContext, order: OrderSpec) -> PtaModel:
    old = ctx.model.order
    problems = []
    if abs(order.start_time - old.start_time) > TIME_TOL:
        problems.append("order.start_h: cannot move the order start at runtime")
    crossed = [m for m in old.milestones if m.quantity <= ctx.current_state]
    for m in crossed:
        if m not in order.milestones:
            problems.append(
                f"order.milestones: settled milestone ({m.quantity}, {m.deadline}h) was changed"
            )
    new_max = order.total_demand + ctx.model.machine.allocated_inventory
    if ctx.current_state > new_max:
        problems.append(
            f"order.total_demand: {ctx.current_state} parts already exceed d+v={new_max}"
        )
    if problems:
        raise SpecInvalid(problems)
    return init_model(ctx.model.machine, order)


def apply_disturbance(ctx: RuntimeContext, dist: Disturbance) -> RuntimeContext:
    """Return ``ctx`` updated by ``dist``; state and clocks are kept.

    Disturbances dated before ``ctx.now`` (the start of the event in flight,
    or the current decision boundary) would rewrite billed history.
    """
    if dist.at < ctx.now - TIME_TOL:
        raise RetroactiveUpdate(f"disturbance at {dist.at} precedes executed time {ctx.now}")
    if dist.kind == TARIFF_UPDATE:
        return replace(ctx, prices=splice_prices(ctx.prices, dist.prices, dist.at))
    return replace(ctx, model=_rebuild_for_order(ctx, dist.order))


def due_disturbances(ctx: RuntimeContext, now: float, kinds=None) -> tuple:
    """Pop every pending disturbance with ``at <= now``, in time order.

    ``kinds`` limits the drain to those disturbance kinds.
    """

    def is_due(d):
        return d.at <= now + TIME_TOL and (kinds is None or d.kind in kinds)

    due = tuple(d for d in ctx.pending_disturbances if is_due(d))
    if not due:
        return [], ctx
    rest = tuple(d for d in ctx.pending_disturbances if not is_due(d))
    return list(due), replace(ctx, pending_disturbances=rest)
