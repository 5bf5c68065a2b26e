"""Schedule costs, limited-lookahead control and exhaustive open-loop search.

The lookahead controller enumerates every string of at most ``W`` events from
the current state, prices each one on the current tariff, discards strings
that break a deadline, and applies the first event of the cheapest one.

Candidate costs follow the windowed average-cost objective: energy spent in
the window divided by the cumulative part count at the window's end (or by
the demand once the demand is met), plus one unit per surplus part.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    Infeasible,
    InfeasibleDeadline,
    NotMarked,
    ReschedulingFailure,
    SpecInvalid,
    ZeroDenominator,
)
from .planning import (
    TARIFF_UPDATE,
    RuntimeContext,
    apply_disturbance,
    due_disturbances,
)
from .pta import (
    TIME_TOL,
    PtaModel,
    check_constraints,
    delta,
    event_duration,
    feasible_events,
    is_marked,
    pending_constraints,
    unreachable_constraint,
    validate_string,
)
from .records import (
    COMPLETED,
    RESCHEDULING_FAILURE,
    Candidate,
    DecisionRecord,
    RunLog,
    RunTotals,
    StepRecord,
)
from .tariff import PriceSchedule, price_pieces, string_energy_cost, transition_energy_cost

LARGEST_FIRST = "largest-first-event"
LEXICOGRAPHIC = "lexicographic-largest"

#: Relative tolerance under which two costs count as a tie.
COST_RTOL = 1e-9

CONSTRAINT_VIOLATION = "constraint_violation"
ZERO_DENOMINATOR = "zero_denominator"
UNREACHABLE_MILESTONE = "unreachable_milestone"


@dataclass(frozen=True)
class LookaheadConfig:
    """Controller settings.

    ``prefer_marked`` restricts the argmin to strings that complete the order
    whenever at least one such string is valid in the window.
    """

    window: int = 2
    prune_infeasible_futures: bool = True
    tie_break: str = LARGEST_FIRST
    prefer_marked: bool = True

    def __post_init__(self):
        if int(self.window) != self.window or self.window < 1:
            raise SpecInvalid(f"window: must be an integer >= 1, got {self.window}")
        if self.tie_break not in (LARGEST_FIRST, LEXICOGRAPHIC):
            raise SpecInvalid(f"tie_break: unknown rule {self.tie_break!r}")

    def to_dict(self) -> dict:
        return {
            "window": self.window,
            "prune_infeasible_futures": self.prune_infeasible_futures,
            "tie_break": self.tie_break,
            "prefer_marked": self.prefer_marked,
        }


def indicator_xi(model: PtaModel, terminal_state: int) -> int:
    return 1 if is_marked(model, terminal_state) else 0


def _window_cost(model: PtaModel, terminal: int, tp: float) -> float:
    xi = indicator_xi(model, terminal)
    denom = (1 - xi) * terminal + xi * model.demand
    if denom == 0:
        raise ZeroDenominator(f"average cost undefined at terminal state {terminal}")
    return tp / denom + xi * (terminal - model.demand)


def cost_J(model: PtaModel, s, sched: PriceSchedule, start_global: float = 0.0) -> float:
    """Average energy cost per demanded part plus the inventory surplus."""
    terminal = delta(model, 0, s)
    if not is_marked(model, terminal):
        raise NotMarked(f"string ends in q{terminal}, demand is {model.demand}")
    if model.demand == 0:
        return float(terminal)
    tp = string_energy_cost(model, 0, start_global, s, sched).total
    return tp / model.demand + (terminal - model.demand)


def cost_J_prime(model: PtaModel, from_state: int, s, sched: PriceSchedule,
                 start_global: float) -> float:
    """Windowed cost of ``s`` played from ``from_state`` at ``start_global``.

    Only the energy of ``s`` itself is counted; the terminal part count is
    cumulative.  Raises :class:`ZeroDenominator` for a window that ends
    with nothing produced.
    """
    terminal = delta(model, from_state, s)
    tp = string_energy_cost(model, from_state, start_global, s, sched).total
    return _window_cost(model, terminal, tp)


def lookahead_tree(model: PtaModel, from_state: int, last_event: int | None,
                   window: int) -> set:
    """Every non-empty string of at most ``window`` feasible events.

    Strings stop growing once they reach a marked state.
    """
    out = set()

    def grow(prefix, state, last):
        for e in feasible_events(model, state, last):
            s = prefix + (e,)
            out.add(s)
            if len(s) < window and not is_marked(model, state + e):
                grow(s, state + e, e)

    if not is_marked(model, from_state):
        grow((), from_state, last_event)
    return out


def evaluate_candidate(model: PtaModel, from_state: int, last_event: int | None,
                       start_global: float, s, sched: PriceSchedule,
                       prune: bool = True) -> Candidate:
    """Score one string independently of the tree walk used by :func:`llp_step`."""
    s = validate_string(s, last_event)
    terminal = delta(model, from_state, s)
    if check_constraints(model, from_state, start_global, s) is not None:
        return Candidate(s, terminal, None, CONSTRAINT_VIOLATION)
    try:
        cost = cost_J_prime(model, from_state, s, sched, start_global)
    except ZeroDenominator:
        return Candidate(s, terminal, None, ZERO_DENOMINATOR)
    if prune:
        clock = start_global
        for e in s:
            clock += event_duration(model, e)
        if unreachable_constraint(model, terminal, clock) is not None:
            return Candidate(s, terminal, None, UNREACHABLE_MILESTONE)
    return Candidate(s, terminal, cost)


def _walk_tree(model, from_state, last_event, start_global, window, sched, prune):
    """Score the whole lookahead tree, sharing prefix work between strings.

    Yields candidates in depth-first order with events ascending, which is
    the order ``sorted(lookahead_tree(...))`` would give.
    """
    t0 = model.start_time
    power = model.machine.power_map
    pending = sorted(pending_constraints(model, from_state), key=lambda c: c.applies_at)
    out = []

    def visit(prefix, state, clock, last, tp, nxt, violated):
        for e in feasible_events(model, state, last):
            s = prefix + (e,)
            new_state = state + e
            new_clock = clock + event_duration(model, e)
            reason = CONSTRAINT_VIOLATION if violated else None
            j = nxt
            if reason is None:
                while j < len(pending) and pending[j].applies_at <= new_state:
                    if new_clock > pending[j].bound + TIME_TOL:
                        reason = CONSTRAINT_VIOLATION
                        break
                    j += 1
            if reason is None and any(new_clock > c.bound + TIME_TOL for c in pending[j:]):
                reason = CONSTRAINT_VIOLATION
            new_tp = None
            cost = None
            if reason is None:
                new_tp = tp + transition_energy_cost(power[e], t0 + clock, t0 + new_clock, sched)
                try:
                    cost = _window_cost(model, new_state, new_tp)
                except ZeroDenominator:
                    reason = ZERO_DENOMINATOR
                    cost = None
                if cost is not None and prune and (
                    unreachable_constraint(model, new_state, new_clock) is not None
                ):
                    reason = UNREACHABLE_MILESTONE
                    cost = None
            out.append(Candidate(s, new_state, cost, reason))
            if len(s) < window and not is_marked(model, new_state):
                visit(s, new_state, new_clock, e, new_tp, j,
                      reason == CONSTRAINT_VIOLATION)

    if not is_marked(model, from_state):
        visit((), from_state, start_global, last_event, 0.0, 0, False)
    return out


def _tie_key(s: tuple, rule: str):
    if rule == LARGEST_FIRST:
        return (s[0], s)
    return s


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= COST_RTOL * max(abs(a), abs(b)) + 1e-15


def select_candidate(model: PtaModel, candidates, tie_break: str = LARGEST_FIRST,
                     prefer_marked: bool = True) -> Candidate | None:
    """Cheapest valid candidate; near-equal costs are settled by ``tie_break``."""
    pool = [c for c in candidates if c.valid]
    if prefer_marked:
        pool = [c for c in pool if is_marked(model, c.terminal_state)] or pool
    if not pool:
        return None
    best = min(c.cost for c in pool)
    tied = [c for c in pool if _close(c.cost, best)]
    return max(tied, key=lambda c: _tie_key(c.string, tie_break))


def llp_step(model: PtaModel, from_state: int, last_event: int | None,
             global_clock: float, sched: PriceSchedule,
             cfg: LookaheadConfig) -> DecisionRecord:
    """One receding-horizon decision.

    Raises :class:`ReschedulingFailure` (carrying the record) when no
    candidate in the window is valid.
    """
    if is_marked(model, from_state):
        raise SpecInvalid(f"state q{from_state} is already marked")
    cands = tuple(_walk_tree(model, from_state, last_event, global_clock, cfg.window,
                             sched, cfg.prune_infeasible_futures))
    best = select_candidate(model, cands, cfg.tie_break, cfg.prefer_marked)
    if best is None:
        rec = DecisionRecord(from_state, global_clock, cands, None)
        raise ReschedulingFailure(
            f"no valid schedule from q{from_state} at +{global_clock:g}h", record=rec
        )
    return DecisionRecord(from_state, global_clock, cands, best.string[0], best.string)


def run_meta(mode: str, model: PtaModel, sched: PriceSchedule, config=None,
             disturbances=()) -> dict:
    return {
        "mode": mode,
        "machine": model.machine.to_dict(),
        "order": model.order.to_dict(),
        "tariff_digest": sched.digest(),
        "config": config,
        "start_h": model.start_time,
        "disturbances": [d.to_dict() for d in disturbances],
    }


def execute_event(ctx: RuntimeContext, index: int, event: int,
                  decision: DecisionRecord | None = None):
    """Run one event from ``ctx``; returns ``(step, ctx_after)``.

    Tariff updates dated inside the event re-price the rest of it.
    """
    model = ctx.model
    dur = event_duration(model, event)
    ts = model.start_time + ctx.global_clock
    te = model.start_time + (ctx.global_clock + dur)
    due, ctx = due_disturbances(ctx, te, kinds=(TARIFF_UPDATE,))
    for d in due:
        ctx = apply_disturbance(ctx, d)
    power = model.machine.power(event)
    step = StepRecord(
        index=index,
        start=ts,
        end=te,
        state_before=ctx.current_state,
        state_after=ctx.current_state + event,
        event=event,
        power_mw=power,
        energy_mwh=power * dur,
        cost=transition_energy_cost(power, ts, te, ctx.prices),
        price_pieces=tuple(price_pieces(ctx.prices, ts, te)),
        decision=decision,
    )
    return step, ctx.advanced(event, dur)


def llp_run(model: PtaModel, sched: PriceSchedule, cfg: LookaheadConfig,
            disturbances=(), context: RuntimeContext | None = None) -> RunLog:
    """Closed-loop lookahead control until the order is complete.

    ``context`` starts the controller mid-run (state, last event, clock);
    by default it starts at q0 with the global clock at zero.
    """
    if context is None:
        context = RuntimeContext.start(model, sched, disturbances)
    ctx = context
    meta = run_meta("llp", ctx.model, ctx.prices, cfg.to_dict(), ctx.pending_disturbances)
    start_state, start_time = ctx.current_state, ctx.now
    steps = []
    while True:
        due, ctx = due_disturbances(ctx, ctx.now)
        for d in due:
            ctx = apply_disturbance(ctx, d)
        if is_marked(ctx.model, ctx.current_state):
            break
        try:
            rec = llp_step(ctx.model, ctx.current_state, ctx.last_event,
                           ctx.global_clock, ctx.prices, cfg)
        except ReschedulingFailure as exc:
            exc.log = RunLog(meta, tuple(steps),
                             RunTotals.fold(steps, start_state, start_time),
                             RESCHEDULING_FAILURE, str(exc),
                             {"failed_decision": exc.record.to_dict()})
            raise
        step, ctx = execute_event(ctx, len(steps), rec.chosen_event, rec)
        steps.append(step)
    return RunLog(meta, tuple(steps), RunTotals.fold(steps, start_state, start_time), COMPLETED)


def open_loop_optimal(model: PtaModel, sched: PriceSchedule, start_global: float = 0.0,
                      tie_break: str = LARGEST_FIRST):
    """Minimum-cost complete schedule by depth-first branch and bound.

    Branches are cut when they break or can no longer meet a deadline, or
    when their sunk energy alone already exceeds the incumbent.  Search ends
    at marked states, so no returned string ends with an idle.
    Returns ``(schedule, cost)``.
    """
    d = model.demand
    if is_marked(model, 0):
        return (), cost_J(model, (), sched, start_global)
    t0 = model.start_time
    power = model.machine.power_map
    pending = sorted(model.constraints, key=lambda c: c.applies_at)
    complete = []
    best = [float("inf")]

    def visit(prefix, state, clock, last, tp, nxt):
        for e in feasible_events(model, state, last):
            new_state = state + e
            new_clock = clock + event_duration(model, e)
            j = nxt
            late = False
            while j < len(pending) and pending[j].applies_at <= new_state:
                if new_clock > pending[j].bound + TIME_TOL:
                    late = True
                    break
                j += 1
            if late or unreachable_constraint(model, new_state, new_clock) is not None:
                continue
            new_tp = tp + transition_energy_cost(power[e], t0 + clock, t0 + new_clock, sched)
            s = prefix + (e,)
            if is_marked(model, new_state):
                j_cost = new_tp / d + (new_state - d)
                complete.append(Candidate(s, new_state, j_cost))
                best[0] = min(best[0], j_cost)
                continue
            lower = new_tp / d
            if lower > best[0] and not _close(lower, best[0]):
                continue
            visit(s, new_state, new_clock, e, new_tp, j)

    visit((), 0, start_global, None, 0.0, 0)
    choice = select_candidate(model, complete, tie_break, prefer_marked=False)
    if choice is None:
        raise Infeasible(f"no schedule reaches q{d}..q{model.max_state} within the deadlines")
    return choice.string, choice.cost


def benchmark_schedule(model: PtaModel) -> tuple:
    """Utilization-first schedule: full batches, then one remainder batch."""
    d, h = model.demand, model.capacity
    s = (h,) * (d // h) + ((d % h,) if d % h else ())
    v = check_constraints(model, 0, 0.0, s)
    if v is not None:
        raise InfeasibleDeadline(f"benchmark {list(s)} misses {v.describe()}")
    return s
