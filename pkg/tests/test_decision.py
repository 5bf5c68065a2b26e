import itertools
import random

import pytest

from dtsched.decision import (
    CONSTRAINT_VIOLATION,
    LARGEST_FIRST,
    LEXICOGRAPHIC,
    UNREACHABLE_MILESTONE,
    ZERO_DENOMINATOR,
    LookaheadConfig,
    _walk_tree,
    benchmark_schedule,
    cost_J,
    cost_J_prime,
    evaluate_candidate,
    indicator_xi,
    llp_run,
    llp_step,
    lookahead_tree,
    open_loop_optimal,
)
from dtsched.errors import (
    Infeasible,
    InfeasibleDeadline,
    NotMarked,
    ReschedulingFailure,
    SpecInvalid,
    ZeroDenominator,
)
from dtsched.fixtures import flat_tariff
from dtsched.planning import init_model
from dtsched.pta import (
    MachineSpec,
    OrderSpec,
    check_constraints,
    delta,
    feasible_events,
    is_marked,
)
from dtsched.tariff import PriceSchedule, Segment, string_energy_cost

from .conftest import brute_strings, random_tariff


def complete_strings(model, state=0, prefix=(), last=None):
    """All strings that stop at the first marked state, no deadline filtering."""
    for e in range(model.capacity + 1):
        if e == 0 and last == 0 or state + e > model.max_state:
            continue
        s = prefix + (e,)
        if is_marked(model, state + e):
            yield s
        else:
            yield from complete_strings(model, state + e, s, e)


def brute_optimum(model, sched):
    """(min cost, all strings within 1e-9 of it) by plain enumeration."""
    scored = []
    for s in complete_strings(model):
        if check_constraints(model, 0, 0.0, s) is None:
            tp = string_energy_cost(model, 0, 0.0, s, sched).total
            scored.append((tp / model.demand + delta(model, 0, s) - model.demand, s))
    if not scored:
        return None, set()
    best = min(c for c, _ in scored)
    return best, {s for c, s in scored if abs(c - best) <= 1e-9 * max(1, best)}


class TestCosts:
    def test_cost_J_exact_demand(self, model):
        sched = flat_tariff(100.0)
        s = (2, 2, 2, 1)
        assert string_energy_cost(model, 0, 0.0, s, sched).total == pytest.approx(380.0)
        assert cost_J(model, s, sched) == pytest.approx(380.0 / 7, abs=1e-9)

    def test_cost_J_surplus(self, model):
        sched = flat_tariff(95.0)
        s = (2, 2, 2, 2)
        assert string_energy_cost(model, 0, 0.0, s, sched).total == pytest.approx(380.0)
        assert cost_J(model, s, sched) == pytest.approx(380.0 / 7 + 1, abs=1e-9)

    def test_cost_J_not_marked(self, model, flat50):
        with pytest.raises(NotMarked):
            cost_J(model, (2, 2, 2), flat50)

    def test_xi(self, model):
        assert indicator_xi(model, 7) == 1
        assert indicator_xi(model, 5) == 0
        assert indicator_xi(model, 8) == 1

    def test_J_prime_zero_denominator(self, model, flat50):
        with pytest.raises(ZeroDenominator):
            cost_J_prime(model, 0, (0,), flat50, 0.0)

    def test_J_prime_reaching_demand(self, model):
        assert cost_J_prime(model, 5, (2,), flat_tariff(60.0), 3.0) == pytest.approx(60 / 7)

    def test_J_prime_partial(self, model, flat50):
        assert cost_J_prime(model, 0, (2,), flat50, 0.0) == pytest.approx(25.0)

    def test_J_prime_window_only_energy(self, model, flat50):
        # the same window costs the same wherever the sunk prefix came from
        assert cost_J_prime(model, 4, (2,), flat50, 2.0) == pytest.approx(50 / 6)


def brute_tree(model, state, last, window):
    out = set()
    for s in brute_strings(window, model.capacity):
        if any(a == 0 and b == 0 for a, b in zip((last,) + s, s)):
            continue
        counts = list(itertools.accumulate(s, initial=state))
        if counts[-1] > model.max_state:
            continue
        # nothing may follow a marked state
        if any(is_marked(model, c) for c in counts[1:-1]):
            continue
        out.add(s)
    return out


class TestLookaheadTree:
    def test_from_q0(self, model):
        tree = lookahead_tree(model, 0, None, 2)
        assert tree == brute_tree(model, 0, None, 2)
        assert len(tree) == 11
        assert (0, 0) not in tree

    def test_truncates_at_marked(self, model):
        tree = lookahead_tree(model, 6, 2, 2)
        assert tree == brute_tree(model, 6, 2, 2)
        assert tree == {(0,), (1,), (2,), (0, 1), (0, 2)}

    def test_single_step(self, model):
        assert lookahead_tree(model, 0, None, 1) == {(0,), (1,), (2,)}

    def test_idle_history(self, model):
        assert lookahead_tree(model, 3, 0, 1) == {(1,), (2,)}

    @pytest.mark.parametrize("state,last,w", [(0, None, 4), (3, 0, 3), (5, 1, 5), (2, 2, 6)])
    def test_matches_enumeration(self, model, state, last, w):
        assert lookahead_tree(model, state, last, w) == brute_tree(model, state, last, w)


class TestTreeWalk:
    """The shared-prefix tree walk agrees with scoring each string on its own."""

    @pytest.mark.parametrize("seed", range(12))
    def test_against_reference(self, seed):
        rng = random.Random(seed)
        h = rng.choice([2, 3])
        m = MachineSpec(h, 1.0, 0.2, [0.5] + [0.5 + 0.25 * b for b in range(1, h + 1)], 2,
                        rng.choice([0, 1]))
        d = rng.randint(3, 7)
        ms = ((rng.randint(1, d - 1), rng.choice([1.0, 1.5, 2.5])), (d, rng.uniform(3, 6)))
        model = init_model(m, OrderSpec(8.0, ms))
        sched = random_tariff(rng)
        state = rng.randint(0, d - 1)
        last = rng.choice([None, 0, 1])
        clock = rng.uniform(0, 2)
        prune = rng.random() < 0.7
        w = rng.randint(1, 5)
        walked = _walk_tree(model, state, last, clock, w, sched, prune)
        assert [c.string for c in walked] == sorted(lookahead_tree(model, state, last, w))
        for c in walked:
            ref = evaluate_candidate(model, state, last, clock, c.string, sched, prune)
            assert (c.terminal_state, c.reason) == (ref.terminal_state, ref.reason)
            if c.valid:
                assert c.cost == pytest.approx(ref.cost, rel=1e-12)


class TestLlpStep:
    def test_case_first_decision(self, model, two_tier):
        rec = llp_step(model, 0, None, 0.0, two_tier, LookaheadConfig(2))
        assert rec.chosen_event == 2
        first_events = {c.string[0] for c in rec.candidates if c.valid}
        assert first_events == {2}
        reasons = {c.string: c.reason for c in rec.candidates}
        assert reasons[(0,)] == ZERO_DENOMINATOR
        assert reasons[(1,)] == UNREACHABLE_MILESTONE
        assert reasons[(1, 2)] == CONSTRAINT_VIOLATION

    def test_all_deadlines_gone(self, model, flat50):
        with pytest.raises(ReschedulingFailure) as exc:
            llp_step(model, 1, 1, 1.0, flat50, LookaheadConfig(2))
        assert exc.value.record.chosen_event is None

    def test_flat_tariff_near_completion(self, model, flat50):
        rec = llp_step(model, 5, 1, 3.0, flat50, LookaheadConfig(2))
        assert rec.chosen_event == 2
        # oracle: score every tree string independently, take the cheapest
        # string that completes the order
        scored = [evaluate_candidate(model, 5, 1, 3.0, s, flat50)
                  for s in lookahead_tree(model, 5, 1, 2)]
        done = [c for c in scored if c.valid and is_marked(model, c.terminal_state)]
        assert min(done, key=lambda c: c.cost).string == (2,)

    def test_rejects_marked_state(self, model, flat50):
        with pytest.raises(SpecInvalid):
            llp_step(model, 7, 2, 4.0, flat50, LookaheadConfig(2))

    def test_chosen_event_is_feasible(self, model):
        rng = random.Random(3)
        for _ in range(40):
            sched = random_tariff(rng)
            state = rng.randint(2, 6)
            last = rng.choice([0, 1, 2])
            cfg = LookaheadConfig(rng.randint(1, 3), tie_break=rng.choice([LARGEST_FIRST, LEXICOGRAPHIC]))
            try:
                rec = llp_step(model, state, last, 1.0 + 0.2 * rng.randint(0, 5), sched, cfg)
            except ReschedulingFailure:
                continue
            assert rec.chosen_event in feasible_events(model, state, last)


def test_argmin_invariant_under_price_scaling():
    """Scaling prices leaves the choice alone when no candidate completes the order."""
    rng = random.Random(17)
    m = MachineSpec(3, 1.0, 0.2, (0.5, 0.7, 0.9, 1.1), 2, 1)
    checked = 0
    for _ in range(60):
        model = init_model(m, OrderSpec(8.0, (), 12))
        sched = random_tariff(rng)
        state = rng.randint(0, 2)
        w = rng.randint(1, 3)
        tree = lookahead_tree(model, state, None, w)
        assert all(not is_marked(model, delta(model, state, s)) for s in tree)
        cfg = LookaheadConfig(w)
        base = llp_step(model, state, None, 0.0, sched, cfg)
        k = rng.uniform(0.1, 20.0)
        scaled = llp_step(model, state, None, 0.0, sched.scaled(k), cfg)
        assert scaled.chosen_event == base.chosen_event
        for a, b in zip(base.candidates, scaled.candidates):
            if a.valid:
                assert b.cost == pytest.approx(k * a.cost, rel=1e-9)
        checked += 1
    assert checked == 60


class TestOpenLoop:
    def test_flat_case(self, model, flat50):
        s, cost = open_loop_optimal(model, flat50)
        best, argmins = brute_optimum(model, flat50)
        assert cost == pytest.approx(best, abs=1e-9)
        assert cost == pytest.approx(190.0 / 7, abs=1e-9)
        assert set(argmins) >= {(2, 2, 2, 1), (2, 2, 1, 2), (2, 1, 2, 2)}
        assert s == (2, 2, 2, 1)

    def test_single_batch(self):
        m = MachineSpec(2, 1.0, 0.2, (0.5, 0.8, 1.0), 1, 0)
        model = init_model(m, OrderSpec(8.0, (), 2))
        assert open_loop_optimal(model, flat_tariff(50.0))[0] == (2,)

    def test_leading_idle_pays_off(self):
        m = MachineSpec(2, 1.0, 0.2, (0.5, 0.8, 1.0), 1, 0)
        # the deadline leaves room for exactly one set-up before the batch
        model = init_model(m, OrderSpec(8.0, ((2, 1.2),)))
        sched = PriceSchedule((Segment(8, 9, 1000.0), Segment(9, 20, 10.0)))
        s, cost = open_loop_optimal(model, sched)
        best, argmins = brute_optimum(model, sched)
        assert s == (0, 2) and argmins == {(0, 2)}
        assert cost == pytest.approx(best, abs=1e-9)
        assert cost < cost_J(model, (2,), sched)

    def test_infeasible(self, machine):
        model = init_model(machine, OrderSpec(8.0, ((7, 2.0),)))
        with pytest.raises(Infeasible):
            open_loop_optimal(model, flat_tariff())

    @pytest.mark.parametrize("seed", range(8))
    def test_random_against_enumeration(self, seed):
        rng = random.Random(100 + seed)
        h = rng.choice([2, 3])
        m = MachineSpec(h, 1.0, 0.2, [0.5] + [0.5 + 0.3 * b for b in range(1, h + 1)], 2,
                        rng.choice([0, 1]))
        d = rng.randint(3, 6)
        ms = ((rng.randint(1, d - 1), rng.choice([1.0, 2.0, 3.0])),) if rng.random() < 0.5 else ()
        model = init_model(m, OrderSpec(8.0, ms, d))
        sched = random_tariff(rng)
        best, argmins = brute_optimum(model, sched)
        if best is None:
            with pytest.raises(Infeasible):
                open_loop_optimal(model, sched)
            return
        s, cost = open_loop_optimal(model, sched)
        assert cost == pytest.approx(best, abs=1e-9)
        assert s in argmins
        assert s == max(argmins, key=lambda x: (x[0], x))

    def test_extensions_never_cheaper(self, model, two_tier):
        # strings that run on past the first marked state cost at least as much
        s, cost = open_loop_optimal(model, two_tier)
        for t in complete_strings(model):
            if delta(model, 0, t) == 8:
                continue
            for e in feasible_events(model, 7, t[-1]) if delta(model, 0, t) == 7 else ():
                longer = t + (e,)
                if check_constraints(model, 0, 0.0, longer) is None:
                    assert cost_J(model, longer, two_tier) >= cost - 1e-9


class TestBenchmark:
    def _model(self, d, h):
        m = MachineSpec(h, 1.0, 0.2, [0.5] + [1.0] * h, 1, 0)
        return init_model(m, OrderSpec(0.0, (), d))

    def test_case(self, model):
        assert benchmark_schedule(model) == (2, 2, 2, 1)

    def test_even(self):
        assert benchmark_schedule(self._model(4, 2)) == (2, 2)

    def test_under_capacity(self):
        assert benchmark_schedule(self._model(3, 5)) == (3,)

    def test_deadline_missed(self, machine):
        model = init_model(machine, OrderSpec(8.0, ((7, 3.0),)))
        with pytest.raises(InfeasibleDeadline):
            benchmark_schedule(model)


class TestLlpRun:
    def test_case_two_tier(self, model, two_tier):
        log = llp_run(model, two_tier, LookaheadConfig(2))
        assert log.outcome == "completed"
        assert 4 <= len(log.schedule) <= 5
        assert log.steps[-1].state_after in (7, 8)
        assert log.totals.end_time <= 13.0 + 1e-9
        assert check_constraints(model, 0, 0.0, log.schedule) is None

    def test_zero_demand(self, machine, flat50):
        model = init_model(machine, OrderSpec(8.0, (), 0))
        log = llp_run(model, flat50, LookaheadConfig(2))
        assert log.steps == () and log.outcome == "completed"

    def test_deterministic(self, model, two_tier):
        a = llp_run(model, two_tier, LookaheadConfig(3))
        b = llp_run(model, two_tier, LookaheadConfig(3))
        assert a.to_json() == b.to_json()

    def test_failure_keeps_partial_log(self, machine, flat50):
        # milestone at 6 parts by 3.2 h; window 1 idles first and paints itself in
        model = init_model(machine, OrderSpec(8.0, ((6, 3.2), (7, 5.0))))
        cfg = LookaheadConfig(1, prune_infeasible_futures=False)
        with pytest.raises(ReschedulingFailure) as exc:
            llp_run(model, flat50, cfg)
        log = exc.value.log
        assert log.outcome == "rescheduling_failure"
        assert len(log.steps) >= 1
        assert "failed_decision" in log.extra

    @pytest.mark.parametrize("seed", range(6))
    def test_runs_satisfy_constraints(self, seed):
        rng = random.Random(seed)
        m = MachineSpec(2, 1.0, 0.2, (0.5, 0.8, 1.0), 3, 1)
        model = init_model(m, OrderSpec(8.0, ((2, 1.0 + rng.random()), (7, 5.0 + rng.random()))))
        sched = random_tariff(rng)
        try:
            log = llp_run(model, sched, LookaheadConfig(rng.randint(1, 4)))
        except ReschedulingFailure:
            return
        assert is_marked(model, log.steps[-1].state_after)
        assert check_constraints(model, 0, 0.0, log.schedule) is None
