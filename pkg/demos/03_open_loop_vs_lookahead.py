"""
How far ahead is far enough?
============================

Open-loop search finds the cheapest complete schedule. A lookahead window
long enough to see the whole order lands on the same schedule; short
windows can be fooled by cheap idles.
"""

from dtsched import LookaheadConfig
from dtsched.decision import cost_J, llp_run, open_loop_optimal
from dtsched.fixtures import case_machine, case_order, flat_tariff, two_tier_tariff
from dtsched.planning import init_model

model = init_model(case_machine(), case_order())

for label, prices in [("flat 50", flat_tariff(50.0)), ("two-tier", two_tier_tariff())]:
    best, j = open_loop_optimal(model, prices)
    print(f"{label}: open loop {list(best)}  J={j:.4f}")
    for w in (1, 2, 3, 4, 2 * model.max_state + 1):
        log = llp_run(model, prices, LookaheadConfig(window=w))
        print(f"  W={w:2d}  {list(log.schedule)!s:20s} J={cost_J(model, log.schedule, prices):.4f}")
