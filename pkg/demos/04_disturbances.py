"""
A tariff update mid-run
=======================

At 9:12 the utility announces a one-hour price spike followed by cheap
power. The controller picks the update up at its next decision and drops
to a single part before the spike ends. Whatever already ran keeps its cost.
"""

from pathlib import Path

from dtsched import LookaheadConfig, load_prices
from dtsched.fixtures import case_machine, case_order
from dtsched.planning import load_disturbances
from dtsched.simulate import run_llp

DATA = Path(__file__).parent / "data"
prices = load_prices(DATA / "prices_two_tier.json")
updates = load_disturbances(DATA / "disturbances.json")
cfg = LookaheadConfig(window=2)

plain = run_llp(case_machine(), case_order(), prices, cfg)
hit = run_llp(case_machine(), case_order(), prices, cfg, updates)

for name, log in (("as planned", plain), ("with update", hit)):
    print(f"{name:12s} {list(log.schedule)!s:18s} cost {log.totals.cost:7.2f}")
    for s in log.steps:
        print(f"    {s.start:5.2f}-{s.end:5.2f}h  event {s.event}  cost {s.cost:6.2f}")
