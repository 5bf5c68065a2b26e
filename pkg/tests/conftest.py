import itertools

import numpy as np
import pytest

from dtsched.fixtures import case_machine, case_order, flat_tariff, two_tier_tariff
from dtsched.planning import init_model
from dtsched.tariff import PriceSchedule, Segment

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or rep.when != "call" and not rep.failed:
        return
    key = mark.args[0]
    prev = _ACCEPTANCE.get(key, (mark.args[1], True))
    _ACCEPTANCE[key] = (prev[0], prev[1] and rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE):
        title, ok = _ACCEPTANCE[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {key}. {title}")


@pytest.fixture
def machine():
    return case_machine()


@pytest.fixture
def order():
    return case_order()


@pytest.fixture
def model(machine, order):
    return init_model(machine, order)


@pytest.fixture
def flat50():
    return flat_tariff(50.0)


@pytest.fixture
def two_tier():
    return two_tier_tariff()


def riemann_cost(power, a, b, sched, step=1e-4):
    """Midpoint Riemann sum of power * price over [a, b]."""
    n = max(int(round((b - a) / step)), 1)
    h = (b - a) / n
    mids = a + h * (np.arange(n) + 0.5)
    starts = np.array([s.start for s in sched.segments])
    prices = np.array([s.price for s in sched.segments])
    idx = np.searchsorted(starts, mids, side="right") - 1
    return float(power * prices[idx].sum() * h)


def brute_strings(max_len, capacity):
    """Every string over 0..capacity of length 1..max_len, no filtering."""
    for n in range(1, max_len + 1):
        yield from itertools.product(range(capacity + 1), repeat=n)


def random_tariff(rng, start=8.0, end=32.0, pieces=(2, 6), lo=10.0, hi=120.0, quantum=None):
    """Random piecewise tariff; ``quantum`` snaps breakpoints to a time grid."""
    cuts = sorted(rng.uniform(start, end - 1.0) for _ in range(rng.randint(*pieces)))
    if quantum:
        cuts = sorted({round(c / quantum) * quantum for c in cuts} - {start, end})
    pts = [start] + cuts + [end]
    return PriceSchedule(tuple(
        Segment(a, b, round(rng.uniform(lo, hi), 2)) for a, b in zip(pts, pts[1:]) if b > a
    ))
