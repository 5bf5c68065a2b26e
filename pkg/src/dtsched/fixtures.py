"""Case-study machine and order, plus synthetic tariffs.

The tariffs are made up: no grid price data ships with the package.
"""

from __future__ import annotations

from .pta import MachineSpec, Milestone, OrderSpec
from .tariff import PriceSchedule, Segment


def case_machine() -> MachineSpec:
    """Two-part coater: 1 h batches, 0.2 h set-up, 0.5/0.8/1.0 MW."""
    return MachineSpec(
        capacity=2,
        processing_time=1.0,
        setup_time=0.2,
        power_map=(0.5, 0.8, 1.0),
        inventory_capacity=3,
        allocated_inventory=1,
    )


def case_order(start: float = 8.0) -> OrderSpec:
    """2 parts within 1 h, 7 parts within 5 h."""
    return OrderSpec(start, (Milestone(2, 1.0), Milestone(7, 5.0)))


def flat_tariff(price: float = 50.0, start: float = 0.0, end: float = 24.0) -> PriceSchedule:
    return PriceSchedule.flat(start, end, price)


def two_tier_tariff(peak: float = 100.0, off_peak: float = 20.0) -> PriceSchedule:
    """Synthetic: ``peak`` from 8:00 to 10:00, ``off_peak`` from 10:00 to 20:00."""
    return PriceSchedule((Segment(8.0, 10.0, peak), Segment(10.0, 20.0, off_peak)))
