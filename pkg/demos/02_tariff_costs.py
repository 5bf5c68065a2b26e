"""
Pricing a transition under a piecewise tariff
=============================================

The exact integral splits an interval at the tariff breakpoints. A fine
Riemann sum lands on the same number.
"""

import numpy as np

from dtsched.tariff import PriceSchedule, Segment, price_pieces, transition_energy_cost

step = PriceSchedule((Segment(8, 9, 50), Segment(9, 10, 100)))

print(transition_energy_cost(1.0, 8.5, 9.5, step))  # 0.5 h at 50, 0.5 h at 100
print(price_pieces(step, 8.5, 9.5))

# midpoint sum on a 1e-4 h grid
a, b, h = 8.5, 9.5, 1e-4
mids = np.arange(a + h / 2, b, h)
starts = np.array([s.start for s in step.segments])
rates = np.array([s.price for s in step.segments])
approx = (rates[np.searchsorted(starts, mids, side="right") - 1] * h).sum()
print(approx)

# a 0.2 h idle dwell at 0.5 MW
print(transition_energy_cost(0.5, 9.0, 9.2, PriceSchedule.flat(8, 10, 100)))
