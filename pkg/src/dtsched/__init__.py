"""Energy-aware batch scheduling under Time-of-Use tariffs.

A batch-production machine is modelled as a priced timed automaton; schedules
are priced exactly on piecewise-constant tariffs and chosen either by
exhaustive open-loop search or by a limited-lookahead receding-horizon
controller.
"""

from .decision import (
    LookaheadConfig,
    benchmark_schedule,
    cost_J,
    cost_J_prime,
    indicator_xi,
    llp_run,
    llp_step,
    lookahead_tree,
    open_loop_optimal,
)
from .errors import *  # noqa: F401,F403
from .planning import (
    Disturbance,
    RuntimeContext,
    apply_disturbance,
    due_disturbances,
    init_model,
    load_disturbances,
)
from .pta import (
    ClockConstraint,
    MachineSpec,
    Milestone,
    OrderSpec,
    PtaModel,
    check_constraints,
    delta,
    event_duration,
    feasible_events,
    is_marked,
    transition_timings,
)
from .records import Candidate, DecisionRecord, RunLog, StepRecord
from .simulate import ComparisonReport, compare, run_fixed, run_llp
from .store import RunStore
from .tariff import (
    PriceSchedule,
    Segment,
    load_prices,
    price_at,
    splice_prices,
    string_energy_cost,
    transition_energy_cost,
)

__version__ = "0.1.0"
