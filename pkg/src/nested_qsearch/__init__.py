"""Nested quantum search for constraint satisfaction: simulator, classical baseline and cost analytics."""

__version__ = "0.1.0"

from .analytics import (
    ScalingSolution,
    chebyshev_amplitude,
    nesting_recurrences,
    optimal_cut,
    p_asymptotic,
    p_exact,
    t_c_analytic,
    t_q_analytic,
)
from .classical import ClassicalRunResult, predicted_cost, run_classical_nested
from .csp import (
    CspInstance,
    PartialAssignment,
    beta_params,
    count_could_be,
    enumerate_solutions,
    graph_coloring_instance,
    is_good,
    random_instance,
)
from .nested import RunResult, Schedule, cost_comparison, make_schedule, run_nested, run_unstructured
