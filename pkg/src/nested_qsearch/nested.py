"""Three-stage nested quantum search and the unstructured baseline."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import asdict, dataclass, field

import numpy as np

from . import analytics
from .csp import CspInstance, PartialAssignment, TooLargeError, critical_beta, decode, good_mask, is_solution
from .statevector import (
    NestedOperator,
    apply_S,
    apply_U,
    amplify_step,
    measure,
    statevector_guard,
    success_probability,
    uniform_op,
)

EXACT = "exact-counts"
ANALYTIC = "analytic-counts"
ZERO_MASS = 1e-15


def optimal_iterations(theta: float) -> int:
    """Integer ``0 <= n <= ceil(pi / 4 theta)`` maximising sin^2((2n+1) theta).

    Only the first quarter turn is searched: for large angles a later ``n``
    can land closer to the target, but that buys nothing over remeasuring.
    Ties go to the smaller ``n``.
    """
    if theta <= 0:
        return 0
    centre = math.pi / (4 * theta) - 0.5
    best, best_p = 0, math.sin(theta) ** 2
    for n in sorted({max(0, math.floor(centre)), max(0, math.ceil(centre))}):
        p = math.sin((2 * n + 1) * theta) ** 2
        if p > best_p + 1e-12:
            best, best_p = n, p
    return best


def rotation_angle(overlap: float) -> float:
    return math.asin(min(1.0, max(0.0, overlap)))


@dataclass
class Schedule:
    cut_level: int
    d_A: int
    d_B: int
    n_A: float
    n_AB: float
    n: int
    m: int
    r: int
    mode: str
    overlap: float
    status: str = "ok"

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RunResult:
    assignment: tuple[int, ...] | None
    is_solution: bool
    oracle_calls: dict = field(default_factory=dict)
    exact_success_probability: float | None = None
    repetitions: int = 0
    seed: int | None = None
    engine: str = "quantum-nested"
    schedule: Schedule | None = None
    status: str = "solved"

    @property
    def total_calls(self) -> int:
        return int(sum(self.oracle_calls.values()))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["assignment"] = list(self.assignment) if self.assignment is not None else None
        out["total_calls"] = self.total_calls
        return out


def _check_statevector(inst: CspInstance):
    size = inst.b**inst.mu
    guard = statevector_guard()
    if size > guard:
        raise TooLargeError("statevector", size, guard)


def _registers(inst: CspInstance, cut_level: int) -> tuple[np.ndarray, np.ndarray]:
    d_B = inst.b ** (inst.mu - cut_level)
    mask_c = good_mask(inst, cut_level)
    mask_t = good_mask(inst, inst.mu).reshape(-1, d_B)
    return mask_c, mask_t


def make_schedule(inst: CspInstance, cut_level: int, mode: str = EXACT) -> Schedule:
    if not 0 < cut_level < inst.mu:
        raise ValueError(f"cut level {cut_level} must lie strictly between 0 and mu={inst.mu}")
    d_A = inst.b**cut_level
    d_B = inst.b ** (inst.mu - cut_level)
    if mode == EXACT:
        mask_c, mask_t = _registers(inst, cut_level)
        n_A, n_AB = float(mask_c.sum()), float(mask_t.sum())
    elif mode == ANALYTIC:
        mask_c = mask_t = None
        n_A = analytics.p_exact(inst.mu, inst.b, inst.k, inst.xi, cut_level) * d_A
        n_AB = analytics.p_exact(inst.mu, inst.b, inst.k, inst.xi, inst.mu) * d_A * d_B
    else:
        raise ValueError(f"unknown mode {mode!r}")

    status = "ok"
    if n_A <= 0:
        status = "degenerate"
    elif n_AB <= 0:
        status = "no-solution"
    n = optimal_iterations(rotation_angle(math.sqrt(min(n_A, d_A) / d_A))) if n_A > 0 else 0
    m = optimal_iterations(rotation_angle(1 / math.sqrt(d_B)))

    if mode == EXACT:
        op = NestedOperator(mask_c, mask_t, n, m)
        overlap = min(1.0, math.sqrt(success_probability(apply_U(op), mask_t)))
    else:
        overlap = math.sqrt(min(1.0, n_AB / n_A)) if n_A > 0 else 0.0
    if status == "ok" and overlap**2 < ZERO_MASS:
        # stage two overshot every target (branches with many solutions); the
        # leftover mass is rounding noise and amplifying it would never end
        status, overlap = "degenerate", 0.0
    r = optimal_iterations(rotation_angle(overlap))
    return Schedule(cut_level, d_A, d_B, n_A, n_AB, n, m, r, mode, overlap, status)


def expected_oracle_calls(n: int, m: int, r: int) -> Counter:
    """Calls made preparing ``S^r U|s,s'>``: U once plus U, U^dagger and one I_t per S."""
    return Counter({"I_c": (2 * r + 1) * n, "I_t": (2 * r + 1) * m + r})


def _nested_state(inst: CspInstance, sched: Schedule, r: int, counter: Counter) -> tuple[np.ndarray, np.ndarray]:
    mask_c, mask_t = _registers(inst, sched.cut_level)
    op = NestedOperator(mask_c, mask_t, sched.n, sched.m)
    psi = apply_U(op, counter)
    for _ in range(r):
        psi = apply_S(psi, op, counter)
    return psi, mask_t.reshape(-1)


def _rep_rng(seed: int | None, rep: int) -> np.random.Generator:
    return np.random.default_rng([0 if seed is None else seed, rep])


def run_nested(inst: CspInstance, cut_level: int, mode: str = EXACT, seed: int | None = 0,
               max_repetitions: int = 1) -> RunResult:
    """Prepare ``S^r U|0>``, measure, and repeat on failure up to ``max_repetitions``.

    In analytic mode a failed attempt is retried with ``r`` drawn uniformly
    from ``[0, 2^j * max(r, 1)]`` on attempt ``j``.
    """
    _check_statevector(inst)
    if max_repetitions < 1:
        raise ValueError("max_repetitions must be >= 1")
    sched = make_schedule(inst, cut_level, mode)
    calls: Counter = Counter()
    cache: dict[int, tuple[np.ndarray, np.ndarray, Counter]] = {}
    exact_p = None
    assignment, solved, rep = None, False, 0
    for rep in range(1, max_repetitions + 1):
        rng = _rep_rng(seed, rep - 1)
        r = sched.r
        if mode == ANALYTIC and rep > 1:
            r = int(rng.integers(0, 2 ** (rep - 1) * max(sched.r, 1) + 1))
        if r not in cache:
            c: Counter = Counter()
            psi, targets = _nested_state(inst, sched, r, c)
            cache[r] = (psi, targets, c)
        psi, targets, c = cache[r]
        calls.update(c)
        if rep == 1:
            exact_p = success_probability(psi, targets)
        x = measure(psi, rng)
        assignment = decode(x, inst.mu, inst.b)
        solved = is_solution(inst, PartialAssignment(assignment))
        if solved:
            break
    return RunResult(assignment, solved, dict(calls), exact_p, rep, seed, "quantum-nested", sched,
                     "solved" if solved else "no solution found")


def unstructured_schedule(inst: CspInstance) -> tuple[int, float, np.ndarray]:
    mask_t = good_mask(inst, inst.mu)
    d = mask_t.size
    n_AB = int(mask_t.sum())
    theta = rotation_angle(math.sqrt(n_AB / d))
    return optimal_iterations(theta), theta, mask_t


def run_unstructured(inst: CspInstance, seed: int | None = 0, max_repetitions: int = 1) -> RunResult:
    """Plain amplitude amplification over all b^mu assignments."""
    _check_statevector(inst)
    n, theta, mask_t = unstructured_schedule(inst)
    counter: Counter = Counter()
    psi = np.zeros(mask_t.size, dtype=complex)
    psi[0] = 1.0
    psi = uniform_op(psi)
    for _ in range(n):
        psi = amplify_step(psi, mask_t, 0, counter)
    exact_p = success_probability(psi, mask_t)
    calls: Counter = Counter()
    assignment, solved, rep = None, False, 0
    for rep in range(1, max_repetitions + 1):
        calls.update(counter)
        x = measure(psi, _rep_rng(seed, rep - 1))
        assignment = decode(x, inst.mu, inst.b)
        solved = bool(mask_t[x])
        if solved:
            break
    sched = Schedule(inst.mu, mask_t.size, 1, float(mask_t.sum()), float(mask_t.sum()), n, 0, 0,
                     EXACT, math.sin(theta), "ok" if mask_t.any() else "no-solution")
    return RunResult(assignment, solved, dict(calls), exact_p, rep, seed, "quantum-unstructured", sched,
                     "solved" if solved else "no solution found")


@dataclass
class CostRow:
    cut_level: int
    n: int
    m: int
    r: int
    oracle_calls_quantum: int
    success_probability: float
    t_q_analytic: float
    t_c_analytic: float


def cost_comparison(inst: CspInstance, cut_levels: list[int]) -> list[CostRow]:
    """Measured oracle calls per cut level beside the analytic cost predictors."""
    _check_statevector(inst)
    beta_ratio = inst.xi / inst.mu / critical_beta(inst.b, inst.k) if inst.mu else 0.0
    rows = []
    for i in cut_levels:
        sched = make_schedule(inst, i, EXACT)
        counter: Counter = Counter()
        psi, targets = _nested_state(inst, sched, sched.r, counter)
        rows.append(CostRow(
            i, sched.n, sched.m, sched.r, int(sum(counter.values())),
            success_probability(psi, targets),
            analytics.t_q_analytic(inst.mu, inst.b, inst.k, beta_ratio, i),
            analytics.t_c_analytic(inst.mu, inst.b, inst.k, beta_ratio, i),
        ))
    return rows
