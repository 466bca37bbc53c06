"""Exit checks for the toolkit, shared by ``nested-qsearch verify`` and the test suite.

Each check returns a :class:`CheckResult`; none of them raise on failure.
"""
from __future__ import annotations

import math
import time
from collections import Counter
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats

from . import analytics
from .classical import predicted_cost, run_classical_nested
from .csp import (
    PartialAssignment,
    count_could_be,
    critical_beta,
    decode,
    good_mask,
    graph_coloring_instance,
    is_good,
    random_instance,
)
from .nested import EXACT, cost_comparison, make_schedule, optimal_iterations, rotation_angle, run_nested
from .statevector import NestedOperator, apply_Q, uniform_op

DEPTH_TABLE = {
    1: (1.000, 0.618, 0.618, 1.000),
    2: (1.000, 0.484, 0.718, 0.674, 0.484, 1.000),
    3: (1.000, 0.416, 0.764, 0.545, 0.590, 0.706, 0.416, 1.000),
}
THREE_SIGMA_P = 2 * stats.norm.sf(3)  # two-sided tail beyond 3 sigma


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name:<28} {self.seconds:7.2f}s  {self.detail}"


def _timed(name: str, fn: Callable[[], tuple[bool, str]], budget: float | None = None) -> CheckResult:
    t0 = time.perf_counter()
    ok, detail = fn()
    dt = time.perf_counter() - t0
    if budget is not None and dt >= budget:
        ok, detail = False, f"{detail}; runtime {dt:.2f}s over {budget}s budget"
    return CheckResult(name, bool(ok), detail, dt)


def triangle(b: int = 3):
    return graph_coloring_instance([(0, 1), (1, 2), (0, 2)], 3, b)


def check_depth_table() -> CheckResult:
    def run():
        worst = 0.0
        for N, expected in DEPTH_TABLE.items():
            got = analytics.nesting_recurrences(2, 1.0, N).row()
            worst = max(worst, max(abs(g - e) for g, e in zip(got, expected)))
        return worst <= 1e-3 + 1e-12, f"max |deviation| = {worst:.2e} (tol 1e-3)"
    return _timed("depth-table-regression", run, budget=1.0)


def check_golden_cut() -> CheckResult:
    def run():
        x = analytics.optimal_cut(1.0, 2)
        golden = (math.sqrt(5) - 1) / 2
        x1 = analytics.nesting_recurrences(2, 1.0, 1).x[1]
        ok = abs(x - golden) <= 1e-6 and round(x, 4) == 0.6180 and abs(x1 - x) <= 1e-10
        return ok, f"x* = {x:.12f}, (sqrt5-1)/2 gap {abs(x - golden):.1e}, N=1 gap {abs(x1 - x):.1e}"
    return _timed("golden-ratio-cut", run)


def simulated_search_amplitudes(d: int, target: int, n_max: int) -> tuple[complex, list[complex]]:
    """``<t|W|s>`` and ``<t|Q^n W|s>`` for n = 0..n_max from the statevector."""
    mask = np.zeros(d, dtype=bool)
    mask[target] = True
    psi = np.zeros(d, dtype=complex)
    psi[0] = 1.0
    psi = uniform_op(psi)
    u = psi[target]
    amps = [psi[target]]
    for _ in range(n_max):
        psi = apply_Q(psi, mask)
        amps.append(psi[target])
    return u, amps


def check_chebyshev(seed: int = 2024) -> CheckResult:
    def run():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for d in (4, 8, 16, 32, 64):
            target = int(rng.integers(d))
            n_opt = optimal_iterations(rotation_angle(1 / math.sqrt(d)))
            u, amps = simulated_search_amplitudes(d, target, n_opt)
            for n, a in enumerate(amps):
                worst = max(worst, abs(a - analytics.chebyshev_amplitude(u, n)))
        return worst <= 1e-10, f"max |sim - closed form| = {worst:.2e} (tol 1e-10)"
    return _timed("chebyshev-exactness", run, budget=5.0)


def check_minimal_search() -> CheckResult:
    def run():
        n = optimal_iterations(rotation_angle(1 / 2))
        _, amps = simulated_search_amplitudes(4, 3, n)
        p = abs(amps[-1]) ** 2
        return n == 1 and abs(p - 1) <= 1e-10, f"n = {n}, success probability {p:.15f}"
    return _timed("minimal-search-d4", run)


def check_dead_branches() -> CheckResult:
    """Rows of register A with no completing solution pass through R^m untouched."""
    def run():
        inst = triangle(3)
        sched = make_schedule(inst, 2, EXACT)
        mask_c = good_mask(inst, 2)
        mask_t = good_mask(inst, 3).reshape(9, 3)
        dead = np.flatnonzero(~mask_t.any(axis=1))
        worst = 0.0
        for m in range(1, 6):
            op = NestedOperator(mask_c, mask_t, sched.n, m)
            for c in dead:
                basis = np.zeros((9, 3), dtype=complex)
                basis[c, 0] = 1.0
                before = uniform_op(basis, 0, 1)
                worst = max(worst, np.abs(op.stage_two(basis) - before).max())
            psi0 = np.zeros((9, 3), dtype=complex)
            psi0[0, 0] = 1.0
            pre = uniform_op(op.stage_one(psi0), 0, 1)
            post = op.stage_two(op.stage_one(psi0))
            worst = max(worst, np.abs(post[dead] - pre[dead]).max())
        return worst <= 1e-12, f"{dead.size} dead rows, max deviation {worst:.1e} over m=1..5"
    return _timed("dead-branch-invariance", run)


def check_end_to_end(runs: int = 1000, seed: int = 7) -> CheckResult:
    def run():
        inst = triangle(3)
        wins = 0
        p_exact = None
        seen: Counter = Counter()
        for j in range(runs):
            res = run_nested(inst, 2, EXACT, seed=seed * 100_000 + j, max_repetitions=1)
            p_exact = res.exact_success_probability
            if res.is_solution:
                wins += 1
                seen[res.assignment] += 1
        sigma = math.sqrt(p_exact * (1 - p_exact) / runs)
        z = abs(wins / runs - p_exact) / sigma
        colorings = [decode(x, 3, 3) for x in np.flatnonzero(good_mask(inst, 3))]
        counts = [seen[c] for c in colorings]
        chi = stats.chisquare(counts)
        ok = z <= 3 and chi.pvalue > THREE_SIGMA_P and len(seen) == 6
        return ok, (f"empirical {wins / runs:.3f} vs exact {p_exact:.4f} (z={z:.2f}); "
                    f"coloring counts {counts}, chi2 p={chi.pvalue:.3f}")
    return _timed("end-to-end-nested", run, budget=30.0)


def log_gap(mu: int, x: float, b: int = 2, k: int = 2, ratio: float = 1.0) -> tuple[float, float]:
    """Relative gap between exact and asymptotic p(i) at i = round(x mu):
    on the exponent scale |ln(p_exact/p_asym)| / |ln p_asym|, and on the plain scale."""
    xi = math.ceil(critical_beta(b, k) * ratio * mu)
    i = round(x * mu)
    pe = analytics.p_exact(mu, b, k, xi, i)
    pa = analytics.p_asymptotic(mu, b, k, ratio, i)
    return abs(math.log(pe / pa)) / abs(math.log(pa)), abs(pe / pa - 1)


def check_p_model(samples: int = 10_000, seed: int = 11) -> CheckResult:
    def run():
        mu, b, k = 12, 2, 2
        xi = math.ceil(critical_beta(b, k) * mu)
        rng = np.random.default_rng(seed)
        levels = (4, 8, 12)
        hits = dict.fromkeys(levels, 0)
        for j in range(samples):
            inst = random_instance(mu, b, k, xi, seed=[seed, j])
            for i in levels:
                hits[i] += is_good(inst, PartialAssignment(decode(int(rng.integers(b**i)), i, b)))
        parts, ok = [], True
        for i in levels:
            p = analytics.p_exact(mu, b, k, xi, i)
            sigma = math.sqrt(max(p * (1 - p), 1e-300) / samples)
            z = abs(hits[i] / samples - p) / sigma
            ok &= z <= 3
            parts.append(f"i={i}: {hits[i] / samples:.4f} vs {p:.4f} (z={z:.2f})")
        shrink = []
        for x in (1 / 3, 2 / 3, 1.0):
            gaps = [log_gap(m, x) for m in (12, 24, 48, 96)]
            exp_gaps = [g for g, _ in gaps]
            mono = all(a > c for a, c in zip(exp_gaps, exp_gaps[1:]))
            ok &= mono
            shrink.append(f"x={x:.2f} exponent gap " + "/".join(f"{g:.3f}" for g in exp_gaps)
                          + " plain gap " + "/".join(f"{p:.2f}" for _, p in gaps))
        return ok, "; ".join(parts + shrink)
    return _timed("p-model-monte-carlo", run)


def check_classical_calibration(runs: int = 1000) -> CheckResult:
    def run():
        inst = triangle(3)
        pred = predicted_cost(9, count_could_be(inst, 2), 3, count_could_be(inst, 3))
        total = [run_classical_nested(inst, 2, seed=s).total_iterations for s in range(runs)]
        mean = float(np.mean(total))
        ok = pred / 2 <= mean <= pred * 2 and pred == 4.5
        return ok, f"mean total_iterations {mean:.3f} vs predicted {pred} (factor {mean / pred:.3f})"
    return _timed("classical-calibration", run)


def one_solution_per_branch_instances(count: int = 10, seed: int = 5) -> list[tuple]:
    """Seeded random instances (b=2, k=2, mu 5..8) with at least one solution and at
    most one solution below every could-be at the cut round(0.618 mu)."""
    out = []
    j = 0
    while len(out) < count:
        mu = 5 + j % 4
        xi = 4 + 4 * ((j // 4) % 3)
        inst = random_instance(mu, 2, 2, xi, seed=[seed, j])
        j += 1
        cut = round(0.618 * mu)
        per_branch = good_mask(inst, mu).reshape(2**cut, -1).sum(axis=1)
        if per_branch.sum() >= 1 and per_branch.max() <= 1:
            out.append((inst, cut))
    return out


def check_sqrt_relation() -> CheckResult:
    def run():
        ok, parts = True, []
        for inst, cut in one_solution_per_branch_instances():
            s = make_schedule(inst, cut, EXACT)
            classical = (s.d_A / s.n_A, s.d_B, s.n_A / s.n_AB)
            quantum = (s.n, s.m, s.r)
            good = all(abs(q - round(math.sqrt(c))) <= 1 for q, c in zip(quantum, classical))
            ok &= good
            parts.append(f"mu={inst.mu}:{quantum}~{tuple(round(math.sqrt(c), 2) for c in classical)}")
        return ok, " ".join(parts)
    return _timed("sqrt-relation", run)


def first_satisfiable(mu: int, b: int = 2, k: int = 2, seeds: int = 200):
    xi = math.ceil(critical_beta(b, k) * mu)
    for seed in range(seeds):
        inst = random_instance(mu, b, k, xi, seed)
        if count_could_be(inst, mu):
            return inst, seed
    raise RuntimeError(f"no satisfiable instance at mu={mu} in {seeds} seeds")


def check_interior_cut() -> CheckResult:
    def run():
        ok, parts = True, []
        for mu in (8, 10):
            inst, seed = first_satisfiable(mu)
            rows = cost_comparison(inst, list(range(1, mu)))
            expected = [r.oracle_calls_quantum / r.success_probability if r.success_probability > 0 else math.inf
                        for r in rows]
            best = rows[int(np.argmin(expected))].cut_level
            ok &= 1 < best < mu - 1
            parts.append(f"mu={mu} (seed {seed}): argmin expected calls at i={best}")
        return ok, "; ".join(parts)
    return _timed("finite-size-interior-cut", run)


ALL_CHECKS: dict[str, Callable[[], CheckResult]] = {
    "depth-table-regression": check_depth_table,
    "golden-ratio-cut": check_golden_cut,
    "chebyshev-exactness": check_chebyshev,
    "minimal-search-d4": check_minimal_search,
    "dead-branch-invariance": check_dead_branches,
    "end-to-end-nested": check_end_to_end,
    "p-model-monte-carlo": check_p_model,
    "classical-calibration": check_classical_calibration,
    "sqrt-relation": check_sqrt_relation,
    "finite-size-interior-cut": check_interior_cut,
}


def run_all(names: list[str] | None = None) -> list[CheckResult]:
    return [ALL_CHECKS[n]() for n in (names or ALL_CHECKS)]
