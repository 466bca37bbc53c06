"""Classical nested search: random could-be sampling, then exhaustive descent."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .analytics import predicted_cost
from .csp import CspInstance, PartialAssignment, count_could_be, decode, is_good


@dataclass
class ClassicalRunResult:
    solution: tuple[int, ...] | None
    partial_samples_drawn: int
    descendants_checked: int
    cycles: int
    seed: int | None
    status: str = "solved"

    @property
    def total_iterations(self) -> int:
        return self.partial_samples_drawn + self.descendants_checked

    def to_dict(self) -> dict:
        out = asdict(self)
        out["solution"] = list(self.solution) if self.solution is not None else None
        out["total_iterations"] = self.total_iterations
        return out


def default_iteration_cap(inst: CspInstance, cut_level: int) -> int:
    """100 times the predicted cost with exact counts; 100 (b^i + b^mu) without solutions."""
    d_A, d_B = inst.b**cut_level, inst.b ** (inst.mu - cut_level)
    n_AB = count_could_be(inst, inst.mu)
    if n_AB == 0:
        return 100 * (d_A + d_A * d_B)
    n_A = count_could_be(inst, cut_level)
    return int(math.ceil(100 * predicted_cost(d_A, n_A, d_B, n_AB)))


def run_classical_nested(inst: CspInstance, cut_level: int, seed: int | None = 0,
                         iteration_cap: int | None = None) -> ClassicalRunResult:
    """Draw uniform level-``i`` partials until one is good, then scan its
    descendants in mixed-radix order; repeat until a solution or the cap.

    Hitting the cap is reported as ``"cap reached"``: the algorithm cannot
    tell an unsatisfiable instance from an unlucky run.
    """
    if not 0 < cut_level < inst.mu:
        raise ValueError(f"cut level {cut_level} must lie strictly between 0 and mu={inst.mu}")
    if iteration_cap is None:
        iteration_cap = default_iteration_cap(inst, cut_level)
    if iteration_cap <= 0:
        raise ValueError("iteration_cap must be positive")
    rng = np.random.default_rng(seed)
    d_A, d_B = inst.b**cut_level, inst.b ** (inst.mu - cut_level)
    tail = inst.mu - cut_level
    drawn = checked = cycles = 0
    while drawn + checked < iteration_cap:
        cycles += 1
        prefix = None
        while drawn + checked < iteration_cap:
            drawn += 1
            candidate = decode(int(rng.integers(d_A)), cut_level, inst.b)
            if is_good(inst, PartialAssignment(candidate)):
                prefix = candidate
                break
        if prefix is None:
            break
        for suffix in range(d_B):
            if drawn + checked >= iteration_cap:
                break
            checked += 1
            full = prefix + decode(suffix, tail, inst.b)
            if is_good(inst, PartialAssignment(full)):
                return ClassicalRunResult(full, drawn, checked, cycles, seed)
    return ClassicalRunResult(None, drawn, checked, cycles, seed, "cap reached")
