"""Constraint satisfaction instances stored as explicit nogood ground instances.

Variables are assigned in a fixed order x_1..x_mu.  A partial assignment at
level ``i`` fixes the first ``i`` variables; it is *good* when no nogood whose
variables all lie among those ``i`` matches its values.

Assignments at level ``L`` are indexed in mixed radix base ``b`` with x_1 the
most significant digit, so index ``a * b**(mu - i) + rest`` splits a full
assignment into its level-``i`` prefix ``a`` and its descendant suffix.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

ENUMERATION_GUARD = 2**24
_CHUNK = 2**20

Nogood = tuple[tuple[int, ...], tuple[int, ...]]


class InvalidInstanceError(ValueError):
    """Raised for malformed instances or out-of-range generator parameters."""


class TooLargeError(ValueError):
    """Raised when a brute-force enumeration would exceed the size guard."""

    def __init__(self, what: str, size: int, guard: int):
        super().__init__(f"{what}: {size} states exceeds guard {guard}")
        self.size = size
        self.guard = guard


def _canonical(vars_: Sequence[int], vals: Sequence[int]) -> Nogood:
    pairs = sorted(zip(vars_, vals))
    return tuple(int(v) for v, _ in pairs), tuple(int(x) for _, x in pairs)


@dataclass(frozen=True)
class CspInstance:
    mu: int
    b: int
    k: int
    nogoods: tuple[Nogood, ...]
    provenance: str = "explicit"

    def __post_init__(self):
        if self.mu < 0 or self.b < 1 or self.k < 1:
            raise InvalidInstanceError(f"bad sizes mu={self.mu} b={self.b} k={self.k}")
        seen = set()
        for vars_, vals in self.nogoods:
            if len(vars_) != self.k or len(vals) != self.k:
                raise InvalidInstanceError(f"nogood {vars_, vals} does not have arity {self.k}")
            if len(set(vars_)) != self.k or list(vars_) != sorted(vars_):
                raise InvalidInstanceError(f"nogood variables {vars_} not sorted and distinct")
            if any(v < 0 or v >= self.mu for v in vars_):
                raise InvalidInstanceError(f"nogood variables {vars_} outside [0, {self.mu})")
            if any(x < 0 or x >= self.b for x in vals):
                raise InvalidInstanceError(f"nogood values {vals} outside [0, {self.b})")
            seen.add((vars_, vals))
        if len(seen) != len(self.nogoods):
            raise InvalidInstanceError("duplicate nogoods")

    @classmethod
    def from_nogoods(cls, mu: int, b: int, k: int, nogoods: Iterable[tuple[Sequence[int], Sequence[int]]],
                     provenance: str = "explicit") -> "CspInstance":
        """Build an instance, canonicalising variable order and dropping duplicates."""
        canon = dict.fromkeys(_canonical(v, x) for v, x in nogoods)
        return cls(mu, b, k, tuple(canon), provenance)

    @property
    def xi(self) -> int:
        return len(self.nogoods)

    @property
    def max_nogoods(self) -> int:
        return self.b**self.k * math.comb(self.mu, self.k)

    def to_dict(self) -> dict:
        return {
            "mu": self.mu,
            "b": self.b,
            "k": self.k,
            "nogoods": [{"vars": list(v), "vals": list(x)} for v, x in self.nogoods],
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CspInstance":
        try:
            nogoods = tuple(_canonical(ng["vars"], ng["vals"]) for ng in data["nogoods"])
            return cls(int(data["mu"]), int(data["b"]), int(data["k"]), nogoods,
                       data.get("provenance", "explicit"))
        except (KeyError, TypeError) as exc:
            raise InvalidInstanceError(f"malformed instance JSON: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CspInstance":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class PartialAssignment:
    values: tuple[int, ...] = field(default_factory=tuple)

    @property
    def level(self) -> int:
        return len(self.values)

    @classmethod
    def from_index(cls, index: int, level: int, b: int) -> "PartialAssignment":
        return cls(decode(index, level, b))


def decode(index: int, level: int, b: int) -> tuple[int, ...]:
    """Mixed-radix digits of ``index`` at ``level``, most significant first."""
    digits = []
    for _ in range(level):
        index, r = divmod(index, b)
        digits.append(r)
    return tuple(reversed(digits))


def encode(values: Sequence[int], b: int) -> int:
    index = 0
    for v in values:
        index = index * b + int(v)
    return index


def _check_guard(size: int, what: str, guard: int | None = None):
    guard = ENUMERATION_GUARD if guard is None else guard
    if size > guard:
        raise TooLargeError(what, size, guard)


# --- generators -------------------------------------------------------------

def graph_coloring_instance(edges: Iterable[tuple[int, int]], num_nodes: int, b: int) -> CspInstance:
    """Each edge forbids its two endpoints sharing any of the ``b`` colors."""
    seen = set()
    nogoods = []
    for u, v in edges:
        u, v = int(u), int(v)
        if u == v:
            raise InvalidInstanceError(f"self-loop on node {u}")
        if not (0 <= u < num_nodes and 0 <= v < num_nodes):
            raise InvalidInstanceError(f"edge ({u}, {v}) outside [0, {num_nodes})")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise InvalidInstanceError(f"duplicate edge {key}")
        seen.add(key)
        nogoods.extend((key, (c, c)) for c in range(b))
    return CspInstance(num_nodes, b, 2, tuple(nogoods), "graph-coloring")


def random_instance(mu: int, b: int, k: int, xi: int, seed: int | None) -> CspInstance:
    """Pick ``xi`` distinct nogoods uniformly among all b^k * C(mu, k) ground instances."""
    if k > mu or k < 1:
        raise InvalidInstanceError(f"arity k={k} must lie in [1, mu={mu}]")
    per_constraint = b**k
    total = per_constraint * math.comb(mu, k)
    if xi < 0 or xi > total:
        raise InvalidInstanceError(f"xi={xi} outside [0, {total}]")
    rng = np.random.default_rng(seed)
    picks = np.sort(rng.choice(total, size=xi, replace=False))
    combos = list(itertools.combinations(range(mu), k))
    nogoods = []
    for p in picks.tolist():
        c, v = divmod(p, per_constraint)
        nogoods.append((combos[c], decode(v, k, b)))
    return CspInstance(mu, b, k, tuple(nogoods), "random")


# --- predicates and brute-force oracles ---------------------------------------

def is_good(inst: CspInstance, p: PartialAssignment) -> bool:
    level = p.level
    if level > inst.mu:
        raise InvalidInstanceError(f"level {level} exceeds mu={inst.mu}")
    vals = p.values
    for vars_, bad in inst.nogoods:
        if vars_[-1] < level and all(vals[v] == x for v, x in zip(vars_, bad)):
            return False
    return True


def is_solution(inst: CspInstance, p: PartialAssignment) -> bool:
    return p.level == inst.mu and is_good(inst, p)


def good_mask(inst: CspInstance, level: int, guard: int | None = None) -> np.ndarray:
    """Boolean array over all b**level assignments at ``level``: True where good."""
    if not 0 <= level <= inst.mu:
        raise InvalidInstanceError(f"level {level} outside [0, {inst.mu}]")
    size = inst.b**level
    _check_guard(size, f"enumeration at level {level}", guard)
    testable = [(vars_, vals) for vars_, vals in inst.nogoods if vars_[-1] < level]
    place = [inst.b ** (level - 1 - j) for j in range(level)]
    mask = np.ones(size, dtype=bool)
    # chunked so peak memory stays bounded; result does not depend on chunking
    for start in range(0, size, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, size), dtype=np.int64)
        out = mask[start:start + idx.size]
        for vars_, vals in testable:
            hit = np.ones(idx.size, dtype=bool)
            for v, x in zip(vars_, vals):
                hit &= (idx // place[v]) % inst.b == x
            out &= ~hit
    return mask


def count_could_be(inst: CspInstance, level: int, guard: int | None = None) -> int:
    return int(good_mask(inst, level, guard).sum())


def solution_indices(inst: CspInstance, guard: int | None = None) -> np.ndarray:
    return np.flatnonzero(good_mask(inst, inst.mu, guard))


def enumerate_solutions(inst: CspInstance, guard: int | None = None) -> list[tuple[int, ...]]:
    return [decode(int(x), inst.mu, inst.b) for x in solution_indices(inst, guard)]


def beta_params(inst: CspInstance) -> tuple[float, float]:
    """Constraints per variable and its critical value b^k ln b."""
    if inst.mu < 1:
        raise InvalidInstanceError("mu must be at least 1")
    return inst.xi / inst.mu, critical_beta(inst.b, inst.k)


def critical_beta(b: int, k: int) -> float:
    return b**k * math.log(b)
