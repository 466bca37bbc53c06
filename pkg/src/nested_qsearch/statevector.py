"""Dense complex statevector operators for nested amplitude amplification.

States live in numpy arrays.  Single-register operators act along axis 0 so
that the same function applies ``Q`` to a register-A state of shape
``(d_A,)`` and ``Q (x) 1`` to a joint state reshaped to ``(d_A, d_B)``.

The uniform operator ``W`` replaces the Walsh-Hadamard transform for
arbitrary dimension: it is the reflection ``2|w><w| - 1`` through
``w = (|u> + |s>) / ||u> + |s>||`` where ``|u>`` is the uniform vector, so
``W|s> = |u>``, ``W`` is real, symmetric and an involution, and
``W I_s W = 1 - 2|u><u|`` exactly.
"""
from __future__ import annotations

import csv
import io
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

STATEVECTOR_GUARD = 2**20


class DimensionError(ValueError):
    pass


def statevector_guard() -> int:
    return int(os.environ.get("NESTED_QSEARCH_GUARD", STATEVECTOR_GUARD))


@dataclass
class PhasePredicate:
    """A labelled boolean test on basis indices (I_s, I_s', I_c or I_t)."""

    label: str
    test: Callable[[int], bool]
    _mask: np.ndarray | None = field(default=None, repr=False, compare=False)

    @classmethod
    def from_mask(cls, label: str, mask: np.ndarray) -> "PhasePredicate":
        mask = np.asarray(mask, dtype=bool)
        return cls(label, lambda x: bool(mask.flat[x]), mask)

    @classmethod
    def basis(cls, label: str, index: int) -> "PhasePredicate":
        return cls(label, lambda x: x == index)

    def mask(self, shape: int | tuple[int, ...]) -> np.ndarray:
        shape = (shape,) if isinstance(shape, int) else tuple(shape)
        if self._mask is not None and self._mask.shape == shape:
            return self._mask
        size = int(np.prod(shape))
        if self._mask is not None and self._mask.size == size:
            return self._mask.reshape(shape)
        flat = np.fromiter((self.test(x) for x in range(size)), dtype=bool, count=size)
        self._mask = flat.reshape(shape)
        return self._mask


def uniform_vector(d: int) -> np.ndarray:
    return np.full(d, 1 / np.sqrt(d))


def _reflector(d: int, source: int) -> np.ndarray:
    if not 0 <= source < d:
        raise DimensionError(f"source index {source} outside [0, {d})")
    w = uniform_vector(d)
    w[source] += 1.0
    return w / np.linalg.norm(w)


def uniform_op(psi: np.ndarray, source: int = 0, axis: int = 0) -> np.ndarray:
    """Apply ``W`` (maps basis ``source`` to the uniform vector) along ``axis``."""
    psi = np.asarray(psi, dtype=complex)
    psi = np.moveaxis(psi, axis, 0)
    w = _reflector(psi.shape[0], source)
    proj = np.tensordot(w, psi, axes=(0, 0))
    out = 2 * np.multiply.outer(w, proj) - psi
    return np.moveaxis(out, 0, axis)


def phase_flip(pred: PhasePredicate, psi: np.ndarray, counter: Counter | None = None) -> np.ndarray:
    out = np.array(psi, dtype=complex)
    out[pred.mask(out.shape)] *= -1
    if counter is not None:
        counter[pred.label] += 1
    return out


def flip_index(psi: np.ndarray, index: int, axis: int = 0) -> np.ndarray:
    """``I_s`` along ``axis``: negate the slice at ``index``."""
    out = np.array(psi, dtype=complex)
    sl = [slice(None)] * out.ndim
    sl[axis] = index
    out[tuple(sl)] *= -1
    return out


def _reflect_source(psi: np.ndarray, source: int, axis: int) -> np.ndarray:
    # W I_s W
    return uniform_op(flip_index(uniform_op(psi, source, axis), source, axis), source, axis)


def _check_register(psi: np.ndarray, mask: np.ndarray, name: str):
    if psi.shape[0] != mask.shape[0]:
        raise DimensionError(f"{name}: state register has {psi.shape[0]} entries, oracle expects {mask.shape[0]}")


def _broadcast(mask: np.ndarray, ndim: int) -> np.ndarray:
    return mask.reshape(mask.shape + (1,) * (ndim - mask.ndim))


def apply_Q(psi: np.ndarray, pred_c: PhasePredicate | np.ndarray, source: int = 0,
            counter: Counter | None = None, label: str = "I_c") -> np.ndarray:
    """One iteration of ``Q = -W I_s W I_c`` on register A (axis 0)."""
    psi = np.asarray(psi, dtype=complex)
    mask = pred_c.mask(psi.shape[0]) if isinstance(pred_c, PhasePredicate) else np.asarray(pred_c, bool)
    _check_register(psi, mask, "apply_Q")
    if isinstance(pred_c, PhasePredicate):
        label = pred_c.label
    out = np.where(_broadcast(mask, psi.ndim), -psi, psi)
    if counter is not None:
        counter[label] += 1
    return -_reflect_source(out, source, 0)


def apply_Q_adjoint(psi: np.ndarray, mask_c: np.ndarray, source: int = 0,
                    counter: Counter | None = None, label: str = "I_c") -> np.ndarray:
    out = -_reflect_source(np.asarray(psi, dtype=complex), source, 0)
    if counter is not None:
        counter[label] += 1
    return np.where(_broadcast(mask_c, out.ndim), -out, out)


def apply_R(psi: np.ndarray, mask_t: np.ndarray, source_b: int = 0,
            counter: Counter | None = None) -> np.ndarray:
    """One iteration of ``R = -(1 (x) W I_s' W) I_t`` on a ``(d_A, d_B)`` state."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != mask_t.shape:
        raise DimensionError(f"apply_R: state shape {psi.shape} vs oracle shape {mask_t.shape}")
    out = np.where(mask_t, -psi, psi)
    if counter is not None:
        counter["I_t"] += 1
    return -_reflect_source(out, source_b, 1)


def apply_R_adjoint(psi: np.ndarray, mask_t: np.ndarray, source_b: int = 0,
                    counter: Counter | None = None) -> np.ndarray:
    out = -_reflect_source(np.asarray(psi, dtype=complex), source_b, 1)
    if counter is not None:
        counter["I_t"] += 1
    return np.where(mask_t, -out, out)


@dataclass
class NestedOperator:
    """``U = R^m (1 (x) W) (Q (x) 1)^n (W (x) 1)`` on a joint ``(d_A, d_B)`` register.

    ``mask_c`` marks could-be rows of register A and ``mask_t`` marks solutions
    in the joint space.  The adjoint is the same circuit read backwards.
    """

    mask_c: np.ndarray
    mask_t: np.ndarray
    n: int
    m: int
    source: int = 0
    source_b: int = 0

    def __post_init__(self):
        self.mask_c = np.asarray(self.mask_c, dtype=bool)
        self.mask_t = np.asarray(self.mask_t, dtype=bool)
        if self.mask_t.ndim != 2 or self.mask_c.shape != (self.mask_t.shape[0],):
            raise DimensionError(f"oracle shapes {self.mask_c.shape} and {self.mask_t.shape} do not match")
        if self.n < 0 or self.m < 0:
            raise ValueError("iteration counts must be non-negative")

    @property
    def shape(self) -> tuple[int, int]:
        return self.mask_t.shape

    def _as_joint(self, psi: np.ndarray) -> np.ndarray:
        psi = np.asarray(psi, dtype=complex)
        if psi.size != self.mask_t.size:
            raise DimensionError(f"state of size {psi.size} does not fit registers {self.shape}")
        return psi.reshape(self.shape)

    def stage_one(self, psi, counter: Counter | None = None) -> np.ndarray:
        """``(Q (x) 1)^n (W (x) 1)``."""
        out = uniform_op(self._as_joint(psi), self.source, 0)
        for _ in range(self.n):
            out = apply_Q(out, self.mask_c, self.source, counter)
        return out

    def stage_two(self, psi, counter: Counter | None = None) -> np.ndarray:
        """``R^m (1 (x) W)``."""
        out = uniform_op(self._as_joint(psi), self.source_b, 1)
        for _ in range(self.m):
            out = apply_R(out, self.mask_t, self.source_b, counter)
        return out

    def apply(self, psi, counter: Counter | None = None) -> np.ndarray:
        shape = np.shape(psi)
        return self.stage_two(self.stage_one(psi, counter), counter).reshape(shape)

    def apply_adjoint(self, psi, counter: Counter | None = None) -> np.ndarray:
        shape = np.shape(psi)
        out = self._as_joint(psi)
        for _ in range(self.m):
            out = apply_R_adjoint(out, self.mask_t, self.source_b, counter)
        out = uniform_op(out, self.source_b, 1)
        for _ in range(self.n):
            out = apply_Q_adjoint(out, self.mask_c, self.source, counter)
        return uniform_op(out, self.source, 0).reshape(shape)

    def start_index(self) -> int:
        return self.source * self.shape[1] + self.source_b


def apply_U(op: NestedOperator, counter: Counter | None = None) -> np.ndarray:
    """``U|s, s'>`` as a flat statevector."""
    psi0 = np.zeros(op.mask_t.size, dtype=complex)
    psi0[op.start_index()] = 1.0
    return op.apply(psi0, counter)


def apply_S(psi: np.ndarray, op: NestedOperator, counter: Counter | None = None) -> np.ndarray:
    """One top-level iteration ``S = -U I_{s,s'} U^dagger I_t``.

    The start-state reflection flips only the joint basis state ``|s, s'>``.
    """
    psi = np.asarray(psi, dtype=complex)
    flat = psi.reshape(-1)
    if flat.size != op.mask_t.size:
        raise DimensionError(f"apply_S: state of size {flat.size} vs registers {op.shape}")
    out = np.where(op.mask_t.reshape(-1), -flat, flat)
    if counter is not None:
        counter["I_t"] += 1
    out = op.apply_adjoint(out, counter)
    out[op.start_index()] *= -1
    out = op.apply(out, counter)
    return (-out).reshape(psi.shape)


def amplify_step(psi: np.ndarray, mask_t: np.ndarray, source: int = 0,
                   counter: Counter | None = None) -> np.ndarray:
    """Unstructured ``Q = -W I_s W I_t`` on a flat register."""
    return apply_Q(psi, mask_t, source, counter, label="I_t")


def success_probability(psi: np.ndarray, targets) -> float:
    probs = np.abs(np.asarray(psi).reshape(-1)) ** 2
    targets = np.asarray(targets)
    if targets.dtype == bool:
        return float(probs[targets.reshape(-1)].sum())
    return float(probs[targets.astype(np.int64)].sum())


def measure(psi: np.ndarray, rng: np.random.Generator) -> int:
    """Sample a basis index with probability ``|amplitude|^2``."""
    cdf = np.cumsum(np.abs(np.asarray(psi).reshape(-1)) ** 2)
    x = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return min(x, cdf.size - 1)


def norm(psi: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(psi).reshape(-1)))


def dump_csv(psi: np.ndarray) -> str:
    """Amplitudes as ``index,re,im`` rows, for debugging."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "re", "im"])
    for i, a in enumerate(np.asarray(psi).reshape(-1)):
        w.writerow([i, repr(float(a.real)), repr(float(a.imag))])
    return buf.getvalue()
