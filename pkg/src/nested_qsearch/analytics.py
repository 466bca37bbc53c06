"""Closed-form cost model for nested search.

Probability that a level-``i`` partial assignment is good, exact Chebyshev
amplitudes for iterated amplitude amplification, the classical and quantum
cost predictors as functions of the cut level, and the nesting recurrences
that fix the reduced cut levels and scaling coefficients.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

MAX_NESTING_DEPTH = 8
_XTOL = 1e-12


class NumericalFailure(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


def _log_binom(n: float, r: float) -> float:
    return math.lgamma(n + 1) - math.lgamma(r + 1) - math.lgamma(n - r + 1)


def p_exact(mu: int, b: int, k: int, xi: int, i: int) -> float:
    """Probability a level-``i`` node avoids all ``xi`` uniformly placed nogoods.

    Ratio C(b^k C(mu,k) - C(i,k), xi) / C(b^k C(mu,k), xi), evaluated in log space.
    """
    if not 0 <= i <= mu or k < 1 or b < 1:
        raise ValueError(f"invalid parameters mu={mu} b={b} k={k} i={i}")
    pool = b**k * math.comb(mu, k)
    if not 0 <= xi <= pool:
        raise ValueError(f"xi={xi} outside [0, {pool}]")
    covered = math.comb(i, k)
    if xi > pool - covered:
        return 0.0
    if xi == 0 or covered == 0:
        return 1.0
    return math.exp(_log_binom(pool - covered, xi) - _log_binom(pool, xi))


def p_asymptotic(mu: float, b: int, k: int, beta_ratio: float, i: float) -> float:
    """``b ** (-mu * beta_ratio * (i / mu) ** k)``."""
    return float(b ** (-mu * beta_ratio * (i / mu) ** k))


def chebyshev_u(n: int, x):
    """Chebyshev polynomial of the second kind by three-term recursion; U_{-1} = 0."""
    if n < -1:
        raise ValueError("n must be >= -1")
    prev, cur = 0.0 * x, 1.0 + 0.0 * x
    if n == -1:
        return prev
    for _ in range(n):
        prev, cur = cur, 2 * x * cur - prev
    return cur


def chebyshev_amplitude(u: complex, n: int) -> complex:
    """Exact target amplitude after ``n`` amplification steps with overlap ``u``."""
    a = abs(u)
    if a == 0:
        raise ValueError("overlap u = 0 has no direction")
    if a > 1 + 1e-12:
        raise ValueError(f"|u| = {a} exceeds 1")
    sign = -1 if n % 2 else 1
    return complex(sign * (u * chebyshev_u(2 * n, a) - (u / a) * chebyshev_u(2 * n - 1, a)))


def chebyshev_matrix(u: complex, n: int) -> np.ndarray:
    """Closed form of the n-th power of the 2x2 amplification matrix for overlap ``u``."""
    if n == 0:
        return np.eye(2, dtype=complex)
    a = abs(u)
    ph = u / a
    sign = -1 if n % 2 else 1
    u_odd = chebyshev_u(2 * n - 1, a)
    return sign * np.array([
        [chebyshev_u(2 * n, a), -ph * u_odd],
        [np.conj(ph) * u_odd, -chebyshev_u(2 * n - 2, a)],
    ], dtype=complex)


def amplification_matrix(u: complex) -> np.ndarray:
    return np.array([[1 - 4 * abs(u) ** 2, 2 * u], [-2 * np.conj(u), 1]], dtype=complex)


def small_angle_amplitude(u: complex, n: int) -> complex:
    a = abs(u)
    return complex(u * math.cos(2 * n * a) + (u / a) * math.sin(2 * n * a))


def t_c_analytic(mu: int, b: int, k: int, beta_ratio: float, i: float) -> float:
    """Classical nested cost (b^i + p(i) b^mu) / (p(mu) b^mu)."""
    pi_ = p_asymptotic(mu, b, k, beta_ratio, i)
    pmu = p_asymptotic(mu, b, k, beta_ratio, mu)
    return (b**i + pi_ * b**mu) / (pmu * b**mu)


def t_q_analytic(mu: int, b: int, k: int, beta_ratio: float, i: float) -> float:
    """Quantum nested cost (sqrt(b^i) + sqrt(p(i) b^mu)) / sqrt(p(mu) b^mu)."""
    pi_ = p_asymptotic(mu, b, k, beta_ratio, i)
    pmu = p_asymptotic(mu, b, k, beta_ratio, mu)
    return (math.sqrt(b**i) + math.sqrt(pi_ * b**mu)) / math.sqrt(pmu * b**mu)


def predicted_cost(d_A: float, n_A: float, d_B: float, n_AB: float) -> float:
    """Classical nested cost (d_A + n_A d_B) / n_AB with known counts."""
    if n_AB <= 0:
        raise ValueError("cost undefined without solutions (n_AB = 0)")
    return (d_A + n_A * d_B) / n_AB


def predicted_quantum_cost(d_A: float, n_A: float, d_B: float, n_AB: float) -> float:
    if n_AB <= 0:
        raise ValueError("cost undefined without solutions (n_AB = 0)")
    return (math.sqrt(d_A) + math.sqrt(n_A * d_B)) / math.sqrt(n_AB)


def optimal_cut(beta_ratio: float, k: int) -> float:
    """Root in [0, 1] of beta_ratio * x^k + x - 1 = 0."""
    if beta_ratio < 0 or k < 1:
        raise ValueError("need beta_ratio >= 0 and k >= 1")
    if beta_ratio == 0:
        return 1.0
    return bisect(lambda x: beta_ratio * x**k + x - 1, 0.0, 1.0, xtol=_XTOL, rtol=4 * np.finfo(float).eps)


@dataclass(frozen=True)
class ScalingSolution:
    N: int
    x: tuple[float, ...]
    alpha: tuple[float, ...]
    beta_ratio: float
    k: int

    @property
    def alpha_0(self) -> float:
        return self.alpha[0]

    def row(self) -> list[float]:
        out = []
        for xn, an in zip(self.x, self.alpha):
            out += [xn, an]
        return out


def _levels(c: float, beta_ratio: float, k: int, N: int) -> list[float]:
    # x_N = c, x_n = beta_ratio * x_{n+1}^k + c
    xs = [c]
    for _ in range(N):
        if xs[-1] > 1:
            # x only grows upward; saturate so the shooting residual stays finite
            return [math.inf] * (N + 1)
        xs.append(beta_ratio * xs[-1] ** k + c)
    return xs[::-1]


def nesting_recurrences(k: int, beta_ratio: float, N: int) -> ScalingSolution:
    """Solve the depth-``N`` recurrences with x_0 = 1 and alpha_N = 1.

    alpha_n * x_n is the same constant c at every level, so x_N = c and each
    level above follows from the one below; c is fixed by shooting on x_0 = 1.
    """
    if not 1 <= N <= MAX_NESTING_DEPTH:
        raise ValueError(f"nesting depth N={N} outside [1, {MAX_NESTING_DEPTH}]")
    if beta_ratio < 0 or k < 1:
        raise ValueError("need beta_ratio >= 0 and k >= 1")
    if beta_ratio == 0:
        c, xs = 1.0, [1.0] * (N + 1)
    else:
        # x_0 is steep in c at large N, so c is bisected to machine precision
        c = bisect(lambda c: _levels(c, beta_ratio, k, N)[0] - 1, 0.0, 1.0,
                   xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=2000)
        xs = _levels(c, beta_ratio, k, N)
    residual = abs(xs[0] - 1)
    if residual > 1e-10:
        raise NumericalFailure("nesting recurrences did not converge", residual)
    xs[0] = 1.0
    alphas = [c / xn for xn in xs]
    alphas[-1] = 1.0
    return ScalingSolution(N, tuple(xs), tuple(alphas), beta_ratio, k)


def scaling_table(solutions: list[ScalingSolution]) -> tuple[list[str], list[list]]:
    """Header and rows N, x_0, alpha_0, x_1, alpha_1, ... to 3 decimals, padded with '-'."""
    width = max((s.N for s in solutions), default=0)
    header = ["N"]
    for n in range(width + 1):
        header += [f"x_{n}", f"alpha_{n}"]
    rows = []
    for s in solutions:
        cells = [f"{v:.3f}" for v in s.row()]
        rows.append([s.N] + cells + ["-"] * (2 * (width + 1) - len(cells)))
    return header, rows


def scaling_csv(solutions: list[ScalingSolution]) -> str:
    header, rows = scaling_table(solutions)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()
