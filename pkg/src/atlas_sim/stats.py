"""Goodness-of-fit and ordering statistics used by the verification harness.

All tests are exact finite-sample constructions (no asymptotic plug-ins
beyond the standard Kolmogorov-Smirnov critical-value formula), so the
harness can state pass/fail at explicit significance levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "KsResult",
    "ks_exponential",
    "ks_critical_value",
    "domination_violation",
    "stochastic_dominance",
    "ExponentFit",
    "scaling_fit",
    "alpha_identity_check",
    "anchored_identity_check",
]

DEFAULT_ALPHA = 0.001


def ks_critical_value(n: int, alpha: float = DEFAULT_ALPHA) -> float:
    """One-sample KS critical value ``sqrt(-ln(alpha/2)/2) / sqrt(n)``."""
    if n < 1:
        raise InvalidInputError(f"sample size must be positive, got {n}")
    if not 0 < alpha < 1:
        raise InvalidInputError(f"significance level must lie in (0, 1), got {alpha}")
    return math.sqrt(-math.log(alpha / 2.0) / 2.0) / math.sqrt(n)


@dataclass(frozen=True)
class KsResult:
    """One-sample Kolmogorov-Smirnov outcome at a fixed significance level."""

    statistic: float
    n: int
    alpha: float = DEFAULT_ALPHA

    def critical(self, alpha: float | None = None) -> float:
        return ks_critical_value(self.n, self.alpha if alpha is None else alpha)

    @property
    def passed(self) -> bool:
        return self.statistic < self.critical()


def ks_exponential(samples, rate: float, alpha: float = DEFAULT_ALPHA) -> KsResult:
    """Exact KS distance between a sample and the Exp(``rate``) distribution.

    Computes ``max_i max(i/n - F(x_(i)), F(x_(i)) - (i-1)/n)`` over the order
    statistics with ``F(x) = 1 - exp(-rate x)``.  Needs at least 10 points
    for the critical-value formula to be meaningful.
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    n = x.size
    if n < 10:
        raise InvalidInputError(f"need at least 10 samples, got {n}")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise InvalidInputError("samples must be finite and non-negative")
    if not rate > 0:
        raise InvalidInputError(f"rate must be positive, got {rate}")
    x = np.sort(x)
    cdf = -np.expm1(-rate * x)
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - cdf)
    d_minus = np.max(cdf - (i - 1) / n)
    return KsResult(statistic=float(max(d_plus, d_minus)), n=n, alpha=alpha)


def domination_violation(lower_paths, upper_paths, tol: float = 1e-12) -> float:
    """Fraction of entries where the lower-start path exceeds the upper-start path.

    Both arrays must have the same shape (replica x time x coordinate, or any
    common layout); entries count as violations when
    ``lower > upper + tol``.
    """
    lo = np.asarray(lower_paths, dtype=np.float64)
    hi = np.asarray(upper_paths, dtype=np.float64)
    if lo.shape != hi.shape:
        raise InvalidInputError(
            f"paired trajectories must share a shape, got {lo.shape} vs {hi.shape}")
    if lo.size == 0:
        raise InvalidInputError("paired trajectories must be non-empty")
    return float(np.mean(lo > hi + tol))


def stochastic_dominance(samples_a, samples_b) -> float:
    """Largest empirical-CDF excess of sample B over sample A.

    Returns ``max_x (F_B(x) - F_A(x))`` over the merged sample grid: near
    zero exactly when B stochastically dominates A (B's CDF sits below A's),
    and large positive when the claimed-dominating B is in fact smaller.
    """
    a = np.sort(np.asarray(samples_a, dtype=np.float64).ravel())
    b = np.sort(np.asarray(samples_b, dtype=np.float64).ravel())
    if a.size == 0 or b.size == 0:
        raise InvalidInputError("both samples must be non-empty")
    grid = np.concatenate([a, b])
    grid.sort(kind="stable")
    cdf_a = np.searchsorted(a, grid, side="right") / a.size
    cdf_b = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(cdf_b - cdf_a))


@dataclass(frozen=True)
class ExponentFit:
    """Least-squares power-law fit on log-log axes."""

    slope: float
    intercept: float
    r_squared: float
    points: tuple[tuple[float, float], ...]


def scaling_fit(times, values) -> ExponentFit:
    """Fit ``values ~ C * times**slope`` by least squares on logs.

    Needs at least three strictly positive points; exact power laws are
    recovered to rounding.
    """
    t = np.asarray(times, dtype=np.float64).ravel()
    v = np.asarray(values, dtype=np.float64).ravel()
    if t.shape != v.shape:
        raise InvalidInputError(f"times and values must match, got {t.shape} vs {v.shape}")
    if t.size < 3:
        raise InvalidInputError(f"need at least 3 points for a fit, got {t.size}")
    if np.any(t <= 0) or np.any(v <= 0) or not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
        raise InvalidInputError("times and values must be positive and finite")
    lt = np.log(t)
    lv = np.log(v)
    slope, intercept = np.polyfit(lt, lv, 1)
    resid = lv - (slope * lt + intercept)
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((lv - lv.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    pts = tuple((float(a), float(b)) for a, b in zip(lt, lv))
    return ExponentFit(slope=float(slope), intercept=float(intercept),
                       r_squared=r2, points=pts)


def alpha_identity_check(m: int) -> float:
    """Residual of the balance identity for the free-system stationary rates.

    With ``alpha_j = 2(1 - j/m)``, the discrete second difference
    ``(alpha_{k+1} - 2 alpha_k + alpha_{k-1})/2`` (missing neighbors read as
    zero) must equal ``-1`` at k = 1 and ``0`` elsewhere; returns the max
    absolute deviation, which should sit at rounding level for every m.
    """
    if m < 2:
        raise InvalidInputError(f"need at least 2 particles, got m={m}")
    j = np.arange(1, m)
    alpha = 2.0 * (1.0 - j / m)
    padded = np.concatenate([[0.0], alpha, [0.0]])
    c = 0.5 * (padded[2:] - 2.0 * padded[1:-1] + padded[:-2])
    target = np.zeros(m - 1)
    target[0] = -1.0
    return float(np.max(np.abs(c - target)))


def anchored_identity_check(m: int) -> float:
    """Residual of the balance identity for the anchored stationary rates.

    The anchored gap law is iid Exp(2): with ``v_j = 2`` the mixed second
    difference (zero left neighbor, free right edge with unit diagonal on the
    last row) must again equal ``-1`` at k = 1 and ``0`` elsewhere.
    """
    if m < 2:
        raise InvalidInputError(f"need at least 2 particles, got m={m}")
    n = m - 1
    v = np.full(n, 2.0)
    diag = np.full(n, 2.0)
    diag[-1] = 1.0
    left = np.concatenate([[0.0], v[:-1]])
    right = np.concatenate([v[1:], [0.0]])
    c = 0.5 * (left - diag * v + right)
    target = np.zeros(n)
    target[0] = -1.0
    return float(np.max(np.abs(c - target)))
