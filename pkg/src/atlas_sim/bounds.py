"""Closed-form tail bounds and the truncation planner.

Everything here is deterministic arithmetic on model inputs: Gaussian tail
estimates for how far particles can wander by a horizon, growth diagnostics
for infinite initial configurations, and a planner that picks the smallest
finite truncation size meeting a failure-probability budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidBoundError, InvalidInputError, PlanInfeasibleError

__all__ = [
    "gaussian_tail",
    "leftmost_sup_bound",
    "kth_sup_bound",
    "bulk_inf_bound",
    "lyapunov_tail",
    "HypothesisReport",
    "hypothesis_report",
    "TruncationPlan",
    "truncation_plan",
]


def gaussian_tail(a: float) -> float:
    """Upper tail ``P(N(0,1) > a)``, accurate far into the tail."""
    a = float(a)
    if math.isnan(a):
        raise InvalidInputError("tail point must not be NaN")
    return 0.5 * math.erfc(a / math.sqrt(2.0))


def _check_time(t: float) -> float:
    t = float(t)
    if not (t > 0 and math.isfinite(t)):
        raise InvalidInputError(f"horizon must be a positive finite time, got {t}")
    return t


def leftmost_sup_bound(prefix_sum: float, ell: int, t: float, barrier: float) -> float:
    """Bound on the probability the leftmost particle exceeds ``barrier`` by ``t``.

    ``prefix_sum`` is the sum of the first ``ell`` initial positions; the
    bound compares the barrier against the averaged initial mass plus a
    Gaussian fluctuation of the ``ell``-block.
    """
    t = _check_time(t)
    ell = int(ell)
    if ell < 1:
        raise InvalidInputError(f"block length must be >= 1, got {ell}")
    prefix_sum = float(prefix_sum)
    if not math.isfinite(prefix_sum) or prefix_sum < 0:
        raise InvalidInputError(f"prefix sum must be finite and non-negative, got {prefix_sum}")
    if not math.isfinite(barrier):
        raise InvalidInputError(f"barrier must be finite, got {barrier}")
    arg = (ell * barrier - t - prefix_sum) / math.sqrt(ell * t)
    return min(1.0, 2.0 * gaussian_tail(arg))


def kth_sup_bound(prefix_sum: float, ell: int, t: float, barrier: float,
                  k: int, x_k0: float) -> float:
    """Bound on the probability the k-th ranked particle exceeds ``barrier`` by ``t``.

    Uses the reduced barrier ``(barrier - x_k0)/3``; raises
    :class:`InvalidBoundError` when the barrier does not clear the k-th
    initial position, since the estimate is vacuous there.
    """
    t = _check_time(t)
    k = int(k)
    if k < 2:
        raise InvalidInputError(f"rank must be >= 2, got {k}")
    reduced = (barrier - float(x_k0)) / 3.0
    if not reduced > 0:
        raise InvalidBoundError(
            f"barrier {barrier} must exceed the k-th initial position {x_k0}")
    ell = int(ell)
    if ell < 1:
        raise InvalidInputError(f"block length must be >= 1, got {ell}")
    prefix_sum = float(prefix_sum)
    if not math.isfinite(prefix_sum) or prefix_sum < 0:
        raise InvalidInputError(f"prefix sum must be finite and non-negative, got {prefix_sum}")
    front = 2.0 * gaussian_tail((ell * reduced - t - prefix_sum) / math.sqrt(ell * t))
    crowd = 4.0 * k * gaussian_tail(reduced / math.sqrt(t))
    return min(1.0, front + crowd)


def bulk_inf_bound(tail_positions, barrier: float, t: float,
                   tol: float = 1e-12, max_terms: int = 1_000_000) -> float:
    """Bound on the probability any particle beyond the kept block drops below ``barrier``.

    Sums ``2 * gaussian_tail((x_i - barrier)/sqrt(t))`` over the tail of
    initial positions, stopping once a term falls under the geometric
    envelope ``tol * 2**-i`` and charging the remainder ``tol * 2**(1-i)``.
    Saturates at 1 if the partial sums reach 1 or the terms fail to decay
    within ``max_terms``.
    """
    t = _check_time(t)
    if not (tol > 0):
        raise InvalidInputError(f"tolerance must be positive, got {tol}")
    if not math.isfinite(barrier):
        raise InvalidInputError(f"barrier must be finite, got {barrier}")
    sqrt_t = math.sqrt(t)
    total = 0.0
    i = 0
    for x in tail_positions:
        i += 1
        term = 2.0 * gaussian_tail((float(x) - barrier) / sqrt_t)
        if term < tol * 2.0 ** (-i):
            return min(1.0, total + tol * 2.0 ** (1 - i))
        total += term
        if total >= 1.0:
            return 1.0
        if i >= max_terms:
            return 1.0
    return min(1.0, total)


def lyapunov_tail(v, c2: float, d0: float, t: float, x: float) -> float:
    """Tail bound ``exp(-x/c1) * (exp(c1*d0 - t) + c2)`` from the drift condition.

    ``c1`` is the largest of ``v_j`` and ``1/v_j`` over the weight vector.
    Clamped to 1; evaluated without overflow for large ``c1*d0``.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise InvalidInputError("weight vector must be non-empty and one-dimensional")
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise InvalidInputError("weights must be positive finite reals")
    if not (c2 > 0 and math.isfinite(c2)):
        raise InvalidInputError(f"additive constant must be positive, got {c2}")
    if not (d0 >= 0 and math.isfinite(d0)):
        raise InvalidInputError(f"initial potential must be non-negative, got {d0}")
    if not (t >= 0 and math.isfinite(t)):
        raise InvalidInputError(f"time must be non-negative, got {t}")
    if not (x > 0 and math.isfinite(x)):
        raise InvalidInputError(f"level must be positive, got {x}")
    c1 = float(max(np.max(v), np.max(1.0 / v)))
    decay = x / c1
    transient_exp = c1 * d0 - t - decay
    if transient_exp >= 0.0:
        return 1.0
    return min(1.0, math.exp(transient_exp) + c2 * math.exp(-decay))


class _GapRule:
    """Lazy prefix sums over an initial gap sequence (1-based ``z_j``).

    Accepts a callable ``j -> z_j`` (infinite configurations) or a finite
    sequence.  ``position(j)`` is the j-th initial position with the lowest
    particle at the origin, i.e. ``z_1 + ... + z_{j-1}``.
    """

    def __init__(self, z):
        if callable(z):
            self._fn = z
            self._vals: list[float] = []
            self._limit = None
        else:
            vals = [float(v) for v in z]
            self._fn = None
            self._vals = vals
            self._limit = len(vals)
        self._prefix = [0.0]  # partial sums of z_1..z_i

    @property
    def limit(self) -> int | None:
        """Number of gaps available, or None when unbounded."""
        return self._limit

    def gap(self, j: int) -> float:
        if self._limit is not None and j > self._limit:
            raise InvalidInputError(
                f"gap sequence has {self._limit} entries; index {j} requested")
        while len(self._vals) < j:
            v = float(self._fn(len(self._vals) + 1))
            if not (v > 0 and math.isfinite(v)):
                raise InvalidInputError(
                    f"gaps must be positive finite reals, got z_{len(self._vals) + 1}={v}")
            self._vals.append(v)
        v = self._vals[j - 1]
        if not (v > 0 and math.isfinite(v)):
            raise InvalidInputError(f"gaps must be positive finite reals, got z_{j}={v}")
        return v

    def prefix(self, i: int) -> float:
        """Sum of the first ``i`` gaps."""
        while len(self._prefix) <= i:
            j = len(self._prefix)
            self._prefix.append(self._prefix[-1] + self.gap(j))
        return self._prefix[i]

    def position(self, j: int) -> float:
        return self.prefix(j - 1)

    def positions_from(self, j0: int):
        j = j0
        while True:
            if self._limit is not None and j - 1 > self._limit:
                return
            yield self.position(j)
            j += 1


def _as_schedule(spec, name: str):
    """Normalize a scalar or callable into a callable ``m -> value``."""
    if callable(spec):
        return spec
    try:
        const = float(spec)
    except (TypeError, ValueError):
        raise InvalidInputError(f"{name} must be a callable or a number") from None
    return lambda m: const


def _beta_prime(beta: float) -> float:
    if not (1.0 <= beta < 2.0):
        raise InvalidInputError(f"growth exponent must lie in [1, 2), got {beta}")
    bp = beta * beta / (1.0 + beta)
    # beta in [1, 2) pins the reduced exponent into [1/2, beta)
    assert 0.5 <= bp < beta
    return bp


@dataclass(frozen=True)
class HypothesisReport:
    """Window diagnostics for the growth/integrability conditions on a gap sequence."""

    beta: float
    beta_prime: float
    m_lo: int
    m_hi: int
    split: int
    a_max: float
    b_max: float
    c_min: float
    a_early: float
    a_late: float
    b_early: float
    b_late: float
    c_early: float
    c_late: float
    growth_ok: bool
    integrability_ok: bool
    mass_ok: bool
    theta_monotone: bool

    @property
    def passed(self) -> bool:
        return self.growth_ok and self.integrability_ok and self.mass_ok


def hypothesis_report(z, beta: float, theta, window: tuple[int, int]) -> HypothesisReport:
    """Check stability of the normalized prefix-sum statistics across a window.

    Computes, for each ``m`` in ``[m_lo, m_hi]``:

    * ``A_m = S_m / (m**beta * theta(m))`` (prefix-sum growth),
    * ``B_m = sum of (log z_j)_- over j <= m, same normalization``
      (integrability of small gaps),
    * ``C_m = S_m / (m**beta_prime * theta(m))`` (mass lower bound).

    The window splits at its geometric midpoint; the late half's maxima of
    ``A`` and ``B`` may not exceed the early half's by more than a factor of
    two, while the late half's min of ``C`` must exceed the early half's by
    at least a factor of two (mass must visibly grow across the window).
    ``beta = 1`` additionally requires ``theta(m) >= log m`` on the window.
    """
    rule = _GapRule(z)
    theta_fn = _as_schedule(theta, "theta")
    beta = float(beta)
    bp = _beta_prime(beta)
    m_lo, m_hi = int(window[0]), int(window[1])
    if m_lo < 2 or m_hi < m_lo:
        raise InvalidInputError(f"window must satisfy 2 <= m_lo <= m_hi, got {window}")
    if rule.limit is not None and m_hi > rule.limit:
        raise InvalidInputError(
            f"window end {m_hi} exceeds the {rule.limit} gaps provided")

    split = int(round(math.sqrt(m_lo * m_hi)))
    split = min(max(split, m_lo), m_hi - 1) if m_hi > m_lo else m_lo

    theta_vals = {}
    prev_theta = None
    theta_monotone = True
    a_vals = np.empty(m_hi - m_lo + 1)
    b_vals = np.empty(m_hi - m_lo + 1)
    c_vals = np.empty(m_hi - m_lo + 1)
    neg_log = 0.0
    for j in range(1, m_lo):
        neg_log += max(0.0, -math.log(rule.gap(j)))
    for idx, m in enumerate(range(m_lo, m_hi + 1)):
        th = float(theta_fn(m))
        if not (th > 0 and math.isfinite(th)):
            raise InvalidInputError(f"theta must be positive on the window, got theta({m})={th}")
        if beta == 1.0 and th < math.log(m):
            raise InvalidInputError(
                f"beta = 1 requires theta(m) >= log m on the window; "
                f"theta({m}) = {th} < {math.log(m):.6f}")
        if prev_theta is not None and th < prev_theta:
            theta_monotone = False
        prev_theta = th
        theta_vals[m] = th
        neg_log += max(0.0, -math.log(rule.gap(m)))
        s_m = rule.prefix(m)
        a_vals[idx] = s_m / (m ** beta * th)
        b_vals[idx] = neg_log / (m ** beta * th)
        c_vals[idx] = s_m / (m ** bp * th)

    n_early = split - m_lo + 1
    if m_hi > split:
        a_early = float(np.max(a_vals[:n_early]))
        a_late = float(np.max(a_vals[n_early:]))
        b_early = float(np.max(b_vals[:n_early]))
        b_late = float(np.max(b_vals[n_early:]))
        c_early = float(np.min(c_vals[:n_early]))
        c_late = float(np.min(c_vals[n_early:]))
    else:
        a_early = a_late = float(np.max(a_vals))
        b_early = b_late = float(np.max(b_vals))
        c_early = c_late = float(np.min(c_vals))

    return HypothesisReport(
        beta=beta, beta_prime=bp, m_lo=m_lo, m_hi=m_hi, split=split,
        a_max=float(np.max(a_vals)), b_max=float(np.max(b_vals)),
        c_min=float(np.min(c_vals)),
        a_early=a_early, a_late=a_late,
        b_early=b_early, b_late=b_late,
        c_early=c_early, c_late=c_late,
        growth_ok=a_late <= 2.0 * a_early,
        integrability_ok=b_late <= 2.0 * b_early,
        mass_ok=c_late >= 2.0 * c_early,
        theta_monotone=theta_monotone,
    )


@dataclass(frozen=True)
class TruncationPlan:
    """Smallest feasible truncation: keep ``m`` particles up to ``horizon``."""

    k: int
    m: int
    horizon: float
    barrier: float
    block: int
    eps_bound: float
    kth_term: float
    bulk_term: float
    margin: float
    beta: float
    beta_prime: float


def truncation_plan(z, k: int, beta: float, theta, eps: float,
                    psi=None, kappa: float | None = None,
                    m_max: int = 100_000) -> TruncationPlan:
    """Pick the smallest truncation size honoring a failure-probability budget.

    Scans ``m`` upward, at each candidate forming the horizon
    ``t_m = 2 m**beta theta(m) psi(m)``, the barrier
    ``Gamma_m = 36 m**beta' theta(m) psi(m)**(beta/(1+beta))`` and the block
    ``ell_m = floor(m**(beta/(1+beta)) psi(m)**(1/(1+beta)))``, then requiring

    * consistency: ``Gamma_m * ell_m / 12 >= t_m >= ell_m**(1+beta) * theta(ell_m)``,
    * headroom: the ``m``-th initial position clears ``(kappa + 1) * Gamma_m``,
    * budget: k-th-rank and bulk tail bounds sum to at most ``eps``.

    Raises :class:`PlanInfeasibleError` with a per-constraint diagnostic when
    no ``m <= m_max`` qualifies.
    """
    rule = _GapRule(z)
    theta_fn = _as_schedule(theta, "theta")
    psi_fn = _as_schedule(psi, "psi") if psi is not None else (lambda m: math.log1p(m))
    beta = float(beta)
    bp = _beta_prime(beta)
    k = int(k)
    if k < 2:
        raise InvalidInputError(f"monitored rank must be >= 2, got {k}")
    if not (0 < eps <= 1):
        raise InvalidInputError(f"failure budget must lie in (0, 1], got {eps}")
    if kappa is None:
        kappa = 1.0 / 9.0
    kappa = float(kappa)
    if (18.0 * kappa) ** 2 <= 2.0:
        raise InvalidInputError(
            f"headroom margin too small: need (18*kappa)**2 > 2, got kappa={kappa}")
    m_lo = k + 1
    if m_max < m_lo:
        raise InvalidInputError(f"m_max={m_max} below the smallest candidate {m_lo}")
    if rule.limit is not None and rule.limit < m_lo:
        raise InvalidInputError(
            f"gap sequence has {rule.limit} entries; need at least {m_lo}")

    fail_counts = {"block": 0, "consistency": 0, "headroom": 0, "budget": 0}
    last_failure = None
    prev_psi = None
    hi = m_max if rule.limit is None else min(m_max, rule.limit)
    for m in range(m_lo, hi + 1):
        th = float(theta_fn(m))
        ps = float(psi_fn(m))
        if not (th > 0 and math.isfinite(th)):
            raise InvalidInputError(f"theta must be positive, got theta({m})={th}")
        if not (0 < ps <= m):
            raise InvalidInputError(
                f"psi must satisfy 0 < psi(m) <= m, got psi({m})={ps}")
        if prev_psi is not None and ps < prev_psi:
            raise InvalidInputError(f"psi must be non-decreasing; dips at m={m}")
        prev_psi = ps

        horizon = 2.0 * m ** beta * th * ps
        barrier = 36.0 * m ** bp * th * ps ** (beta / (1.0 + beta))
        block = int(math.floor(m ** (beta / (1.0 + beta)) * ps ** (1.0 / (1.0 + beta))))
        if block < 1:
            fail_counts["block"] += 1
            last_failure = f"m={m}: block length floor came out below 1"
            continue
        block = min(block, m)
        th_block = float(theta_fn(block))
        if not (barrier * block / 12.0 >= horizon
                and horizon >= block ** (1.0 + beta) * th_block):
            fail_counts["consistency"] += 1
            last_failure = (f"m={m}: horizon {horizon:.6g} incompatible with "
                            f"barrier {barrier:.6g} and block {block}")
            continue
        if rule.position(m) < (kappa + 1.0) * barrier:
            fail_counts["headroom"] += 1
            last_failure = (f"m={m}: m-th initial position {rule.position(m):.6g} "
                            f"below headroom {(kappa + 1.0) * barrier:.6g}")
            continue
        prefix = sum(rule.position(j) for j in range(1, block + 1))
        try:
            kth_term = kth_sup_bound(prefix, block, horizon, barrier,
                                     k, rule.position(k))
        except InvalidBoundError:
            fail_counts["budget"] += 1
            last_failure = (f"m={m}: barrier {barrier:.6g} does not clear the "
                            f"k-th initial position {rule.position(k):.6g}")
            continue
        bulk_term = bulk_inf_bound(rule.positions_from(m + 1), barrier, horizon)
        eps_bound = kth_term + bulk_term
        if eps_bound <= eps:
            return TruncationPlan(k=k, m=m, horizon=horizon, barrier=barrier,
                                  block=block, eps_bound=eps_bound,
                                  kth_term=kth_term, bulk_term=bulk_term,
                                  margin=kappa, beta=beta, beta_prime=bp)
        fail_counts["budget"] += 1
        last_failure = (f"m={m}: tail budget {eps_bound:.6g} above eps={eps}")

    raise PlanInfeasibleError(
        f"no feasible truncation size up to m_max={hi}",
        diagnostic={"m_min": m_lo, "m_max": hi,
                    "fail_counts": fail_counts, "last_failure": last_failure})
