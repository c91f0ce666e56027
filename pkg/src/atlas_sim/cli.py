"""Command-line front end and the experiment drivers behind it.

Every subcommand reads an optional JSON config file plus flag overrides into
an :class:`ExperimentConfig`, runs one experiment, and emits a deterministic
report (JSON, or CSV for raw trajectories): identical config and seed give
byte-identical output.  Exit codes: 0 success, 2 configuration error,
3 infeasible truncation plan, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import bounds, engine, measures, stats
from .errors import (
    AtlasSimError,
    InvalidInputError,
    NumericalFailureError,
    PlanInfeasibleError,
)
from .model import make_atlas
from .rng import PathBundle

__all__ = [
    "ExperimentConfig",
    "main",
    "simulate_experiment",
    "stationarity_experiment",
    "converge_experiment",
    "couple_experiment",
    "plan_truncation_experiment",
    "truncation_failure_mc",
    "scaling_experiment",
    "entropy_report",
    "identities_report",
]

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERICAL = 4


@dataclass(frozen=True)
class ExperimentConfig:
    """Merged configuration of one subcommand invocation.

    ``seed`` is mandatory for every stochastic experiment -- there is no
    entropy-source fallback, so runs are reproducible by construction.
    """

    subcommand: str
    seed: int | None
    out: str | None
    params: dict = field(default_factory=dict)

    def require_seed(self) -> int:
        if self.seed is None:
            raise InvalidInputError(
                "a seed is required (set --seed or the config key \"seed\")")
        return int(self.seed)

    def get(self, key, default=None):
        return self.params.get(key, default)


# ---------------------------------------------------------------------------
# initial-condition specs


class _InitSpec:
    """Initial gap distribution (or fixed vector) parsed from config.

    Kinds: ``stationary`` (finite free-system stationary law), ``iid``
    (constant rate), ``linear`` (rates ``lam + k*a``), ``constant`` (fixed
    gap value), ``explicit`` (fixed gap vector).  Measure kinds accept a
    ``condition`` block restricting every coordinate above/below a threshold.
    """

    def __init__(self, spec, m: int, gamma: float, right_anchored: bool):
        if spec is None:
            spec = ({"kind": "iid", "rate": 2.0 * gamma} if right_anchored
                    else {"kind": "stationary"})
        if not isinstance(spec, dict) or "kind" not in spec:
            raise InvalidInputError("init spec must be an object with a \"kind\" key")
        self.raw = dict(spec)
        kind = spec["kind"]
        n = m - 1
        self.fixed = None
        self.measure = None
        if kind == "stationary":
            self.measure = measures.stationary_measure(m, float(spec.get("gamma", gamma)))
        elif kind == "iid":
            rate = float(spec.get("rate", 2.0 * gamma))
            self.measure = measures.ProductExponentialMeasure(rates=(rate,) * n)
        elif kind == "linear":
            self.measure = measures.linear_rate_measure(
                m, float(spec["lam"]), float(spec.get("a", 0.0)))
        elif kind == "constant":
            self.fixed = np.full(n, float(spec["value"]))
        elif kind == "explicit":
            z = np.asarray(spec["z"], dtype=np.float64)
            if z.shape != (n,):
                raise InvalidInputError(
                    f"explicit init needs {n} gaps, got shape {z.shape}")
            self.fixed = z
        else:
            raise InvalidInputError(f"unknown init kind {kind!r}")
        cond = spec.get("condition")
        if cond is not None:
            if self.measure is None:
                raise InvalidInputError("conditioning applies to measure inits only")
            direction = cond.get("direction")
            threshold = cond.get("threshold", 1.0)
            if direction == "above":
                self.measure = measures.conditioned_above(self.measure, threshold)
            elif direction == "below":
                self.measure = measures.conditioned_below(self.measure, threshold)
            else:
                raise InvalidInputError(
                    "condition direction must be \"above\" or \"below\"")

    def sampler(self):
        if self.fixed is not None:
            fixed = self.fixed
            return lambda rng, spec: fixed
        meas = self.measure
        return lambda rng, spec: measures.sample(meas, rng)

    def describe(self) -> dict:
        return self.raw


# ---------------------------------------------------------------------------
# experiments (importable; the CLI handlers below are thin wrappers)


def _ensure_times(times, T: float):
    times = [float(t) for t in times]
    if any(t <= 0 or t > T * (1 + 1e-12) for t in times):
        raise InvalidInputError(f"report times must lie in (0, T={T}]")
    return times


def _ks_entry(index: int, rate: float, result: stats.KsResult) -> dict:
    return {
        "index": index,
        "rate": rate,
        "statistic": result.statistic,
        "n": result.n,
        "critical": result.critical(),
        "pass": result.passed,
    }


def simulate_experiment(m: int, gamma: float, right_anchored: bool, T: float,
                        dt: float, seed: int, init_spec=None,
                        snapshot_times=None) -> tuple[list[str], list[list[float]]]:
    """One spacing-scheme trajectory; returns CSV header and rows.

    Columns: snapshot time, the gap vector, the leading position, and the
    per-gap cumulative local times.
    """
    spec = make_atlas(m, gamma, right_anchored)
    init = _InitSpec(init_spec, m, gamma, right_anchored)
    bundle = PathBundle(seed=seed, dt=dt)
    z0 = init.sampler()(bundle.init_rng(0), spec)
    if snapshot_times is None:
        n_steps = int(round(T / dt)) if dt > 0 else 0
        snapshot_times = ([0.0] if n_steps == 0
                          else np.linspace(0.0, T, min(n_steps, 100) + 1))
    result = engine.run(spec, z0, T, dt, bundle, snapshot_times=snapshot_times)
    n = m - 1
    header = (["time"] + [f"z_{j}" for j in range(1, n + 1)]
              + ["X_1"] + [f"L_{j}" for j in range(1, n + 1)])
    rows = []
    for i, t in enumerate(result.times):
        rows.append([float(t)] + [float(v) for v in result.snapshots[i]]
                    + [float(result.leading[i])]
                    + [float(v) for v in result.local_snapshots[i]])
    return header, rows


def stationarity_experiment(m: int, gamma: float, right_anchored: bool,
                            T: float, dt: float, n_replicas: int, seed: int,
                            init_spec=None, scheme: str = "named",
                            alpha: float = stats.DEFAULT_ALPHA) -> dict:
    """Start at (by default) the stationary gap law, run to ``T``, and KS-test
    every gap coordinate against its stationary exponential rate."""
    spec = make_atlas(m, gamma, right_anchored)
    init = _InitSpec(init_spec, m, gamma, right_anchored)
    result = engine.run_replicas(spec, init.sampler(), n_replicas, T, dt, seed,
                                 scheme=scheme)
    if right_anchored:
        rates = np.full(m - 1, 2.0 * gamma)
    else:
        rates = measures.stationary_rates(m, gamma)
    coords = []
    for j in range(m - 1):
        ks = stats.ks_exponential(result.spacings[:, j], float(rates[j]), alpha)
        coords.append(_ks_entry(j + 1, float(rates[j]), ks))
    return {
        "schema_version": SCHEMA_VERSION,
        "subcommand": "stationarity",
        "m": m, "gamma": gamma, "right_anchored": right_anchored,
        "T": T, "dt": dt, "replicas": n_replicas, "seed": seed,
        "scheme": scheme, "alpha": alpha, "init": init.describe(),
        "coordinates": coords,
        "all_pass": all(c["pass"] for c in coords),
    }


def converge_experiment(m: int, gamma: float, direction: str, threshold,
                        n_coords: int, rate: float, T: float, dt: float,
                        n_replicas: int, seed: int,
                        alpha: float = stats.DEFAULT_ALPHA) -> dict:
    """Start from the stationary law conditioned above/below a threshold and
    KS-test the lowest gap coordinates against Exp(``rate``) at time ``T``."""
    if direction not in ("above", "below"):
        raise InvalidInputError(f"direction must be 'above' or 'below', got {direction!r}")
    if not 1 <= n_coords <= m - 1:
        raise InvalidInputError(f"coordinate count must lie in [1, {m - 1}], got {n_coords}")
    spec = make_atlas(m, gamma)
    base = measures.stationary_measure(m, gamma)
    cond = (measures.conditioned_above(base, threshold) if direction == "above"
            else measures.conditioned_below(base, threshold))
    result = engine.run_replicas(
        spec, lambda rng, s: measures.sample(cond, rng),
        n_replicas, T, dt, seed, scheme="named")
    coords = []
    for j in range(n_coords):
        ks = stats.ks_exponential(result.spacings[:, j], rate, alpha)
        coords.append(_ks_entry(j + 1, rate, ks))
    return {
        "schema_version": SCHEMA_VERSION,
        "subcommand": "converge",
        "m": m, "gamma": gamma, "direction": direction,
        "threshold": threshold if np.isscalar(threshold) else list(map(float, threshold)),
        "coordinates_tested": n_coords, "rate": rate,
        "T": T, "dt": dt, "replicas": n_replicas, "seed": seed, "alpha": alpha,
        "coordinates": coords,
        "all_pass": all(c["pass"] for c in coords),
    }


def couple_experiment(m: int, gamma: float, threshold, T: float, dt: float,
                      n_pairs: int, seed: int, snapshot_times=None,
                      tol: float = 1e-12) -> dict:
    """Ordered pairs on shared noise: lower member starts conditioned below
    the threshold, upper conditioned above; reports the fraction of
    (snapshot, pair, coordinate) entries breaking the order."""
    spec = make_atlas(m, gamma)
    base = measures.stationary_measure(m, gamma)
    lo_meas = measures.conditioned_below(base, threshold)
    hi_meas = measures.conditioned_above(base, threshold)
    if snapshot_times is None:
        snapshot_times = np.linspace(T / 10.0, T, 10) if T > 0 else [0.0]
    result = engine.run_coupled_replicas(
        spec,
        lambda rng, s: measures.sample(lo_meas, rng),
        lambda rng, s: measures.sample(hi_meas, rng),
        n_pairs, T, dt, seed, snapshot_times=snapshot_times)
    frac = stats.domination_violation(result.lower, result.upper, tol)
    return {
        "schema_version": SCHEMA_VERSION,
        "subcommand": "couple",
        "m": m, "gamma": gamma,
        "threshold": threshold if np.isscalar(threshold) else list(map(float, threshold)),
        "T": T, "dt": dt, "pairs": n_pairs, "seed": seed,
        "snapshot_times": [float(t) for t in result.times],
        "entries": int(result.lower.size),
        "violation_tolerance": tol,
        "violation_fraction": frac,
    }


_Z_RULES = {
    "constant": lambda p: (lambda j: float(p.get("value", 1.0))),
    "exp-decay": lambda p: (lambda j: math.exp(-float(p.get("rate", 1.0)) * j)),
    "power": lambda p: (lambda j: float(p.get("scale", 1.0))
                        * j ** float(p.get("exponent", 0.0))),
}

_SCHEDULES = {
    "constant": lambda p: float(p.get("value", 1.0)),
    "log": lambda p: (lambda mm: math.log(mm)),
    "log1p": lambda p: (lambda mm: math.log1p(mm)),
    "power": lambda p: (lambda mm: float(p.get("scale", 1.0))
                        * mm ** float(p.get("exponent", 1.0))),
}


def _parse_rule(spec, name: str):
    """Gap rules and schedules come in as {"kind": ..., params...} objects."""
    table = _Z_RULES if name == "z" else _SCHEDULES
    if isinstance(spec, (int, float)) and name != "z":
        return float(spec)
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InvalidInputError(f"{name} rule must be an object with a \"kind\" key")
    if name == "z" and spec["kind"] == "explicit":
        return [float(v) for v in spec["z"]]
    try:
        build = table[spec["kind"]]
    except KeyError:
        raise InvalidInputError(f"unknown {name} rule kind {spec['kind']!r}") from None
    return build(spec)


def truncation_failure_mc(plan: bounds.TruncationPlan, z_rule, dt: float,
                          runs: int, seed: int, check_every: float = 0.05) -> dict:
    """Monte Carlo check of a truncation plan's failure budget.

    Simulates ``2m`` particles (named scheme) from the planned initial gaps
    and flags a run as failed when, at any monitoring time up to the horizon,
    a particle of initial index beyond ``m`` sits within the bottom ``k``
    ranks, or the ``k``-th ranked position reaches the barrier.
    """
    if runs < 1:
        raise InvalidInputError(f"need at least one run, got {runs}")
    rule = bounds._GapRule(z_rule)
    m2 = 2 * plan.m
    spec = make_atlas(m2, 1.0)
    z0_row = np.array([rule.gap(j) for j in range(1, m2)])
    z0 = np.tile(z0_row, (runs, 1))
    nb = engine._NamedBatch(spec, z0, dt)

    n_steps = int(round(plan.horizon / dt))
    n_checks = max(1, int(math.ceil(plan.horizon / max(check_every, dt))))
    check_times = np.linspace(plan.horizon / n_checks, plan.horizon, n_checks)
    _, snap_idx = engine._snapshot_steps(check_times, plan.horizon, dt)

    failed = np.zeros(runs, dtype=bool)

    def check(mi: int):
        kth = np.partition(nb.y, plan.k - 1, axis=1)[:, plan.k - 1]
        tail_min = nb.y[:, plan.m:].min(axis=1)
        np.logical_or(failed, tail_min <= kth, out=failed)
        np.logical_or(failed, kth >= plan.barrier, out=failed)

    bundle = PathBundle(seed=seed, dt=dt)
    gens = [bundle.noise_rng(r) for r in range(runs)]
    engine._drive(gens, nb.width, n_steps, snap_idx, nb.advance, check)

    n_fail = int(np.count_nonzero(failed))
    freq = n_fail / runs
    se = math.sqrt(max(freq * (1.0 - freq), 1.0 / runs) / runs)
    return {
        "runs": runs, "dt": dt, "failures": n_fail, "frequency": freq,
        "standard_error": se, "budget": plan.eps_bound,
        "threshold": plan.eps_bound + 3.0 * se,
        "pass": freq <= plan.eps_bound + 3.0 * se,
    }


def plan_truncation_experiment(z_spec, k: int, beta: float, theta_spec,
                               eps: float, psi_spec=None, kappa=None,
                               m_max: int = 100_000, window=None,
                               validate_runs: int = 0, validate_dt: float = 1e-3,
                               seed: int | None = None) -> dict:
    """Run the truncation planner; optional growth-window warning and MC check."""
    z_rule = _parse_rule(z_spec, "z")
    theta = _parse_rule(theta_spec, "theta")
    psi = _parse_rule(psi_spec, "psi") if psi_spec is not None else None

    warnings = []
    report_dict = None
    if window is None:
        window = (max(2, k + 1), 1000)
    try:
        report = bounds.hypothesis_report(z_rule, beta, theta,
                                          (int(window[0]), int(window[1])))
        report_dict = {
            "window": [report.m_lo, report.m_hi],
            "a_max": report.a_max, "b_max": report.b_max, "c_min": report.c_min,
            "growth_ok": report.growth_ok,
            "integrability_ok": report.integrability_ok,
            "mass_ok": report.mass_ok,
            "theta_monotone": report.theta_monotone,
            "passed": report.passed,
        }
        if not report.passed:
            warnings.append("growth diagnostics degrade across the window; "
                            "the planned bounds may be loose")
        if not report.theta_monotone:
            warnings.append("theta decreases somewhere on the window")
    except InvalidInputError as exc:
        warnings.append(f"growth diagnostics unavailable: {exc}")

    plan = bounds.truncation_plan(z_rule, k, beta, theta, eps,
                                  psi=psi, kappa=kappa, m_max=m_max)
    out = {
        "schema_version": SCHEMA_VERSION,
        "subcommand": "plan-truncation",
        "k": plan.k, "m": plan.m,
        "horizon": plan.horizon, "barrier": plan.barrier, "block": plan.block,
        "eps": eps, "eps_bound": plan.eps_bound,
        "kth_term": plan.kth_term, "bulk_term": plan.bulk_term,
        "margin": plan.margin, "beta": plan.beta, "beta_prime": plan.beta_prime,
        "hypothesis_report": report_dict,
        "warnings": warnings,
    }
    if validate_runs:
        if seed is None:
            raise InvalidInputError("a seed is required for plan validation runs")
        out["validation"] = truncation_failure_mc(plan, z_rule, validate_dt,
                                                  validate_runs, seed)
    return out


def scaling_experiment(mode: str, m: int, times, dt: float, n_replicas: int,
                       seed: int, gamma: float = 1.0, lam: float = 2.0,
                       a: float = 0.0) -> dict:
    """Leading-position statistics on a time grid.

    ``equilibrium`` mode starts at the finite stationary law and fits
    ``Var X_1(t) ~ t**slope``; ``front`` mode starts at the arithmetic-rate
    law (rates ``lam + k*a``) and reports the ballistic statistics
    ``X_1(t)/t``, ``X_1(t)/sqrt(t)`` and, for ``a > 0``, ``X_1(t) + a t``.
    """
    if mode not in ("equilibrium", "front"):
        raise InvalidInputError(f"mode must be 'equilibrium' or 'front', got {mode!r}")
    times = [float(t) for t in times]
    T = max(times)
    times = _ensure_times(times, T)
    spec = make_atlas(m, gamma)
    if mode == "equilibrium":
        meas = measures.stationary_measure(m, gamma)
    else:
        meas = measures.linear_rate_measure(m, lam, a)
    result = engine.run_replicas(
        spec, lambda rng, s: measures.sample(meas, rng),
        n_replicas, T, dt, seed, snapshot_times=times, scheme="named")

    rows = []
    for i, t in enumerate(times):
        x = result.leading_path[:, i]
        n = x.size
        mean = float(x.mean())
        var = float(x.var(ddof=1))
        se_mean = math.sqrt(var / n)
        # sampling error of the variance via the fourth central moment
        m4 = float(np.mean((x - mean) ** 4))
        var_of_var = max(m4 - var * var * (n - 3) / (n - 1), 0.0) / n
        row = {
            "t": t, "n": n, "mean": mean, "se_mean": se_mean,
            "var": var, "rel_se_var": math.sqrt(var_of_var) / var if var > 0 else math.inf,
            "mean_over_t": mean / t,
            "mean_over_sqrt_t": mean / math.sqrt(t),
            "se_over_sqrt_t": se_mean / math.sqrt(t),
        }
        if mode == "front" and a > 0:
            shifted = x + a * t
            row["mean_shifted"] = float(shifted.mean())
            row["se_shifted"] = se_mean
        rows.append(row)

    out = {
        "schema_version": SCHEMA_VERSION,
        "subcommand": "scaling",
        "mode": mode, "m": m, "gamma": gamma,
        "dt": dt, "replicas": n_replicas, "seed": seed,
        "times": times, "rows": rows,
    }
    if mode == "equilibrium":
        fit = stats.scaling_fit(times, [r["var"] for r in rows])
        out["fit"] = {"slope": fit.slope, "intercept": fit.intercept,
                      "r_squared": fit.r_squared}
    else:
        out["lam"] = lam
        out["a"] = a
    return out


def entropy_report(m: int, z, rates_from=None, rates_to=None) -> dict:
    """Closed-form entropies of threshold conditionings (and an optional KL)."""
    z = np.broadcast_to(np.asarray(z, dtype=np.float64), (m - 1,))
    above = measures.entropy_conditioned_above(m, z)
    below = measures.entropy_conditioned_below(m, z)
    out = {
        "schema_version": SCHEMA_VERSION,
        "subcommand": "entropy",
        "m": m, "z": [float(v) for v in z],
        "entropy_above": above,
        "entropy_below": None if math.isinf(below) else below,
        "entropy_below_infinite": math.isinf(below),
    }
    if rates_from is not None or rates_to is not None:
        if rates_from is None or rates_to is None:
            raise InvalidInputError("kl needs both rates_from and rates_to")
        out["kl"] = measures.kl_product_exp(rates_from, rates_to)
    return out


def identities_report(m_lo: int, m_hi: int, tol: float = 1e-12) -> dict:
    """Residuals of the stationary-rate balance identities over a size range."""
    if tol <= 0:
        raise InvalidInputError(f"tolerance must be positive, got {tol}")
    sizes = range(max(2, m_lo), m_hi + 1)
    worst_free = None
    worst_anchored = None
    count = 0
    for m in sizes:
        rf = stats.alpha_identity_check(m)
        ra = stats.anchored_identity_check(m)
        worst_free = rf if worst_free is None else max(worst_free, rf)
        worst_anchored = ra if worst_anchored is None else max(worst_anchored, ra)
        count += 1
    return {
        "schema_version": SCHEMA_VERSION,
        "subcommand": "check-identities",
        "m_lo": m_lo, "m_hi": m_hi, "count": count, "tolerance": tol,
        "max_residual_free": worst_free,
        "max_residual_anchored": worst_anchored,
        "all_below_tol": (count == 0
                          or (worst_free <= tol and worst_anchored <= tol)),
    }


# ---------------------------------------------------------------------------
# CLI plumbing


def _emit_json(report: dict, out: str | None):
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _emit_csv(header: list[str], rows, out: str | None):
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in row))
        buf.write("\n")
    text = buf.getvalue()
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _parse_times(text: str):
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise InvalidInputError(f"could not parse time list {text!r}") from None


def _build_config(args) -> ExperimentConfig:
    params = {}
    if args.config is not None:
        with open(args.config, "r", encoding="utf-8") as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise InvalidInputError("config file must hold a JSON object")
        params.update(loaded)
    for key, value in vars(args).items():
        if key in ("config", "func", "subcommand") or value is None:
            continue
        params[key] = value
    seed = params.pop("seed", None)
    out = params.pop("out", None)
    return ExperimentConfig(subcommand=args.subcommand, seed=seed, out=out,
                            params=params)


def _common_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config file; flags override its keys")
    p.add_argument("--seed", type=int, help="RNG seed (required for stochastic runs)")
    p.add_argument("--out", help="output path (default: stdout)")


def _model_flags(p: argparse.ArgumentParser, anchored: bool = True):
    p.add_argument("--m", type=int, help="number of particles")
    p.add_argument("--gamma", type=float, help="drift of the lowest rank")
    if anchored:
        p.add_argument("--right-anchored", dest="right_anchored",
                       action="store_true", default=None,
                       help="freeze the highest rank")


def _cmd_simulate(cfg: ExperimentConfig) -> int:
    header, rows = simulate_experiment(
        m=int(cfg.get("m", 10)), gamma=float(cfg.get("gamma", 1.0)),
        right_anchored=bool(cfg.get("right_anchored", False)),
        T=float(cfg.get("T", 1.0)), dt=float(cfg.get("dt", 1e-3)),
        seed=cfg.require_seed(), init_spec=cfg.get("init"),
        snapshot_times=cfg.get("snapshots"))
    _emit_csv(header, rows, cfg.out)
    return EXIT_OK


def _cmd_stationarity(cfg: ExperimentConfig) -> int:
    report = stationarity_experiment(
        m=int(cfg.get("m", 10)), gamma=float(cfg.get("gamma", 1.0)),
        right_anchored=bool(cfg.get("right_anchored", False)),
        T=float(cfg.get("T", 5.0)), dt=float(cfg.get("dt", 1e-3)),
        n_replicas=int(cfg.get("replicas", 1000)), seed=cfg.require_seed(),
        init_spec=cfg.get("init"), scheme=cfg.get("scheme", "named"),
        alpha=float(cfg.get("alpha", stats.DEFAULT_ALPHA)))
    _emit_json(report, cfg.out)
    return EXIT_OK


def _cmd_converge(cfg: ExperimentConfig) -> int:
    m = int(cfg.get("m", 20))
    gamma = float(cfg.get("gamma", 1.0))
    report = converge_experiment(
        m=m, gamma=gamma,
        direction=cfg.get("direction", "above"),
        threshold=cfg.get("threshold", 1.0),
        n_coords=int(cfg.get("coordinates", 3)),
        rate=float(cfg.get("rate", 2.0 * gamma)),
        T=float(cfg.get("T", 100.0)), dt=float(cfg.get("dt", 1e-3)),
        n_replicas=int(cfg.get("replicas", 2000)), seed=cfg.require_seed(),
        alpha=float(cfg.get("alpha", stats.DEFAULT_ALPHA)))
    _emit_json(report, cfg.out)
    return EXIT_OK


def _cmd_couple(cfg: ExperimentConfig) -> int:
    report = couple_experiment(
        m=int(cfg.get("m", 10)), gamma=float(cfg.get("gamma", 1.0)),
        threshold=cfg.get("threshold", 1.0),
        T=float(cfg.get("T", 2.0)), dt=float(cfg.get("dt", 1e-3)),
        n_pairs=int(cfg.get("pairs", 200)), seed=cfg.require_seed(),
        snapshot_times=cfg.get("snapshots"))
    _emit_json(report, cfg.out)
    return EXIT_OK


def _cmd_plan_truncation(cfg: ExperimentConfig) -> int:
    validate_runs = int(cfg.get("validate_runs", 0))
    report = plan_truncation_experiment(
        z_spec=cfg.get("z", {"kind": "constant", "value": 1.0}),
        k=int(cfg.get("k", 3)), beta=float(cfg.get("beta", 1.0)),
        theta_spec=cfg.get("theta", {"kind": "log"}),
        eps=float(cfg.get("eps", 0.05)),
        psi_spec=cfg.get("psi"),
        kappa=cfg.get("kappa"),
        m_max=int(cfg.get("m_max", 100_000)),
        window=cfg.get("window"),
        validate_runs=validate_runs,
        validate_dt=float(cfg.get("validate_dt", 1e-3)),
        seed=cfg.require_seed() if validate_runs else cfg.seed)
    _emit_json(report, cfg.out)
    return EXIT_OK


def _cmd_scaling(cfg: ExperimentConfig) -> int:
    mode = cfg.get("mode", "equilibrium")
    times = cfg.get("times")
    if isinstance(times, str):
        times = _parse_times(times)
    if times is None:
        times = [1.0, 2.0, 4.0, 8.0] if mode == "equilibrium" else [10.0, 25.0, 50.0]
    report = scaling_experiment(
        mode=mode, m=int(cfg.get("m", 100)), times=times,
        dt=float(cfg.get("dt", 1e-3)), n_replicas=int(cfg.get("replicas", 2000)),
        seed=cfg.require_seed(), gamma=float(cfg.get("gamma", 1.0)),
        lam=float(cfg.get("lam", 2.0)), a=float(cfg.get("a", 0.0)))
    _emit_json(report, cfg.out)
    return EXIT_OK


def _cmd_entropy(cfg: ExperimentConfig) -> int:
    m = int(cfg.get("m", 10))
    z = cfg.get("z", 1.0)
    report = entropy_report(m, z, cfg.get("rates_from"), cfg.get("rates_to"))
    _emit_json(report, cfg.out)
    return EXIT_OK


def _cmd_check_identities(cfg: ExperimentConfig) -> int:
    report = identities_report(
        m_lo=int(cfg.get("m_lo", 2)), m_hi=int(cfg.get("m_hi", 200)),
        tol=float(cfg.get("tol", 1e-12)))
    _emit_json(report, cfg.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="atlas-sim",
        description="Simulator and verification harness for rank-based "
                    "competing Brownian particle systems.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("simulate", help="one trajectory to CSV")
    _common_flags(p)
    _model_flags(p)
    p.add_argument("--T", type=float, help="horizon")
    p.add_argument("--dt", type=float, help="step size")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("stationarity", help="KS test of every gap at time T")
    _common_flags(p)
    _model_flags(p)
    p.add_argument("--T", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--replicas", type=int)
    p.add_argument("--scheme", choices=("named", "spacing"))
    p.set_defaults(func=_cmd_stationarity)

    p = sub.add_parser("converge", help="relaxation from a conditioned start")
    _common_flags(p)
    _model_flags(p, anchored=False)
    p.add_argument("--direction", choices=("above", "below"))
    p.add_argument("--threshold", type=float)
    p.add_argument("--coordinates", type=int, help="lowest gaps to test")
    p.add_argument("--rate", type=float, help="target exponential rate")
    p.add_argument("--T", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--replicas", type=int)
    p.set_defaults(func=_cmd_converge)

    p = sub.add_parser("couple", help="ordered pairs on shared noise")
    _common_flags(p)
    _model_flags(p, anchored=False)
    p.add_argument("--threshold", type=float)
    p.add_argument("--T", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--pairs", type=int)
    p.set_defaults(func=_cmd_couple)

    p = sub.add_parser("plan-truncation", help="smallest feasible truncation size")
    _common_flags(p)
    p.add_argument("--k", type=int, help="monitored rank")
    p.add_argument("--beta", type=float, help="growth exponent")
    p.add_argument("--eps", type=float, help="failure budget")
    p.add_argument("--kappa", type=float, help="headroom margin")
    p.add_argument("--m-max", dest="m_max", type=int)
    p.add_argument("--validate-runs", dest="validate_runs", type=int)
    p.add_argument("--validate-dt", dest="validate_dt", type=float)
    p.set_defaults(func=_cmd_plan_truncation)

    p = sub.add_parser("scaling", help="leading-position statistics on a time grid")
    _common_flags(p)
    _model_flags(p, anchored=False)
    p.add_argument("--mode", choices=("equilibrium", "front"))
    p.add_argument("--times", help="comma-separated report times")
    p.add_argument("--dt", type=float)
    p.add_argument("--replicas", type=int)
    p.add_argument("--lam", type=float, help="base rate (front mode)")
    p.add_argument("--a", type=float, help="rate increment (front mode)")
    p.set_defaults(func=_cmd_scaling)

    p = sub.add_parser("entropy", help="closed-form conditioning entropies")
    _common_flags(p)
    p.add_argument("--m", type=int)
    p.add_argument("--z-value", dest="z", type=float, help="constant threshold")
    p.set_defaults(func=_cmd_entropy)

    p = sub.add_parser("check-identities", help="stationary-rate balance residuals")
    _common_flags(p)
    p.add_argument("--m-lo", dest="m_lo", type=int)
    p.add_argument("--m-hi", dest="m_hi", type=int)
    p.add_argument("--tol", type=float)
    p.set_defaults(func=_cmd_check_identities)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _build_config(args)
        return args.func(cfg)
    except PlanInfeasibleError as exc:
        payload = {"error": str(exc), "diagnostic": exc.diagnostic}
        sys.stderr.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return EXIT_INFEASIBLE
    except NumericalFailureError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    except AtlasSimError as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
