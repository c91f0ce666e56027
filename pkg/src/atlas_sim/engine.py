"""Time-stepping integrators for competing Brownian particle systems.

Two schemes are provided:

* *spacing scheme* -- explicit Euler on the gap vector followed by an exact
  one-step reflection solve (:func:`step_spacing`); tracks local times and
  the leading position, and supports coupled runs on shared noise.
* *named scheme* -- explicit Euler on particle positions with the drift
  assigned by the pre-step ranking (:func:`step_named`); no projection step,
  so its stationary law has far smaller time-discretization bias, which is
  why the distribution-level experiments run on it.

Replica ensembles are advanced in batches; per-replica noise comes from
:class:`~atlas_sim.rng.PathBundle` streams, so results are independent of
batch/chunk sizes and of the kernel backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels_numpy
from .backend import use_numba
from .errors import (
    InvalidInputError,
    InvalidStepError,
    NumericalFailureError,
)
from .model import ModelSpec, positions_from_spacings, rank
from .rng import PathBundle

__all__ = [
    "RunResult",
    "EnsembleResult",
    "CoupledEnsembleResult",
    "step_named",
    "step_spacing",
    "run",
    "run_coupled",
    "run_coupled_replicas",
    "run_replicas",
    "PROJECTION_TOL",
    "MAX_SWEEPS",
]

PROJECTION_TOL = 1e-12
MAX_SWEEPS = 10_000
_CHUNK_ELEMS = 1 << 23  # noise-buffer budget per chunk (elements)


def _kernels():
    if use_numba():
        from . import kernels_numba

        return kernels_numba
    return kernels_numpy


@dataclass(frozen=True, eq=False)
class RunResult:
    """Single-trajectory output on a snapshot grid.

    Attributes:
        times: ``(S,)`` snapshot times, strictly increasing.
        snapshots: ``(S, m-1)`` gap vectors at those times.
        leading: ``(S,)`` lowest position at those times.
        local_snapshots: ``(S, m-1)`` cumulative local times at those times.
        local_times: ``(m-1,)`` cumulative local times at the final time T.
    """

    times: np.ndarray
    snapshots: np.ndarray
    leading: np.ndarray
    local_snapshots: np.ndarray
    local_times: np.ndarray


@dataclass(frozen=True, eq=False)
class CoupledEnsembleResult:
    """Paired-ensemble output: spacing snapshots of both members of each pair.

    Attributes:
        times: ``(S,)`` snapshot times.
        lower: ``(S, N, m-1)`` gap snapshots of the lower-start member.
        upper: ``(S, N, m-1)`` gap snapshots of the upper-start member.
    """

    times: np.ndarray
    lower: np.ndarray
    upper: np.ndarray


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    """Replica-ensemble output (terminal state plus the leading-position path).

    Attributes:
        times: ``(S,)`` snapshot times.
        leading_path: ``(N, S)`` leading position per replica and snapshot.
        spacings: ``(N, m-1)`` terminal gap vectors.
        leading: ``(N,)`` terminal leading positions.
        local_times: ``(N, m-1)`` terminal cumulative local times
            (spacing scheme only; ``None`` for the named scheme).
    """

    times: np.ndarray
    leading_path: np.ndarray
    spacings: np.ndarray
    leading: np.ndarray
    local_times: np.ndarray | None


# ---------------------------------------------------------------------------
# validation helpers


def _check_dt(dt: float) -> float:
    if not (dt > 0 and math.isfinite(dt)):
        raise InvalidStepError(f"dt must be a positive finite real, got {dt}")
    return float(dt)


def _check_noise(xi, m: int) -> np.ndarray:
    xi = np.asarray(xi, dtype=np.float64)
    if xi.shape != (m,):
        raise InvalidInputError(f"noise vector must have shape ({m},), got {xi.shape}")
    if not np.all(np.isfinite(xi)):
        raise InvalidInputError("noise vector must be finite")
    return xi


def _check_gaps(z, n: int) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (n,):
        raise InvalidInputError(f"gap vector must have shape ({n},), got {z.shape}")
    if not np.all(np.isfinite(z)):
        raise InvalidInputError("gap vector must be finite")
    if z.size and z.min() < 0:
        raise InvalidInputError("gap vector must be non-negative")
    return z


def _step_count(T: float, dt: float) -> int:
    if not (T >= 0 and math.isfinite(T)):
        raise InvalidInputError(f"T must be a non-negative finite real, got {T}")
    return int(round(T / dt))


def _snapshot_steps(snapshot_times, T: float, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Map requested snapshot times onto step indices (nearest grid point)."""
    if snapshot_times is None:
        snapshot_times = [T]
    times = np.asarray(list(snapshot_times), dtype=np.float64)
    if times.ndim != 1 or times.size == 0:
        raise InvalidInputError("snapshot_times must be a non-empty 1-d sequence")
    if np.any(times < 0) or np.any(times > T * (1 + 1e-12) + 1e-12):
        raise InvalidInputError(f"snapshot times must lie in [0, T={T}]")
    if times.size > 1 and np.any(np.diff(times) <= 0):
        raise InvalidInputError("snapshot times must be strictly increasing")
    idx = np.rint(times / dt).astype(np.int64)
    return times, idx


def _gap_coefficients(spec: ModelSpec, dt: float):
    """Per-gap drift increments and diffusion vector for the spacing scheme."""
    g = spec.drift_array()
    sig = spec.diffusion_array()
    ddrift = (g[1:] - g[:-1]) * dt
    if spec.right_anchored:
        ddrift = ddrift.copy()
        ddrift[-1] = (0.0 - g[-2]) * dt
    return ddrift, sig, g[0] * dt, sig[0]


def _require_atlas_named(spec: ModelSpec):
    """The chunked named kernels assume drift on the minimum only and uniform diffusion."""
    g = spec.drift_array()
    sig = spec.diffusion_array()
    if np.any(g[1:] != 0.0) or np.any(sig != sig[0]):
        raise InvalidInputError(
            "named-scheme ensembles require drift on the lowest rank only "
            "and uniform diffusion; use step_named for general specs"
        )


# ---------------------------------------------------------------------------
# one-step operations


def step_named(spec: ModelSpec, y, dt: float, xi) -> np.ndarray:
    """One explicit Euler step in named coordinates.

    Each particle receives the drift/diffusion of its pre-step rank (ties at
    equal positions resolved by lowest named index).  When the spec is
    right-anchored the particle currently holding the top rank does not move.
    """
    dt = _check_dt(dt)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (spec.m,):
        raise InvalidInputError(f"positions must have shape ({spec.m},), got {y.shape}")
    xi = _check_noise(xi, spec.m)
    _, ranks = rank(y)
    g = spec.drift_array()
    sig = spec.diffusion_array()
    sdt = math.sqrt(dt)
    out = y + g[ranks] * dt + sig[ranks] * (sdt * xi)
    if spec.right_anchored:
        top = int(np.nonzero(ranks == spec.m - 1)[0][0])
        out[top] = y[top]
    return out


def step_spacing(spec: ModelSpec, z, dt: float, xi,
                 tol: float = PROJECTION_TOL,
                 max_sweeps: int = MAX_SWEEPS) -> tuple[np.ndarray, np.ndarray]:
    """One Euler step of the gap vector plus an exact reflection solve.

    Returns ``(z_new, dL)`` where ``dL >= 0`` are the local-time increments;
    ``z_new >= 0`` with per-coordinate complementarity ``z_new[j]*dL[j] ~ 0``.
    In anchored mode the top particle's noise is dropped and the last gap
    reflects with coefficient 1 (mixed boundary).
    """
    dt = _check_dt(dt)
    z = _check_gaps(z, spec.n_gaps)
    xi = _check_noise(xi, spec.m)
    ddrift, sig, _, _ = _gap_coefficients(spec, dt)
    zt = kernels_numpy.free_step_gaps(
        z[None, :], xi[None, :], ddrift, sig, math.sqrt(dt), spec.right_anchored
    )
    z_new, dL, resid = _kernels().project_gaps(zt, spec.right_anchored, tol, max_sweeps)
    worst = float(resid.max())
    if worst > tol:
        raise NumericalFailureError("reflection solve did not converge", worst)
    return z_new[0], dL[0]


# ---------------------------------------------------------------------------
# batched drivers


class _GapBatch:
    """Mutable spacing-scheme ensemble state advanced chunk by chunk."""

    def __init__(self, spec: ModelSpec, z0: np.ndarray, dt: float,
                 tol: float = PROJECTION_TOL, max_sweeps: int = MAX_SWEEPS):
        self.spec = spec
        self.z = np.ascontiguousarray(z0, dtype=np.float64).copy()
        self.x1 = np.zeros(z0.shape[0])
        self.L = np.zeros_like(self.z)
        self.ddrift, self.sig, self.gdt0, self.sig0 = _gap_coefficients(spec, dt)
        self.sdt = math.sqrt(dt)
        self.tol = tol
        self.max_sweeps = max_sweeps

    def advance(self, noise: np.ndarray):
        worst = _kernels().advance_gaps_chunk(
            self.z, self.x1, self.L, noise, self.ddrift, self.sig,
            self.gdt0, self.sig0, self.spec.right_anchored, self.sdt,
            self.tol, self.max_sweeps,
        )
        if worst > self.tol:
            raise NumericalFailureError("reflection solve did not converge", worst)


class _NamedBatch:
    """Mutable named-scheme ensemble state (wall variant when anchored)."""

    def __init__(self, spec: ModelSpec, z0: np.ndarray, dt: float):
        _require_atlas_named(spec)
        self.spec = spec
        N = z0.shape[0]
        pos = np.empty((N, spec.m))
        for r in range(N):
            pos[r] = positions_from_spacings(0.0, z0[r])
        if spec.right_anchored:
            self.w = np.ascontiguousarray(pos[:, -1]).copy()
            self.y = np.ascontiguousarray(pos[:, :-1])
        else:
            self.w = None
            self.y = np.ascontiguousarray(pos)
        self.gdt = spec.drift[0] * dt
        self.sdt = spec.diffusion[0] * math.sqrt(dt)
        # diffusion folded into sdt; named kernels draw unit-variance noise

    @property
    def width(self) -> int:
        return self.y.shape[1]

    def advance(self, noise: np.ndarray):
        if self.w is None:
            _kernels().advance_named_chunk(self.y, noise, self.gdt, self.sdt)
        else:
            _kernels().advance_named_wall_chunk(self.y, self.w, noise, self.gdt, self.sdt)

    def leading(self) -> np.ndarray:
        return self.y.min(axis=1)

    def gaps(self) -> np.ndarray:
        ys = np.sort(self.y, axis=1)
        if self.w is None:
            return np.diff(ys, axis=1)
        return np.diff(np.concatenate([ys, self.w[:, None]], axis=1), axis=1)


def _drive(gens, width: int, n_steps: int, snap_idx, apply_chunk, take_snapshot):
    """Advance through ``n_steps`` steps, firing ``take_snapshot(k)`` at each
    snapshot index; noise is drawn per replica in chunks whose size never
    affects the stream."""
    N = len(gens)
    cap = max(1, _CHUNK_ELEMS // max(1, N * width))
    marks = list(snap_idx) + [n_steps]
    pos = 0
    for mi, target in enumerate(marks):
        while pos < target:
            S = min(cap, target - pos)
            blocks = [g.standard_normal((S, width)) for g in gens]
            noise = np.stack(blocks, axis=1)
            apply_chunk(noise)
            pos += S
        if mi < len(snap_idx):
            take_snapshot(mi)


# ---------------------------------------------------------------------------
# public runners


def run(spec: ModelSpec, init, T: float, dt: float, paths: PathBundle,
        snapshot_times=None, replica: int = 0) -> RunResult:
    """Integrate one spacing-scheme trajectory and record snapshots.

    The leading position starts at 0 and follows its own SDE
    ``dX_1 = drift[0] dt + diffusion[0] sqrt(dt) xi_1 - dL_1``, which avoids
    reconstruction drift over long runs.  ``T=0`` yields the single snapshot
    ``init``.
    """
    dt = _check_dt(dt)
    init = _check_gaps(init, spec.n_gaps)
    n_steps = _step_count(T, dt)
    times, snap_idx = _snapshot_steps(snapshot_times, T, dt)
    S = times.size

    batch = _GapBatch(spec, init[None, :], dt)
    snaps = np.empty((S, spec.n_gaps))
    lead = np.empty(S)
    locs = np.empty((S, spec.n_gaps))

    def take(mi: int):
        snaps[mi] = batch.z[0]
        lead[mi] = batch.x1[0]
        locs[mi] = batch.L[0]

    _drive([paths.noise_rng(replica)], spec.m, n_steps, snap_idx, batch.advance, take)
    return RunResult(times=times, snapshots=snaps, leading=lead,
                     local_snapshots=locs, local_times=batch.L[0].copy())


def run_coupled(spec: ModelSpec, init_lo, init_hi, T: float, dt: float,
                paths: PathBundle, snapshot_times=None,
                replica: int = 0) -> tuple[RunResult, RunResult]:
    """Two spacing-scheme runs driven by the identical increment stream.

    Requires ``init_lo <= init_hi`` coordinatewise; the shared noise makes
    the pair a monotone coupling up to discretization effects.
    """
    dt = _check_dt(dt)
    lo = _check_gaps(init_lo, spec.n_gaps)
    hi = _check_gaps(init_hi, spec.n_gaps)
    if np.any(lo > hi):
        raise InvalidInputError("init_lo must be <= init_hi coordinatewise")
    n_steps = _step_count(T, dt)
    times, snap_idx = _snapshot_steps(snapshot_times, T, dt)
    S = times.size

    batches = (_GapBatch(spec, lo[None, :], dt), _GapBatch(spec, hi[None, :], dt))
    out = [(np.empty((S, spec.n_gaps)), np.empty(S), np.empty((S, spec.n_gaps)))
           for _ in batches]

    def apply_chunk(noise):
        for b in batches:
            b.advance(noise)

    def take(mi: int):
        for b, (sn, ld, lc) in zip(batches, out):
            sn[mi] = b.z[0]
            ld[mi] = b.x1[0]
            lc[mi] = b.L[0]

    _drive([paths.noise_rng(replica)], spec.m, n_steps, snap_idx, apply_chunk, take)
    results = tuple(
        RunResult(times=times, snapshots=sn, leading=ld, local_snapshots=lc,
                  local_times=b.L[0].copy())
        for b, (sn, ld, lc) in zip(batches, out)
    )
    return results[0], results[1]


def run_coupled_replicas(spec: ModelSpec, init_sampler_lo, init_sampler_hi,
                         N: int, T: float, dt: float, seed: int,
                         snapshot_times=None) -> CoupledEnsembleResult:
    """``N`` coupled spacing-scheme pairs, each pair on shared noise.

    Per replica ``r``, the lower and then the upper initial gap vector are
    drawn from the same initial-condition stream (in that fixed order), and
    both members consume the identical noise sub-stream ``r``.  Requires
    ``lo <= hi`` coordinatewise for every pair.
    """
    if N < 1:
        raise InvalidInputError(f"need at least one replica, got N={N}")
    dt = _check_dt(dt)
    n_steps = _step_count(T, dt)
    times, snap_idx = _snapshot_steps(snapshot_times, T, dt)
    S = times.size

    bundle = PathBundle(seed=seed, dt=dt)
    n = spec.n_gaps
    z_lo = np.empty((N, n))
    z_hi = np.empty((N, n))
    for r in range(N):
        rng = bundle.init_rng(r)
        z_lo[r] = _check_gaps(init_sampler_lo(rng, spec), n)
        z_hi[r] = _check_gaps(init_sampler_hi(rng, spec), n)
    if np.any(z_lo > z_hi):
        raise InvalidInputError("every pair must start ordered lo <= hi")

    batches = (_GapBatch(spec, z_lo, dt), _GapBatch(spec, z_hi, dt))
    lo_snaps = np.empty((S, N, n))
    hi_snaps = np.empty((S, N, n))

    def apply_chunk(noise):
        for b in batches:
            b.advance(noise)

    def take(mi: int):
        lo_snaps[mi] = batches[0].z
        hi_snaps[mi] = batches[1].z

    gens = [bundle.noise_rng(r) for r in range(N)]
    _drive(gens, spec.m, n_steps, snap_idx, apply_chunk, take)
    return CoupledEnsembleResult(times=times, lower=lo_snaps, upper=hi_snaps)


def run_replicas(spec: ModelSpec, init_sampler, N: int, T: float, dt: float,
                 seed: int, snapshot_times=None,
                 scheme: str = "spacing") -> EnsembleResult:
    """Advance ``N`` independent replicas and report terminal state.

    ``init_sampler(rng, spec)`` draws one initial gap vector from the
    replica's dedicated initial-condition stream.  Replica ``r`` consumes
    noise sub-stream ``r``; outputs are ordered by replica index, so results
    do not depend on the execution schedule, and ``N=1`` reproduces
    :func:`run` exactly.
    """
    if N < 1:
        raise InvalidInputError(f"need at least one replica, got N={N}")
    if scheme not in ("spacing", "named"):
        raise InvalidInputError(f"scheme must be 'spacing' or 'named', got {scheme!r}")
    dt = _check_dt(dt)
    n_steps = _step_count(T, dt)
    times, snap_idx = _snapshot_steps(snapshot_times, T, dt)
    S = times.size

    bundle = PathBundle(seed=seed, dt=dt)
    n = spec.n_gaps
    z0 = np.empty((N, n))
    for r in range(N):
        z0[r] = _check_gaps(init_sampler(bundle.init_rng(r), spec), n)

    gens = [bundle.noise_rng(r) for r in range(N)]
    lead_path = np.empty((N, S))

    if scheme == "spacing":
        batch = _GapBatch(spec, z0, dt)

        def take(mi: int):
            lead_path[:, mi] = batch.x1

        _drive(gens, spec.m, n_steps, snap_idx, batch.advance, take)
        return EnsembleResult(times=times, leading_path=lead_path,
                              spacings=batch.z.copy(), leading=batch.x1.copy(),
                              local_times=batch.L.copy())

    nb = _NamedBatch(spec, z0, dt)

    def take_named(mi: int):
        lead_path[:, mi] = nb.leading()

    _drive(gens, nb.width, n_steps, snap_idx, nb.advance, take_named)
    return EnsembleResult(times=times, leading_path=lead_path,
                          spacings=nb.gaps(), leading=nb.leading(),
                          local_times=None)
