"""Vectorized (pure-numpy) integration kernels, batched over replicas.

Array conventions: ``z``/``dL``/``L`` are ``(N, n)`` gap-indexed, ``y`` is
``(N, m)`` particle-indexed, noise chunks are ``(S, N, m)`` step-major.

Every arithmetic statement here is a sequence of binary operations whose
order is mirrored exactly by the scalar kernels in
:mod:`atlas_sim.kernels_numba`, so the two backends produce bit-identical
trajectories.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "project_gaps",
    "free_step_gaps",
    "advance_gaps_chunk",
    "advance_named_chunk",
    "advance_named_wall_chunk",
]


def project_gaps(zt, anchored, tol=1e-12, max_sweeps=10_000):
    """Solve the one-step reflection problem for a batch of free gap vectors.

    Finds ``dL >= 0`` with ``z = zt + R dL >= 0`` and ``z[j]*dL[j] ~ 0``,
    where ``R`` is tridiagonal with -1 off the diagonal and 2 on it (last
    diagonal entry 1 when ``anchored``).  Projected Gauss-Seidel sweeps;
    replicas whose update delta drops to ``tol`` are frozen so late sweeps
    cannot perturb converged rows.

    Returns:
        ``(z, dL, resid)`` where ``resid[r]`` is replica ``r``'s last sweep
        delta (``<= tol`` iff converged).
    """
    zt = np.asarray(zt, dtype=np.float64)
    N, n = zt.shape
    dL = np.zeros((N, n))
    resid = np.zeros(N)
    active = np.ones(N, dtype=bool)
    last_diag = 1.0 if anchored else 2.0
    for _ in range(max_sweeps):
        rows = np.nonzero(active)[0]
        if rows.size == 0:
            break
        delta = np.zeros(rows.size)
        for j in range(n):
            left = dL[rows, j - 1] if j > 0 else 0.0
            right = dL[rows, j + 1] if j < n - 1 else 0.0
            diag = last_diag if j == n - 1 else 2.0
            new = (left + right - zt[rows, j]) / diag
            np.maximum(new, 0.0, out=new)
            np.maximum(delta, np.abs(new - dL[rows, j]), out=delta)
            dL[rows, j] = new
        resid[rows] = delta
        active[rows] = delta > tol
    z = np.empty_like(zt)
    for j in range(n):
        diag = last_diag if j == n - 1 else 2.0
        v = zt[:, j] + diag * dL[:, j]
        if j > 0:
            v = v - dL[:, j - 1]
        if j < n - 1:
            v = v - dL[:, j + 1]
        z[:, j] = v
    np.maximum(z, 0.0, out=z)
    return z, dL, resid


def free_step_gaps(z, noise, ddrift, sig, sdt, anchored):
    """One unreflected gap step: drift increment plus scaled noise differences.

    ``noise`` is the ``(N, m)`` particle-noise row of this step; the gap
    increment is the difference of the two adjacent particle noises.  In
    anchored mode the top particle is frozen, so the last gap sees only
    (minus) the noise of the particle below it.
    """
    d = sig * noise
    t = d[:, 1:] - d[:, :-1]
    if anchored:
        t[:, -1] = 0.0 - d[:, -2]
    zt = z + ddrift
    zt = zt + sdt * t
    return zt


def advance_gaps_chunk(z, x1, L, noise, ddrift, sig, gdt0, sig0, anchored,
                       sdt, tol=1e-12, max_sweeps=10_000):
    """Advance the reflected gap system through a chunk of steps, in place.

    Args:
        z: ``(N, n)`` gaps, updated in place.
        x1: ``(N,)`` leading positions, updated in place via
            ``x1 += gdt0 + sig0*sdt*noise[:, 0] - dL[:, 0]``.
        L: ``(N, n)`` cumulative local times, updated in place.
        noise: ``(S, N, m)`` standard-normal increments.
        ddrift: ``(n,)`` per-gap drift increments (already times dt).
        sig: ``(m,)`` per-rank diffusion coefficients.
        gdt0: leading-rank drift increment (drift[0]*dt).
        sig0: leading-rank diffusion coefficient.
        anchored: frozen-top boundary if True.
        sdt: sqrt(dt).

    Returns:
        Largest projection residual seen in the chunk (0.0 when every
        projection converged).
    """
    worst = 0.0
    for s in range(noise.shape[0]):
        xi = noise[s]
        zt = free_step_gaps(z, xi, ddrift, sig, sdt, anchored)
        z_new, dL, resid = project_gaps(zt, anchored, tol, max_sweeps)
        r = float(resid.max()) if resid.size else 0.0
        if r > worst:
            worst = r
        z[...] = z_new
        L += dL
        x1 += gdt0
        x1 += sig0 * (sdt * xi[:, 0])
        x1 -= dL[:, 0]
    return worst


def advance_named_chunk(y, noise, gdt, sdt):
    """Advance named particles (drift to the pre-step minimum), in place.

    ``y`` is ``(N, m)``; ties at the minimum go to the lowest index.
    """
    N = y.shape[0]
    rows = np.arange(N)
    for s in range(noise.shape[0]):
        imin = np.argmin(y, axis=1)
        y += sdt * noise[s]
        y[rows, imin] += gdt
    return y


def advance_named_wall_chunk(y, w, noise, gdt, sdt):
    """Advance named particles below a fixed reflecting ceiling, in place.

    ``y`` is ``(N, m-1)`` mobile particles, ``w`` is the ``(N,)`` frozen top
    position; each step ends with a mirror reflection ``y -> 2w - y`` of any
    coordinate above the ceiling.
    """
    N = y.shape[0]
    rows = np.arange(N)
    wc = w[:, None]
    for s in range(noise.shape[0]):
        imin = np.argmin(y, axis=1)
        y += sdt * noise[s]
        y[rows, imin] += gdt
        np.copyto(y, 2.0 * wc - y, where=y > wc)
    return y
