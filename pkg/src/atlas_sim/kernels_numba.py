"""JIT-compiled scalar integration kernels.

Same public surface and array conventions as :mod:`atlas_sim.kernels_numpy`;
each statement performs the identical sequence of binary floating-point
operations per element, so switching backends never changes a trajectory.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = [
    "project_gaps",
    "advance_gaps_chunk",
    "advance_named_chunk",
    "advance_named_wall_chunk",
]


@njit(cache=True)
def _project_row(zt, dL, anchored, tol, max_sweeps):
    """Projected Gauss-Seidel on one replica row; returns the last sweep delta."""
    n = zt.shape[0]
    last_diag = 1.0 if anchored else 2.0
    resid = 0.0
    for _ in range(max_sweeps):
        delta = 0.0
        for j in range(n):
            left = dL[j - 1] if j > 0 else 0.0
            right = dL[j + 1] if j < n - 1 else 0.0
            diag = last_diag if j == n - 1 else 2.0
            new = (left + right - zt[j]) / diag
            if new < 0.0:
                new = 0.0
            d = abs(new - dL[j])
            if d > delta:
                delta = d
            dL[j] = new
        resid = delta
        if delta <= tol:
            break
    return resid


@njit(cache=True)
def _finish_row(zt, dL, z, anchored):
    """Reflected gaps from the free step and its local-time increments."""
    n = zt.shape[0]
    last_diag = 1.0 if anchored else 2.0
    for j in range(n):
        diag = last_diag if j == n - 1 else 2.0
        v = zt[j] + diag * dL[j]
        if j > 0:
            v = v - dL[j - 1]
        if j < n - 1:
            v = v - dL[j + 1]
        if v < 0.0:
            v = 0.0
        z[j] = v


@njit(cache=True)
def _project_gaps_impl(zt, anchored, tol, max_sweeps):
    N, n = zt.shape
    z = np.empty((N, n))
    dL = np.zeros((N, n))
    resid = np.zeros(N)
    for r in range(N):
        resid[r] = _project_row(zt[r], dL[r], anchored, tol, max_sweeps)
        _finish_row(zt[r], dL[r], z[r], anchored)
    return z, dL, resid


def project_gaps(zt, anchored, tol=1e-12, max_sweeps=10_000):
    """Batched one-step reflection solve; see kernels_numpy.project_gaps."""
    zt = np.ascontiguousarray(zt, dtype=np.float64)
    return _project_gaps_impl(zt, anchored, tol, max_sweeps)


@njit(cache=True)
def _free_step_row(z, xi, ddrift, sig, sdt, anchored, zt):
    n = z.shape[0]
    for j in range(n):
        if anchored and j == n - 1:
            t = 0.0 - sig[j] * xi[j]
        else:
            t = sig[j + 1] * xi[j + 1] - sig[j] * xi[j]
        v = z[j] + ddrift[j]
        v = v + sdt * t
        zt[j] = v


@njit(cache=True)
def _advance_gaps_chunk_impl(z, x1, L, noise, ddrift, sig, gdt0, sig0,
                             anchored, sdt, tol, max_sweeps):
    S, N, m = noise.shape
    n = z.shape[1]
    worst = 0.0
    zt = np.empty(n)
    dL = np.empty(n)
    zr = np.empty(n)
    for s in range(S):
        for r in range(N):
            _free_step_row(z[r], noise[s, r], ddrift, sig, sdt, anchored, zt)
            for j in range(n):
                dL[j] = 0.0
            resid = _project_row(zt, dL, anchored, tol, max_sweeps)
            if resid > worst:
                worst = resid
            _finish_row(zt, dL, zr, anchored)
            for j in range(n):
                z[r, j] = zr[j]
                L[r, j] = L[r, j] + dL[j]
            v = x1[r] + gdt0
            v = v + sig0 * (sdt * noise[s, r, 0])
            v = v - dL[0]
            x1[r] = v
    return worst


def advance_gaps_chunk(z, x1, L, noise, ddrift, sig, gdt0, sig0, anchored,
                       sdt, tol=1e-12, max_sweeps=10_000):
    """In-place chunk advance of the reflected gap system; see kernels_numpy."""
    return _advance_gaps_chunk_impl(z, x1, L, noise, ddrift, sig,
                                    float(gdt0), float(sig0), anchored,
                                    float(sdt), float(tol), max_sweeps)


@njit(cache=True)
def _advance_named_chunk_impl(y, noise, gdt, sdt):
    S, N, m = noise.shape
    for s in range(S):
        for r in range(N):
            imin = 0
            best = y[r, 0]
            for p in range(1, m):
                if y[r, p] < best:
                    best = y[r, p]
                    imin = p
            for p in range(m):
                y[r, p] = y[r, p] + sdt * noise[s, r, p]
            y[r, imin] = y[r, imin] + gdt


def advance_named_chunk(y, noise, gdt, sdt):
    """In-place chunk advance of named particles; see kernels_numpy."""
    _advance_named_chunk_impl(y, noise, float(gdt), float(sdt))
    return y


@njit(cache=True)
def _advance_named_wall_chunk_impl(y, w, noise, gdt, sdt):
    S, N, m = noise.shape
    for s in range(S):
        for r in range(N):
            imin = 0
            best = y[r, 0]
            for p in range(1, m):
                if y[r, p] < best:
                    best = y[r, p]
                    imin = p
            for p in range(m):
                y[r, p] = y[r, p] + sdt * noise[s, r, p]
            y[r, imin] = y[r, imin] + gdt
            for p in range(m):
                v = y[r, p]
                if v > w[r]:
                    y[r, p] = 2.0 * w[r] - v
    return


def advance_named_wall_chunk(y, w, noise, gdt, sdt):
    """In-place chunk advance below a fixed reflecting ceiling; see kernels_numpy."""
    _advance_named_wall_chunk_impl(y, w, noise, float(gdt), float(sdt))
    return y
