"""Core domain types and conversions between named, ranked, and spacing coordinates.

A system of ``m`` competing Brownian particles is described by a
:class:`ModelSpec`.  Particle positions come in two coordinate systems:

* *named* -- one coordinate per particle identity, unordered;
* *ranked* -- sorted non-decreasing positions ``x[0] <= ... <= x[m-1]``.

The dynamics themselves are best conditioned in *spacing* coordinates
``z[k] = x[k+1] - x[k] >= 0``, which is the canonical representation used by
the integrators in :mod:`atlas_sim.engine`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, InvalidModelError

__all__ = [
    "ModelSpec",
    "make_atlas",
    "rank",
    "spacings",
    "positions_from_spacings",
]


@dataclass(frozen=True)
class ModelSpec:
    """Immutable description of a competing Brownian particle system.

    Attributes:
        m: number of particles (>= 2 so at least one spacing exists).
        drift: per-rank drift coefficients, length ``m``.
        diffusion: per-rank diffusion coefficients, length ``m``, all > 0.
        right_anchored: if True, the top-ranked particle is held fixed and
            the last spacing reflects off it (mixed boundary).
    """

    m: int
    drift: tuple[float, ...]
    diffusion: tuple[float, ...]
    right_anchored: bool = False

    def __post_init__(self):
        if self.m < 2:
            raise InvalidModelError(f"need at least 2 particles, got m={self.m}")
        if len(self.drift) != self.m or len(self.diffusion) != self.m:
            raise InvalidModelError(
                f"drift/diffusion lengths ({len(self.drift)}, {len(self.diffusion)}) "
                f"must equal m={self.m}"
            )
        if any(s <= 0 for s in self.diffusion):
            raise InvalidModelError("all diffusion coefficients must be positive")

    @property
    def n_gaps(self) -> int:
        return self.m - 1

    def drift_array(self) -> np.ndarray:
        return np.asarray(self.drift, dtype=np.float64)

    def diffusion_array(self) -> np.ndarray:
        return np.asarray(self.diffusion, dtype=np.float64)


def make_atlas(m: int, gamma: float, right_anchored: bool = False) -> ModelSpec:
    """Build the standard model: unit diffusion, drift ``gamma`` on the minimum only.

    Args:
        m: particle count, >= 2.
        gamma: drift applied to the lowest-ranked particle, >= 0.
        right_anchored: freeze the top particle (default False).
    """
    if m < 2:
        raise InvalidModelError(f"need at least 2 particles, got m={m}")
    if gamma < 0:
        raise InvalidModelError(f"drift must be non-negative, got {gamma}")
    drift = (float(gamma),) + (0.0,) * (m - 1)
    return ModelSpec(m=m, drift=drift, diffusion=(1.0,) * m, right_anchored=right_anchored)


def rank(positions) -> tuple[np.ndarray, np.ndarray]:
    """Sort named positions into ranked order.

    Ties are broken by named index: among equal positions the particle with
    the lowest index receives the lowest rank, which makes the permutation
    deterministic.

    Args:
        positions: array of named particle positions, all finite.

    Returns:
        ``(ranked, ranks)`` where ``ranked`` is non-decreasing and
        ``ranks[i]`` is the 0-based rank of named particle ``i``
        (``ranked[ranks[i]] == positions[i]``).
    """
    y = np.asarray(positions, dtype=np.float64)
    if y.ndim != 1:
        raise InvalidInputError(f"positions must be 1-d, got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise InvalidInputError("positions must be finite")
    order = np.argsort(y, kind="stable")  # stable => ties keep index order
    ranks = np.empty(y.shape[0], dtype=np.int64)
    ranks[order] = np.arange(y.shape[0])
    return y[order], ranks


def spacings(ranked) -> np.ndarray:
    """Consecutive gaps ``z[k] = x[k+1] - x[k]`` of a ranked configuration."""
    x = np.asarray(ranked, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] < 1:
        raise InvalidInputError(f"ranked positions must be a non-empty 1-d array, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("positions must be finite")
    z = np.diff(x)
    if z.size and z.min() < 0:
        raise InvalidInputError("ranked positions must be non-decreasing")
    return z


def positions_from_spacings(x1: float, z) -> np.ndarray:
    """Rebuild ranked positions from the lowest position and the gap vector."""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1:
        raise InvalidInputError(f"spacings must be 1-d, got shape {z.shape}")
    if z.size and z.min() < 0:
        raise InvalidInputError("spacings must be non-negative")
    x = np.empty(z.shape[0] + 1, dtype=np.float64)
    x[0] = x1
    np.cumsum(z, out=x[1:])
    x[1:] += x1
    return x
