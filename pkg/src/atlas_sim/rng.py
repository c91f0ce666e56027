"""Reproducible per-replica Gaussian increment streams.

Every replica owns two counter-based streams keyed by ``(seed, replica)``:
one for driving noise, one for sampling initial conditions.  Replica streams
are independent by construction, so ensembles are reproducible regardless of
execution schedule, and adding replicas never perturbs existing ones.

Within a replica, noise variates are consumed in a fixed canonical order:
step-major, then particle (row ``s`` of a block holds the ``width`` variates
of step ``s``).  Blocks of consecutive steps can be drawn in chunks of any
size without changing the stream: ``standard_normal`` fills C-order, so the
concatenation of chunked draws equals one long draw.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

__all__ = ["PathBundle"]


@dataclass(frozen=True)
class PathBundle:
    """Seeded factory of per-replica Gaussian increment streams.

    Attributes:
        seed: 64-bit master seed; identical seeds give identical streams.
        dt: time step the increments are meant to drive (metadata carried
            alongside the seed so a bundle fully describes its noise).
    """

    seed: int
    dt: float = 1e-3

    def __post_init__(self):
        if self.dt <= 0:
            raise InvalidInputError(f"dt must be positive, got {self.dt}")

    def noise_rng(self, replica: int = 0) -> np.random.Generator:
        """Driving-noise stream of one replica (even stream index)."""
        if replica < 0:
            raise InvalidInputError(f"replica must be >= 0, got {replica}")
        return np.random.Generator(np.random.Philox(key=[self.seed, 2 * replica]))

    def init_rng(self, replica: int = 0) -> np.random.Generator:
        """Initial-condition stream of one replica (odd stream index).

        Kept separate from the noise stream so the initial draw never shifts
        the driving increments.
        """
        if replica < 0:
            raise InvalidInputError(f"replica must be >= 0, got {replica}")
        return np.random.Generator(np.random.Philox(key=[self.seed, 2 * replica + 1]))

    def normal_block(self, replica: int, step_lo: int, n_steps: int, width: int) -> np.ndarray:
        """Reference accessor: the ``(n_steps, width)`` noise block for steps
        ``step_lo .. step_lo + n_steps - 1``.

        Regenerates the stream from its start, so it is O(step_lo + n_steps);
        integrators keep a live generator instead and draw sequentially,
        which yields exactly the same variates.
        """
        if step_lo < 0 or n_steps < 0 or width <= 0:
            raise InvalidInputError("need step_lo >= 0, n_steps >= 0, width > 0")
        rng = self.noise_rng(replica)
        if step_lo:
            rng.standard_normal(step_lo * width)  # skip earlier steps
        return rng.standard_normal((n_steps, width))

    def variate(self, replica: int, particle: int, step: int, width: int) -> float:
        """Single variate at (replica, particle, step) for a given stream width.

        Test/diagnostic accessor; O(step) per call.
        """
        if not 0 <= particle < width:
            raise InvalidInputError(f"particle index {particle} outside width {width}")
        block = self.normal_block(replica, step, 1, width)
        return float(block[0, particle])
