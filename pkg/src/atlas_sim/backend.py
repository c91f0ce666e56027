"""Kernel backend selection.

Hot loops exist in two implementations with identical arithmetic:

* ``numba`` -- scalar @njit kernels, compiled per replica;
* ``numpy`` -- batched vectorized kernels.

``ATLAS_SIM_BACKEND`` picks one (``auto`` | ``numba`` | ``numpy``; default
``auto`` = numba when importable).  ``ATLAS_SIM_THREADS`` caps the number of
compilation/worker threads.  Both backends produce bit-identical
trajectories, so the flag trades speed only.
"""

from __future__ import annotations

import os

from .errors import InvalidInputError

__all__ = ["HAVE_NUMBA", "selected_backend", "use_numba", "thread_cap"]

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    HAVE_NUMBA = False


def thread_cap() -> int:
    """Worker-thread cap from ATLAS_SIM_THREADS (>= 1); 0/unset = no cap."""
    raw = os.environ.get("ATLAS_SIM_THREADS", "").strip()
    if not raw:
        return 0
    try:
        cap = int(raw)
    except ValueError as exc:
        raise InvalidInputError(f"ATLAS_SIM_THREADS must be an integer, got {raw!r}") from exc
    if cap < 0:
        raise InvalidInputError(f"ATLAS_SIM_THREADS must be >= 0, got {cap}")
    return cap


if HAVE_NUMBA:
    _cap = thread_cap()
    if _cap:
        try:
            numba.set_num_threads(min(_cap, numba.config.NUMBA_NUM_THREADS))
        except ValueError:  # pragma: no cover - single-thread hosts
            pass


def selected_backend() -> str:
    """Resolve the active backend name: 'numba' or 'numpy'."""
    choice = os.environ.get("ATLAS_SIM_BACKEND", "auto").strip().lower() or "auto"
    if choice not in ("auto", "numba", "numpy"):
        raise InvalidInputError(
            f"ATLAS_SIM_BACKEND must be one of auto|numba|numpy, got {choice!r}"
        )
    if choice == "numba" and not HAVE_NUMBA:
        raise InvalidInputError("ATLAS_SIM_BACKEND=numba but numba is not importable")
    if choice == "auto":
        return "numba" if HAVE_NUMBA else "numpy"
    return choice


def use_numba() -> bool:
    return selected_backend() == "numba"
