"""Guidance-kernel backend selection.

The compiled Cython kernel is preferred when it imported cleanly; the
numpy/cmath fallback is always available.  Set QWORLDS_PURE_PYTHON=1 to
force the fallback, or pass an explicit backend name to the integration
functions.
"""
from __future__ import annotations

import os

from . import _kernels_np

try:
    from . import _kernels_cy
except ImportError:  # extension not built
    _kernels_cy = None


class CompiledBackend:
    name = "compiled"

    def fields(self, packed, x, t):
        return _kernels_cy.fields(packed, x, t)

    def integrate(self, packed, x0, t0, t_max, dt, floor):
        return _kernels_cy.integrate(packed, x0, t0, t_max, dt, floor)

    def integrate_batch(self, packed, x0s, t0, t_max, dt, floor):
        x_final, v_final, flipped, dead = _kernels_cy.integrate_batch(
            packed, x0s, t0, t_max, dt, floor
        )
        return _kernels_np.BatchResult(x_final, v_final, flipped, dead)


_PURE = _kernels_np.NumpyBackend()
_COMPILED = CompiledBackend() if _kernels_cy is not None else None


def available_backends() -> tuple[str, ...]:
    return ("compiled", "pure") if _COMPILED is not None else ("pure",)


def get_backend(name: str | None = None):
    if name is None:
        if os.environ.get("QWORLDS_PURE_PYTHON") == "1" or _COMPILED is None:
            return _PURE
        return _COMPILED
    if name == "pure":
        return _PURE
    if name == "compiled":
        if _COMPILED is None:
            raise RuntimeError("compiled guidance kernel is not available")
        return _COMPILED
    raise ValueError(f"unknown backend {name!r}")
