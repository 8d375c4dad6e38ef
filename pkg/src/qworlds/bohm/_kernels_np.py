"""Pure-Python / numpy guidance kernels.

This is the fallback used when the compiled extension is unavailable (and
the reference the extension is tested against).  Ensembles advance in
vectorized lock-step; single trajectories use scalar ``cmath`` sums, which
beat tiny numpy calls for a handful of packets.

Step policy, identical in both backends: classic RK4 with a fixed base
step; whenever any stage density drops below 10x the floor the step is
recursively halved (at most ``MAX_HALVINGS`` levels).  At the deepest
level a stage density above the floor is accepted, below it the
trajectory is flagged as aborted in a persistent node region.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

MAX_HALVINGS = 20
GUARD_FACTOR = 10.0
_PREF = (2.0 * math.pi) ** -0.25


@dataclass(frozen=True)
class BatchResult:
    x_final: np.ndarray
    v_final: np.ndarray
    sign_changed: np.ndarray
    aborted: np.ndarray


def fields_scalar(sectors, x: float, t: float) -> tuple[float, float]:
    """(velocity, density) at one point from per-sector packet tuples."""
    rho = 0.0
    cur = 0.0
    for packets in sectors:
        a = 0j
        da = 0j
        for x0, v, s0, phase, w in packets:
            st = complex(s0, t / (2.0 * s0))
            d = x - x0 - v * t
            exponent = complex(0.0, v * (x - x0) - 0.5 * v * v * t + phase) - d * d / (4.0 * s0 * st)
            p = w * _PREF / cmath.sqrt(st) * cmath.exp(exponent)
            a += p
            da += p * (complex(0.0, v) - d / (2.0 * s0 * st))
        rho += a.real * a.real + a.imag * a.imag
        cur += a.real * da.imag - a.imag * da.real
    return (cur / rho if rho > 0.0 else 0.0), rho


def advance_scalar(sectors, x, t, h, depth, floor):
    """One guarded RK4 step of size h; returns (x_new, ok)."""
    v1, r1 = fields_scalar(sectors, x, t)
    v2, r2 = fields_scalar(sectors, x + 0.5 * h * v1, t + 0.5 * h)
    v3, r3 = fields_scalar(sectors, x + 0.5 * h * v2, t + 0.5 * h)
    v4, r4 = fields_scalar(sectors, x + h * v3, t + h)
    rho_min = min(r1, r2, r3, r4)
    x_new = x + (h / 6.0) * (v1 + 2.0 * v2 + 2.0 * v3 + v4)
    if rho_min >= GUARD_FACTOR * floor:
        return x_new, True
    if depth >= MAX_HALVINGS:
        return (x_new, True) if rho_min >= floor else (x, False)
    x_mid, ok = advance_scalar(sectors, x, t, 0.5 * h, depth + 1, floor)
    if not ok:
        return x_mid, False
    return advance_scalar(sectors, x_mid, t + 0.5 * h, 0.5 * h, depth + 1, floor)


class NumpyBackend:
    name = "pure"

    def fields(self, packed, x, t):
        """Vectorized (velocity, density) over an array of positions."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        st = packed.s0 * (1.0 + 1j * t / (2.0 * packed.s0 * packed.s0))
        center = packed.x0 + packed.v * t
        d = x[None, :] - center[:, None]
        inv4 = 1.0 / (4.0 * packed.s0 * st)
        exponent = -d * d * inv4[:, None] + 1j * (
            packed.v[:, None] * (x[None, :] - packed.x0[:, None])
            - (0.5 * packed.v * packed.v * t)[:, None]
            + packed.phase[:, None]
        )
        weight = packed.wre + 1j * packed.wim
        psi = weight[:, None] * (_PREF / np.sqrt(st))[:, None] * np.exp(exponent)
        dpsi = psi * (-d * (1.0 / (2.0 * packed.s0 * st))[:, None] + 1j * packed.v[:, None])

        rho = np.zeros_like(x)
        cur = np.zeros_like(x)
        for start, end in packed.bounds:
            a = psi[start:end].sum(axis=0)
            da = dpsi[start:end].sum(axis=0)
            rho += (a.conj() * a).real
            cur += (a.conj() * da).imag
        v = np.where(rho > 0.0, cur / np.maximum(rho, 1e-300), 0.0)
        return v, rho

    def _rk4_candidates(self, packed, x, t, h):
        v1, r1 = self.fields(packed, x, t)
        v2, r2 = self.fields(packed, x + 0.5 * h * v1, t + 0.5 * h)
        v3, r3 = self.fields(packed, x + 0.5 * h * v2, t + 0.5 * h)
        v4, r4 = self.fields(packed, x + h * v3, t + h)
        x_new = x + (h / 6.0) * (v1 + 2.0 * v2 + 2.0 * v3 + v4)
        rho_min = np.minimum(np.minimum(r1, r2), np.minimum(r3, r4))
        return x_new, rho_min

    def integrate(self, packed, x0, t0, t_max, dt, floor):
        """Single trajectory with full (t, x, v, rho) sample storage."""
        n_steps = int(round((t_max - t0) / dt))
        ts = np.empty(n_steps + 1)
        xs = np.empty(n_steps + 1)
        vs = np.empty(n_steps + 1)
        rs = np.empty(n_steps + 1)
        x = float(x0)
        count = 0
        aborted = False
        for i in range(n_steps):
            t = t0 + i * dt
            v, r = fields_scalar(packed.scalar, x, t)
            ts[i], xs[i], vs[i], rs[i] = t, x, v, r
            count = i + 1
            x_new, ok = advance_scalar(packed.scalar, x, t, dt, 0, floor)
            if not ok:
                aborted = True
                break
            x = x_new
        if not aborted:
            t_end = t0 + n_steps * dt
            v, r = fields_scalar(packed.scalar, x, t_end)
            ts[n_steps], xs[n_steps], vs[n_steps], rs[n_steps] = t_end, x, v, r
            count = n_steps + 1
        return ts[:count], xs[:count], vs[:count], rs[:count], aborted

    def integrate_batch(self, packed, x0s, t0, t_max, dt, floor):
        """Lock-step ensemble integration; only endpoints are kept."""
        guard = GUARD_FACTOR * floor
        x = np.asarray(x0s, dtype=float).copy()
        sign0 = np.sign(x)
        flipped = np.zeros(x.shape, dtype=bool)
        dead = np.zeros(x.shape, dtype=bool)
        n_steps = int(round((t_max - t0) / dt))
        for i in range(n_steps):
            t = t0 + i * dt
            x_new, rho_min = self._rk4_candidates(packed, x, t, dt)
            needy = (rho_min < guard) & ~dead
            for j in np.flatnonzero(needy):
                xj, ok = advance_scalar(packed.scalar, float(x[j]), t, dt, 0, floor)
                if ok:
                    x_new[j] = xj
                else:
                    dead[j] = True
            x = np.where(dead, x, x_new)
            flipped |= ~dead & (np.sign(x) != sign0)
        v_final, _ = self.fields(packed, x, t0 + n_steps * dt)
        return BatchResult(x, v_final, flipped, dead)
