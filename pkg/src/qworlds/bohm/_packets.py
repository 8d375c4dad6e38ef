"""Analytic free Gaussian packets (hbar = m = 1).

A packet launched with width s0, center x0, group velocity v and global
phase phi evolves under the free Schroedinger equation as

    psi(x, t) = (2 pi)^(-1/4) s_t^(-1/2)
                * exp( -(x - x0 - v t)^2 / (4 s0 s_t) )
                * exp( i (v (x - x0) - v^2 t / 2 + phi) )

with the complex width s_t = s0 (1 + i t / (2 s0^2)).  Re(s_t) = s0 > 0,
so the principal square root never crosses a branch cut.  Overlaps are
conserved by the free evolution, so they are evaluated once at t = 0 in
closed form.
"""
from __future__ import annotations

import math

import numpy as np

_PREF = (2.0 * math.pi) ** -0.25


def complex_width(s0: float, t: float) -> complex:
    return complex(s0, t / (2.0 * s0))


def packet_psi(x, t, x0, v, s0, phase=0.0, weight=1.0 + 0j):
    """Packet value at positions x (scalar or array) and time t."""
    x = np.asarray(x, dtype=float)
    st = complex_width(s0, t)
    d = x - x0 - v * t
    exponent = -d * d / (4.0 * s0 * st) + 1j * (v * (x - x0) - 0.5 * v * v * t + phase)
    return weight * _PREF / np.sqrt(st) * np.exp(exponent)


def packet_dpsi_dx(x, t, x0, v, s0, phase=0.0, weight=1.0 + 0j):
    """Spatial derivative, computed from the closed form."""
    x = np.asarray(x, dtype=float)
    st = complex_width(s0, t)
    d = x - x0 - v * t
    return packet_psi(x, t, x0, v, s0, phase, weight) * (-d / (2.0 * s0 * st) + 1j * v)


def packet_overlap(p, q) -> complex:
    """<p|q> including both weights; a complex Gaussian integral at t = 0."""
    ap = 1.0 / (4.0 * p.s0 * p.s0)
    aq = 1.0 / (4.0 * q.s0 * q.s0)
    big_a = ap + aq
    big_b = 2.0 * ap * p.x0 + 2.0 * aq * q.x0 + 1j * (q.v - p.v)
    big_c = (
        -ap * p.x0 * p.x0
        - aq * q.x0 * q.x0
        + 1j * (p.v * p.x0 - q.v * q.x0)
        + 1j * (q.phase - p.phase)
    )
    prefactor = (2.0 * math.pi * p.s0 * p.s0) ** -0.25 * (2.0 * math.pi * q.s0 * q.s0) ** -0.25
    integral = math.sqrt(math.pi / big_a) * np.exp(big_b * big_b / (4.0 * big_a) + big_c)
    return complex(np.conj(p.weight) * q.weight * prefactor * integral)
