"""Pilot-wave dynamics over analytic free Gaussian packets.

The wave function is a sum of Gaussian packets grouped into marker
sectors; packets in sectors with different markers never interfere (the
marker register is orthogonal), but both sectors contribute to the total
density that guides the configuration point:

    v(x, t) = Im( sum_s conj(psi_s) d/dx psi_s ) / sum_s |psi_s|^2

The standard scenario is a symmetric two-packet collision: packets start
at -/+ separation with opposite velocities and meet at x = 0, where the
velocity field vanishes by symmetry.  Trajectories therefore never cross
the midpoint: a particle riding the left packet turns around in the
crossing region and leaves inside the packet that came from the right.
Which-path marking ("slow bubble" regime: the marker does not alter the
spatial packets) keeps the densities symmetric, so the turnaround
survives -- the marker record then names the *other* arm than the path
the configuration point actually took.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import get_backend
from ._packets import packet_dpsi_dx, packet_overlap, packet_psi

DENSITY_FLOOR = 1e-12
NORM_TOL = 1e-9


class NodeRegionError(RuntimeError):
    """The density is below the floor: the guidance field is unreliable."""


@dataclass(frozen=True)
class GaussianPacket:
    """One free Gaussian packet in natural units (hbar = m = 1)."""

    x0: float
    v: float
    s0: float
    phase: float = 0.0
    weight: complex = 1.0 + 0j

    def __post_init__(self):
        if not self.s0 > 0.0:
            raise ValueError("packet width s0 must be positive")
        if not (math.isfinite(self.weight.real) and math.isfinite(self.weight.imag)):
            raise ValueError("packet weight must be finite")


@dataclass(frozen=True)
class SectorWave:
    """Packets sharing one marker symbol; distinct markers are orthogonal."""

    marker: str
    packets: tuple[GaussianPacket, ...]


@dataclass(frozen=True)
class PilotState:
    sectors: tuple[SectorWave, ...]
    t0: float = 0.0

    def __post_init__(self):
        markers = [s.marker for s in self.sectors]
        if len(set(markers)) != len(markers):
            raise ValueError("sector markers must be distinct")
        total = self.norm_squared()
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"pilot state norm^2 = {total}, expected 1")

    def norm_squared(self) -> float:
        """Analytic norm from pairwise Gaussian overlaps (t-independent)."""
        total = 0.0
        for sector in self.sectors:
            for p in sector.packets:
                for q in sector.packets:
                    total += packet_overlap(p, q).real
        return total


@dataclass(frozen=True)
class Trajectory:
    """Sampled integral curve of the guidance field at base-step times."""

    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    density: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def aborted(self) -> bool:
        return bool(self.metadata.get("aborted", False))


@dataclass(frozen=True)
class EnsembleResult:
    x_final: np.ndarray
    v_final: np.ndarray
    sign_changed: np.ndarray
    aborted: np.ndarray
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SurrealReport:
    """Arm bookkeeping for the recombiner-removed crossing experiment."""

    with_marker: bool
    x_init: float
    bohm_arm_sequence: tuple[str, ...]
    naive_arm_sequence: tuple[str, ...]
    recorded_arm_sequence: tuple[str, ...] | None
    reversed_at_crossing: bool
    x_final: float
    v_final: float
    final_packet_origin: float
    final_packet_marker: str
    trajectory: Trajectory


@dataclass(frozen=True)
class PackedWave:
    """Flat packet arrays (sorted by sector) for the kernels."""

    sector: np.ndarray
    x0: np.ndarray
    v: np.ndarray
    s0: np.ndarray
    phase: np.ndarray
    wre: np.ndarray
    wim: np.ndarray
    bounds: tuple            # (start, end) per sector
    scalar: tuple            # per-sector tuples of (x0, v, s0, phase, weight)


def pack(state: PilotState) -> PackedWave:
    sector_ids, x0, v, s0, phase, wre, wim = [], [], [], [], [], [], []
    bounds = []
    scalar = []
    for sid, sector in enumerate(state.sectors):
        start = len(x0)
        rows = []
        for p in sector.packets:
            sector_ids.append(sid)
            x0.append(p.x0)
            v.append(p.v)
            s0.append(p.s0)
            phase.append(p.phase)
            wre.append(p.weight.real)
            wim.append(p.weight.imag)
            rows.append((p.x0, p.v, p.s0, p.phase, complex(p.weight)))
        bounds.append((start, len(x0)))
        scalar.append(tuple(rows))
    as_f = lambda a: np.ascontiguousarray(a, dtype=np.float64)
    return PackedWave(
        sector=np.ascontiguousarray(sector_ids, dtype=np.int64),
        x0=as_f(x0), v=as_f(v), s0=as_f(s0), phase=as_f(phase),
        wre=as_f(wre), wim=as_f(wim),
        bounds=tuple(bounds), scalar=tuple(scalar),
    )


# ---------------------------------------------------------------------------
# wave evaluation (single authoritative formula, backend-independent)

def psi(sector: SectorWave, x, t: float):
    """Sector wave value: the sum of its packets."""
    if t < 0:
        raise ValueError("t must be >= 0")
    x = np.asarray(x, dtype=float)
    total = np.zeros(x.shape, dtype=complex)
    for p in sector.packets:
        total += packet_psi(x, t, p.x0, p.v, p.s0, p.phase, p.weight)
    return total if total.shape else complex(total)


def density(state: PilotState, x, t: float):
    x = np.asarray(x, dtype=float)
    rho = np.zeros(x.shape, dtype=float)
    for sector in state.sectors:
        a = psi(sector, x, t)
        rho += np.abs(np.asarray(a)) ** 2
    return rho if rho.shape else float(rho)


def velocity_field(state: PilotState, x, t: float, floor: float = DENSITY_FLOOR):
    """Guidance velocity: probability current over density.

    Cross terms between sectors with different markers are excluded; the
    marker register makes them orthogonal.  Raises NodeRegionError when
    the density anywhere falls below the floor.
    """
    x = np.asarray(x, dtype=float)
    rho = np.zeros(x.shape, dtype=float)
    cur = np.zeros(x.shape, dtype=float)
    for sector in state.sectors:
        a = np.zeros(x.shape, dtype=complex)
        da = np.zeros(x.shape, dtype=complex)
        for p in sector.packets:
            a += packet_psi(x, t, p.x0, p.v, p.s0, p.phase, p.weight)
            da += packet_dpsi_dx(x, t, p.x0, p.v, p.s0, p.phase, p.weight)
        rho += (np.conj(a) * a).real
        cur += (np.conj(a) * da).imag
    if np.any(rho < floor):
        raise NodeRegionError(f"density below floor {floor} at t = {t}")
    v = cur / rho
    return v if v.shape else float(v)


# ---------------------------------------------------------------------------
# trajectory integration

def integrate_trajectory(
    state: PilotState,
    x_init: float,
    t_max: float,
    dt: float = 1e-3,
    floor: float = DENSITY_FLOOR,
    backend: str | None = None,
) -> Trajectory:
    """Guarded RK4 integration of dx/dt = v(x, t) from the state's t0.

    ``t_max`` is rounded to a whole number of base steps.  If the
    trajectory enters a persistent node region the partial trajectory is
    returned with the aborted flag set in its metadata.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if density(state, float(x_init), state.t0) < floor:
        raise NodeRegionError("initial density below floor")
    engine = get_backend(backend)
    packed = pack(state)
    ts, xs, vs, rs, aborted = engine.integrate(packed, float(x_init), state.t0, t_max, dt, floor)
    meta = {
        "dt": dt, "floor": floor, "x_init": float(x_init), "t0": state.t0,
        "backend": engine.name, "aborted": bool(aborted),
    }
    return Trajectory(np.asarray(ts), np.asarray(xs), np.asarray(vs), np.asarray(rs), meta)


def integrate_ensemble(
    state: PilotState,
    x_inits,
    t_max: float,
    dt: float = 1e-3,
    floor: float = DENSITY_FLOOR,
    backend: str | None = None,
) -> EnsembleResult:
    """Endpoint integration of many starts; tracks sign changes of x."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    engine = get_backend(backend)
    packed = pack(state)
    result = engine.integrate_batch(packed, np.asarray(x_inits, dtype=float), state.t0, t_max, dt, floor)
    meta = {"dt": dt, "floor": floor, "t0": state.t0, "backend": engine.name}
    return EnsembleResult(result.x_final, result.v_final, result.sign_changed, result.aborted, meta)


def sample_positions(state: PilotState, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw starts from |psi(x, t0)|^2, packet by packet.

    Treats the state as a mixture of its packets, which is exact up to
    the packet overlaps; the standard scenarios start with packets many
    widths apart.
    """
    packets = [p for sector in state.sectors for p in sector.packets]
    weights = np.array([abs(p.weight) ** 2 for p in packets])
    weights = weights / weights.sum()
    choice = rng.choice(len(packets), size=n, p=weights)
    out = np.empty(n)
    for i, k in enumerate(choice):
        out[i] = packets[k].x0 + packets[k].s0 * rng.standard_normal()
    return out


# ---------------------------------------------------------------------------
# the crossing (recombiner removed) scenario

def two_packet_collision(
    marked: bool = False,
    separation: float = 10.0,
    speed: float = 1.0,
    s0: float = 1.0,
) -> PilotState:
    """Symmetric head-on packet pair; optionally which-path marked.

    The left packet (negative side, the M1 arm) moves right, the right
    packet (M2 arm) moves left.  Marked sectors carry the arm name.  The
    weights account for the packet overlap, which matters only when the
    separation is a few widths or less.
    """
    left = GaussianPacket(x0=-separation, v=speed, s0=s0)
    right = GaussianPacket(x0=separation, v=-speed, s0=s0)
    if marked:
        w = 2.0 ** -0.5
        sectors = (
            SectorWave("M1", (GaussianPacket(left.x0, left.v, s0, weight=w),)),
            SectorWave("M2", (GaussianPacket(right.x0, right.v, s0, weight=w),)),
        )
    else:
        w = (2.0 + 2.0 * packet_overlap(left, right).real) ** -0.5
        sectors = (SectorWave("none", (
            GaussianPacket(left.x0, left.v, s0, weight=w),
            GaussianPacket(right.x0, right.v, s0, weight=w),
        )),)
    return PilotState(sectors)


def _final_packet(state: PilotState, x: float, t: float):
    """The packet the particle ends inside: largest own density at (x, t)."""
    best, best_rho, best_marker = None, -1.0, ""
    for sector in state.sectors:
        for p in sector.packets:
            rho = abs(packet_psi(x, t, p.x0, p.v, p.s0, p.phase, p.weight)) ** 2
            if rho > best_rho:
                best, best_rho, best_marker = p, float(rho), sector.marker
    return best, best_marker


def crossing_scenario(
    with_marker: bool,
    x_init: float = -10.0,
    t_max: float = 20.0,
    dt: float = 1e-3,
    separation: float = 10.0,
    speed: float = 1.0,
    s0: float = 1.0,
    floor: float = DENSITY_FLOOR,
    backend: str | None = None,
) -> SurrealReport:
    """Integrate one trajectory through the collision and name the arms.

    Arm labels map the 1D transverse coordinate onto the open
    interferometer: negative side = M1 arm, positive side = M2 arm; after
    the arms cross, the negative side continues to D1 and the positive
    side to D2.  The guided trajectory keeps its sign, so it bounces at
    the crossing; the packet it ends up inside came from the other arm,
    which is what a detector (or a slow which-path record) reports.
    """
    if x_init == 0.0:
        raise ValueError("x_init must be off the symmetry axis")
    state = two_packet_collision(marked=with_marker, separation=separation, speed=speed, s0=s0)
    traj = integrate_trajectory(state, x_init, t_max, dt=dt, floor=floor, backend=backend)

    x_final = float(traj.x[-1])
    v0, v_final = float(traj.v[0]), float(traj.v[-1])
    pre_arm = "M1" if x_init < 0 else "M2"
    detector = "D1" if x_final < 0 else "D2"
    reversed_at_crossing = v0 * v_final < 0.0

    bohm_seq = ("S1", pre_arm) + (("A",) if reversed_at_crossing else ()) + (detector,)
    packet, marker = _final_packet(state, x_final, float(traj.t[-1]))
    naive_arm = "M1" if packet.x0 < 0 else "M2"
    naive_seq = ("S1", naive_arm, detector)
    recorded_seq = ("S1", marker, detector) if with_marker else None

    return SurrealReport(
        with_marker=with_marker,
        x_init=float(x_init),
        bohm_arm_sequence=bohm_seq,
        naive_arm_sequence=naive_seq,
        recorded_arm_sequence=recorded_seq,
        reversed_at_crossing=reversed_at_crossing,
        x_final=x_final,
        v_final=v_final,
        final_packet_origin=float(packet.x0),
        final_packet_marker=marker,
        trajectory=traj,
    )
