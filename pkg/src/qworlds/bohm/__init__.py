"""Pilot-wave engine: analytic packets, guidance field, trajectories."""
from ._backend import available_backends, get_backend
from .core import (
    DENSITY_FLOOR,
    EnsembleResult,
    GaussianPacket,
    NodeRegionError,
    PilotState,
    SectorWave,
    SurrealReport,
    Trajectory,
    crossing_scenario,
    density,
    integrate_ensemble,
    integrate_trajectory,
    psi,
    sample_positions,
    two_packet_collision,
    velocity_field,
)

__all__ = [
    "DENSITY_FLOOR",
    "EnsembleResult",
    "GaussianPacket",
    "NodeRegionError",
    "PilotState",
    "SectorWave",
    "SurrealReport",
    "Trajectory",
    "available_backends",
    "crossing_scenario",
    "density",
    "get_backend",
    "integrate_ensemble",
    "integrate_trajectory",
    "psi",
    "sample_positions",
    "two_packet_collision",
    "velocity_field",
]
