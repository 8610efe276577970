"""Satellite-swarm formation deployment toolkit.

Deterministic simulation and control of a palm-sized satellite swarm
deploying into a coplanar equidistant formation on a user-defined orbital
plane, under J2-perturbed relative orbital dynamics.
"""

__version__ = "0.1.0"

from swarmform.frames import J2Context, build_context
from swarmform.relorbit import OrbitalParams, RelState, params_from_state, state_from_params
from swarmform.targets import SwarmPlane, make_plane, shape_factor

__all__ = [
    "J2Context",
    "build_context",
    "OrbitalParams",
    "RelState",
    "params_from_state",
    "state_from_params",
    "SwarmPlane",
    "make_plane",
    "shape_factor",
]
