"""Vertical rigid-body dynamics of the robot in a bounded tank.

Sign conventions: depth is measured downward from the free surface
(0 = surface, tank_depth = bottom) and velocity is positive downward.
Forces are positive upward.  Contact with the bottom and the surface is
inelastic: the velocity component into the constraint is zeroed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from buoysim.bubble_physics import FluidEnv

__all__ = [
    "RobotParams",
    "VehicleState",
    "net_vertical_force",
    "step_dynamics",
    "terminal_velocity",
]

# Hull displacement from a 112 g robot at 1.0025 relative density.  With
# 1000 kg/m^3 water this leaves a rest net weight of 2.74 mN (sinks).
DEFAULT_HULL_VOLUME = 0.112 / 1002.5

# Quadratic drag calibrated so a 1 mN net force settles at 11.3 mm/s.
DEFAULT_DRAG_COEFF = 1e-3 / 11.3e-3**2


@dataclass(frozen=True, slots=True)
class RobotParams:
    mass: float = 0.112  # kg
    hull_volume: float = DEFAULT_HULL_VOLUME  # m^3
    drag_coeff: float = DEFAULT_DRAG_COEFF  # N s^2/m^2, lumped quadratic
    added_mass_coeff: float = 0.0  # dimensionless, on top of the dry mass
    tank_depth: float = 0.35  # m

    def __post_init__(self) -> None:
        if self.mass <= 0.0:
            raise ValueError("mass must be > 0")
        if self.hull_volume <= 0.0:
            raise ValueError("hull_volume must be > 0")
        if self.drag_coeff < 0.0:
            raise ValueError("drag_coeff must be >= 0")
        if self.added_mass_coeff < 0.0:
            raise ValueError("added_mass_coeff must be >= 0")
        if self.tank_depth <= 0.0:
            raise ValueError("tank_depth must be > 0")


@dataclass(frozen=True, slots=True)
class VehicleState:
    depth: float  # m, downward positive, 0 at the free surface
    velocity: float = 0.0  # m/s, downward positive
    on_bottom: bool = False
    at_surface: bool = False


def net_vertical_force(
    state: VehicleState,
    gas_volume: float,
    env: FluidEnv,
    params: RobotParams,
) -> float:
    """Net upward force: buoyancy of hull plus gas, minus weight, minus drag.

    Quadratic drag opposes the current motion; it vanishes at rest.
    """
    buoyancy = env.water_density * env.gravity * (params.hull_volume + gas_volume)
    weight = params.mass * env.gravity
    v_up = -state.velocity
    drag = params.drag_coeff * abs(v_up) * v_up
    return buoyancy - weight - drag


def step_dynamics(
    state: VehicleState,
    force: float,
    dt: float,
    params: RobotParams,
) -> VehicleState:
    """Semi-implicit Euler step under the given upward force.

    Velocity is updated first, then depth from the new velocity.  Depth is
    clamped to [0, tank_depth]; the velocity component pushing into a
    contact is zeroed and the corresponding flag set.
    """
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    m_eff = params.mass * (1.0 + params.added_mass_coeff)
    v = state.velocity + dt * (-force) / m_eff
    depth = state.depth + dt * v

    on_bottom = False
    at_surface = False
    if depth >= params.tank_depth:
        depth = params.tank_depth
        if v > 0.0:
            v = 0.0
        on_bottom = True
    elif depth <= 0.0:
        depth = 0.0
        if v < 0.0:
            v = 0.0
        at_surface = True
    return replace(state, depth=depth, velocity=v, on_bottom=on_bottom, at_surface=at_surface)


def terminal_velocity(net_force_magnitude: float, params: RobotParams) -> float:
    """Settled speed sqrt(F / drag_coeff) under a constant net force.

    Analytic cross-check for `step_dynamics`.
    """
    if net_force_magnitude < 0.0:
        raise ValueError("net_force_magnitude must be >= 0")
    if params.drag_coeff <= 0.0:
        raise ValueError("terminal velocity undefined for drag_coeff = 0")
    return math.sqrt(net_force_magnitude / params.drag_coeff)
