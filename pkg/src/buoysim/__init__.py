"""Simulator and control stack for a microbubble-buoyancy underwater robot.

The package is organised around a lumped plant model (gas inventory +
vertical rigid-body dynamics), a discrete PID depth controller, a
scenario-driven simulation engine with CSV telemetry, a gain tuner, and a
gateway exposing a CLI plus a live session server.
"""

__version__ = "0.1.0"

from buoysim.bubble_physics import FluidEnv, VibrationSpec, WettingPair
from buoysim.control import ControlGains, ControllerState, SensorModel
from buoysim.gas_inventory import GasInventory, InventoryParams
from buoysim.scenario import Scenario
from buoysim.vehicle_dynamics import RobotParams, VehicleState

__all__ = [
    "ControlGains",
    "ControllerState",
    "FluidEnv",
    "GasInventory",
    "InventoryParams",
    "RobotParams",
    "Scenario",
    "SensorModel",
    "VehicleState",
    "VibrationSpec",
    "WettingPair",
    "__version__",
]
