"""Closed-form bubble mechanics: adhesion, buoyancy and release thresholds.

All functions are pure and stateless.  They calibrate and justify the
lumped release kinetics in :mod:`buoysim.gas_inventory`; the simulation
engine itself never tracks individual bubbles.

Conventions: SI units throughout, angles in degrees at the interface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "ADDED_MASS_COEFF",
    "FluidEnv",
    "SPONTANEOUS_RELEASE_DIAMETER",
    "VIBRATION_RELEASE_DIAMETER",
    "VibrationSpec",
    "WettingPair",
    "bubble_volume",
    "buoyancy_force",
    "capillary_length",
    "lateral_adhesion_force",
    "release_threshold_diameter",
    "vibration_inertial_force",
    "vibration_peak_acceleration",
]

# Added mass of a sphere oscillating in liquid (half the displaced mass).
# With the default 10 Hz / 6 mm vibration this reproduces the observed
# inertial force scales at both 100 um and 1 mm bubble diameters.
ADDED_MASS_COEFF = 0.5

# Bubbles above the capillary length detach on their own; under full
# vibration the detachment threshold drops to about 1 mm.
SPONTANEOUS_RELEASE_DIAMETER = 2.7e-3
VIBRATION_RELEASE_DIAMETER = 1.0e-3


@dataclass(frozen=True, slots=True)
class FluidEnv:
    """Ambient fluid properties.

    Defaults describe fresh water: the robot's rest density of
    1.0025 g/cm^3 is quoted relative to water near unit density.
    """

    water_density: float = 1000.0  # kg/m^3
    surface_tension: float = 0.072  # N/m
    gravity: float = 9.81  # m/s^2

    def __post_init__(self) -> None:
        if not 950.0 <= self.water_density <= 1100.0:
            raise ValueError(f"water_density {self.water_density} outside [950, 1100] kg/m^3")
        if not 0.02 <= self.surface_tension <= 0.08:
            raise ValueError(f"surface_tension {self.surface_tension} outside [0.02, 0.08] N/m")
        if self.gravity <= 0.0:
            raise ValueError("gravity must be strictly positive")


@dataclass(frozen=True, slots=True)
class WettingPair:
    """Receding/advancing contact angles of the canopy material, degrees."""

    theta_receding: float = 71.0
    theta_advancing: float = 113.0

    def __post_init__(self) -> None:
        if not 0.0 < self.theta_receding <= self.theta_advancing < 180.0:
            raise ValueError(
                "require 0 < theta_receding <= theta_advancing < 180, got "
                f"({self.theta_receding}, {self.theta_advancing})"
            )


@dataclass(frozen=True, slots=True)
class VibrationSpec:
    """Linear canopy oscillation: frequency in Hz, peak-to-peak span in m."""

    frequency: float = 10.0
    span: float = 6e-3

    def __post_init__(self) -> None:
        if self.frequency < 0.0:
            raise ValueError("frequency must be >= 0")
        if self.span < 0.0:
            raise ValueError("span must be >= 0")


def capillary_length(env: FluidEnv) -> float:
    """Length scale sqrt(gamma / (rho g)) above which buoyancy beats pinning.

    About 2.7 mm in water.
    """
    return math.sqrt(env.surface_tension / (env.water_density * env.gravity))


def bubble_volume(diameter: float) -> float:
    """Volume of a spherical bubble of the given diameter."""
    if diameter < 0.0:
        raise ValueError("diameter must be >= 0")
    return math.pi / 6.0 * diameter**3


def buoyancy_force(env: FluidEnv, gas_volume: float) -> float:
    """Archimedes lift rho*g*V of a gas pocket; gas density neglected."""
    if gas_volume < 0.0:
        raise ValueError("gas_volume must be >= 0")
    return env.water_density * env.gravity * gas_volume


def lateral_adhesion_force(env: FluidEnv, contact_width: float, wetting: WettingPair) -> float:
    """Lateral pinning force gamma * L * (cos(theta_rec) - cos(theta_adv)).

    Contact-angle hysteresis makes this non-negative under the WettingPair
    invariant; it vanishes when both angles coincide.
    """
    if contact_width < 0.0:
        raise ValueError("contact_width must be >= 0")
    c_rec = math.cos(math.radians(wetting.theta_receding))
    c_adv = math.cos(math.radians(wetting.theta_advancing))
    return env.surface_tension * contact_width * (c_rec - c_adv)


def vibration_peak_acceleration(vib: VibrationSpec) -> float:
    """Peak acceleration (span/2) * (2 pi f)^2 of sinusoidal canopy motion."""
    omega = 2.0 * math.pi * vib.frequency
    return 0.5 * vib.span * omega * omega


def vibration_inertial_force(env: FluidEnv, diameter: float, acceleration: float) -> float:
    """Inertial force on an anchored bubble dragged through the liquid.

    Scales with bubble volume (added mass of the surrounding liquid), so it
    overtakes the contact-line adhesion, which only grows linearly with
    size, for large enough bubbles.  That crossover is the size selectivity
    of vibration-driven release.
    """
    if acceleration < 0.0:
        raise ValueError("acceleration must be >= 0")
    return ADDED_MASS_COEFF * env.water_density * bubble_volume(diameter) * acceleration


def release_threshold_diameter(vibration_duty: float) -> float:
    """Smallest bubble diameter released at a given vibration duty.

    Calibrated linear interpolation between two observed anchors: the
    capillary length (2.7 mm, spontaneous release at rest) and 1.0 mm at
    full vibration.  A force balance from the raw formulas above predicts a
    much larger threshold than observed, so the anchors are trusted instead.
    """
    if not 0.0 <= vibration_duty <= 1.0:
        raise ValueError(f"vibration_duty {vibration_duty} outside [0, 1]")
    d_spont = SPONTANEOUS_RELEASE_DIAMETER
    d_vib = VIBRATION_RELEASE_DIAMETER
    return d_spont - (d_spont - d_vib) * vibration_duty
