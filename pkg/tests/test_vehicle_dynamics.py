import pytest

from buoysim.bubble_physics import FluidEnv
from buoysim.vehicle_dynamics import (
    RobotParams,
    VehicleState,
    net_vertical_force,
    step_dynamics,
    terminal_velocity,
)

WATER = FluidEnv()
ROBOT = RobotParams()


DEEP_TANK = RobotParams(tank_depth=1000.0)


def settle(force_up, dt=1e-3, seconds=10.0):
    # Constant applied force plus velocity drag, in water deep enough that
    # contacts never interfere.
    state = VehicleState(depth=500.0)
    for _ in range(round(seconds / dt)):
        v_up = -state.velocity
        drag = DEEP_TANK.drag_coeff * abs(v_up) * v_up
        state = step_dynamics(state, force_up - drag, dt, DEEP_TANK)
    return state


def test_rest_trim_sinks():
    at_rest = VehicleState(depth=0.1)
    force = net_vertical_force(at_rest, 0.0, WATER, ROBOT)
    assert force == pytest.approx(-2.740e-3, rel=1e-3)


def test_neutral_gas_volume():
    at_rest = VehicleState(depth=0.1)
    neutral = 2.793e-7
    assert net_vertical_force(at_rest, neutral, WATER, ROBOT) == pytest.approx(0.0, abs=5e-7)


def test_drag_opposes_motion():
    ascending = VehicleState(depth=0.1, velocity=-0.01)
    descending = VehicleState(depth=0.1, velocity=0.01)
    still = VehicleState(depth=0.1)
    f_still = net_vertical_force(still, 0.0, WATER, ROBOT)
    assert net_vertical_force(ascending, 0.0, WATER, ROBOT) < f_still
    assert net_vertical_force(descending, 0.0, WATER, ROBOT) > f_still


def test_terminal_velocity_calibration():
    assert terminal_velocity(1e-3, ROBOT) == pytest.approx(11.30e-3, rel=1e-3)
    assert terminal_velocity(0.0, ROBOT) == 0.0
    assert terminal_velocity(4e-3, ROBOT) == pytest.approx(2 * terminal_velocity(1e-3, ROBOT), rel=1e-12)
    with pytest.raises(ValueError):
        terminal_velocity(1e-3, RobotParams(drag_coeff=0.0))


def test_step_dynamics_settles_to_terminal_velocity():
    state = settle(1e-3)
    assert -state.velocity == pytest.approx(terminal_velocity(1e-3, ROBOT), rel=1e-2)
    assert -state.velocity == pytest.approx(11.3e-3, rel=2e-2)


@pytest.mark.parametrize("force_mn", [0.1, 0.5, 1.0, 5.0, 10.0])
def test_settled_speed_matches_analytic_oracle(force_mn):
    force = force_mn * 1e-3
    state = settle(force, seconds=20.0)
    assert abs(state.velocity) == pytest.approx(terminal_velocity(force, ROBOT), rel=1e-2)


def test_equilibrium_is_fixed_point():
    state = VehicleState(depth=0.2)
    after = step_dynamics(state, 0.0, 1e-3, ROBOT)
    assert after.depth == state.depth
    assert after.velocity == 0.0


def test_bottom_contact_is_sticky_under_downward_force():
    state = VehicleState(depth=ROBOT.tank_depth, velocity=0.0, on_bottom=True)
    after = step_dynamics(state, -1e-3, 1e-3, ROBOT)
    assert after.depth == ROBOT.tank_depth
    assert after.velocity == 0.0
    assert after.on_bottom


def test_surface_contact_clamps():
    state = VehicleState(depth=1e-5, velocity=-0.05)
    after = step_dynamics(state, 5e-3, 1e-3, ROBOT)
    assert after.depth == 0.0
    assert after.velocity == 0.0
    assert after.at_surface


def test_leaving_bottom_clears_flag():
    state = VehicleState(depth=ROBOT.tank_depth, velocity=0.0, on_bottom=True)
    after = step_dynamics(state, 5e-3, 1e-3, ROBOT)
    assert not after.on_bottom


def test_energy_drift_shrinks_with_dt():
    # Drag-free constant-force flight: the semi-implicit integrator's
    # mechanical-energy drift is proportional to dt.
    params = RobotParams(drag_coeff=0.0, tank_depth=1e6)
    force = 5e-4

    def drift(dt, steps):
        state = VehicleState(depth=5e5)
        z0 = state.depth
        e0 = 0.0
        worst = 0.0
        for _ in range(steps):
            state = step_dynamics(state, force, dt, params)
            kinetic = 0.5 * params.mass * state.velocity**2
            potential = force * (z0 - state.depth) * -1.0
            worst = max(worst, abs(kinetic + potential - e0))
        return worst

    d_coarse = drift(1e-3, 100_000)
    d_fine = drift(5e-4, 200_000)
    assert d_fine < d_coarse
    assert d_fine == pytest.approx(d_coarse / 2, rel=0.05)


def test_trajectory_dt_convergence():
    # Slightly negative trim sinking through open water for a minute; the
    # trajectory never touches a wall so clamping cannot mask dt effects.
    gas = 2.6e-7

    def final_depth(dt):
        state = VehicleState(depth=0.02)
        for _ in range(round(60.0 / dt)):
            force = net_vertical_force(state, gas, WATER, ROBOT)
            state = step_dynamics(state, force, dt, ROBOT)
        assert not state.on_bottom and not state.at_surface
        return state.depth

    err_coarse = abs(final_depth(4e-3) - final_depth(1e-3))
    err_fine = abs(final_depth(2e-3) - final_depth(1e-3))
    assert err_fine < err_coarse
    assert err_coarse < 1e-4


def test_invalid_inputs():
    with pytest.raises(ValueError):
        step_dynamics(VehicleState(depth=0.1), 0.0, 0.0, ROBOT)
    with pytest.raises(ValueError):
        RobotParams(mass=0.0)
    with pytest.raises(ValueError):
        RobotParams(tank_depth=-1.0)
