import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from krnav.dynamics import (
    DiffDriveGains,
    DiffDriveState,
    SimConfig,
    diffdrive_command,
    diffdrive_dynamic_sim,
    diffdrive_kinematic_sim,
    double_integrator_sim,
    path_deviation,
    reference_path,
    sgn,
    wrap_angle,
)
from krnav.errors import InputError
from krnav.experiments import DIFFDRIVE_SCENE, DOUBLE_INTEGRATOR_SCENE
from krnav.navigate import Verdict
from krnav.potential import PotentialConfig, QuadraticObjective
from krnav.world import EllipsoidObstacle, Workspace, WorldModel


def test_sign_convention():
    assert sgn(0.0) == 1.0 and sgn(-0.0) == 1.0 and sgn(-1e-300) == -1.0


@given(st.floats(-100.0, 100.0))
def test_wrap_angle_range(a):
    w = wrap_angle(a)
    assert -math.pi < w <= math.pi
    assert math.isclose(math.cos(w), math.cos(a), abs_tol=1e-9)
    assert math.isclose(math.sin(w), math.sin(a), abs_tol=1e-9)


def test_wrap_angle_edges():
    assert wrap_angle(-math.pi) == math.pi
    assert wrap_angle(math.pi) == math.pi
    assert wrap_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)


def test_commands():
    gains = DiffDriveGains()
    # zero gradient: no motion, no turning
    assert diffdrive_command(np.zeros(2), 0.3, gains) == (-0.0, 0.0)
    # heading aligned with the gradient: no turning, reverse along -grad
    v, w = diffdrive_command(np.array([0.0, 2.0]), math.pi / 2, gains)
    assert w == 0.0 and v == -4.0
    # heading opposite to the gradient drives forward, turning toward theta_d
    v, w = diffdrive_command(np.array([1.0, 0.0]), 3.0, gains)
    assert v == 1.0 and w == pytest.approx(wrap_angle(-3.0))


def scene(sc):
    return sc.world(), sc.objective(), sc.potential()


def test_double_integrator_rests_at_goal():
    world, obj, cfg = scene(DOUBLE_INTEGRATOR_SCENE)
    traj = double_integrator_sim(world, obj, cfg, 1e3, SimConfig(max_steps=50), obj.x_star)
    assert np.all(traj.x == obj.x_star)
    assert traj.verdict is Verdict.CONVERGED_TO_GOAL


def test_double_integrator_rejects_bad_input():
    world, obj, cfg = scene(DOUBLE_INTEGRATOR_SCENE)
    with pytest.raises(InputError):
        double_integrator_sim(world, obj, cfg, 0.0, SimConfig(), DOUBLE_INTEGRATOR_SCENE.start())
    with pytest.raises(InputError):
        SimConfig(dt=0.0)


def test_double_integrator_energy_decreases():
    world, obj, cfg = scene(DOUBLE_INTEGRATOR_SCENE)
    sim = SimConfig(dt=1e-4, max_steps=5000)
    traj = double_integrator_sim(world, obj, cfg, 5e3, sim, DOUBLE_INTEGRATOR_SCENE.start())
    v = np.column_stack([traj.extra["v0"], traj.extra["v1"]])
    energy = traj.phi + 0.5 * np.sum(v * v, axis=1)
    assert np.all(np.diff(energy) <= 1e-6 * sim.dt)


def test_double_integrator_collision_is_reported():
    world = WorldModel(Workspace(np.zeros(2), 10.0), [EllipsoidObstacle([2.0, 0.0], np.eye(2), 1.0)])
    obj = QuadraticObjective(np.eye(2), [5.0, 0.0])
    # fast initial velocity straight into the obstacle, negligible damping
    traj = double_integrator_sim(world, obj, PotentialConfig(2), 1e-3, SimConfig(dt=1e-3, max_steps=5000),
                                 [-2.0, 0.0], v0=[50.0, 0.0])
    assert traj.verdict is Verdict.COLLISION
    assert np.isnan(traj.phi[-1])


def test_diffdrive_rests_at_goal():
    world, obj, cfg = scene(DIFFDRIVE_SCENE)
    state = DiffDriveState(obj.x_star, 0.7)
    for fn in (diffdrive_kinematic_sim, diffdrive_dynamic_sim):
        traj = fn(world, obj, cfg, DiffDriveGains(), SimConfig(dt=0.05, max_steps=20), state)
        assert np.all(traj.x == obj.x_star)
        assert np.all(traj.extra["theta"] == 0.7)


def test_diffdrive_is_planar():
    world = WorldModel(Workspace(np.zeros(3), 10.0), [])
    obj = QuadraticObjective(np.eye(3), np.zeros(3))
    with pytest.raises(InputError):
        diffdrive_kinematic_sim(world, obj, PotentialConfig(2), DiffDriveGains(), SimConfig(),
                                DiffDriveState(np.ones(3), 0.0))


def test_diffdrive_heading_stays_wrapped():
    world, obj, cfg = scene(DIFFDRIVE_SCENE)
    traj = diffdrive_dynamic_sim(world, obj, cfg, DiffDriveGains(), SimConfig(dt=0.1, max_steps=3000),
                                 DiffDriveState(DIFFDRIVE_SCENE.start(), 3.0))
    theta = traj.extra["theta"]
    assert np.all((theta > -math.pi) & (theta <= math.pi))


def test_diffdrive_damping_sweep():
    # larger speed damping keeps the dynamic robot closer to the kinematic path
    world, obj, cfg = scene(DIFFDRIVE_SCENE)
    start = DiffDriveState(DIFFDRIVE_SCENE.start(), 0.0)
    kin = diffdrive_kinematic_sim(world, obj, cfg, DiffDriveGains(),
                                  SimConfig(dt=0.05, max_steps=40000, goal_tolerance=0.2, rest_speed=math.inf),
                                  start)
    deviations = []
    for k_vd in (2.0, 4.0, 8.0):
        sim = SimConfig(dt=0.1, max_steps=int(15000 * k_vd), goal_tolerance=0.2, rest_speed=math.inf,
                        record_every=10)
        dyn = diffdrive_dynamic_sim(world, obj, cfg, DiffDriveGains(k_vd=k_vd), sim, start)
        assert dyn.verdict is Verdict.CONVERGED_TO_GOAL
        deviations.append(path_deviation(dyn.x, kin.x))
    assert deviations[0] > deviations[1] > deviations[2]


def test_path_deviation():
    ref = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])
    assert path_deviation(ref, ref) == 0.0
    assert path_deviation(np.array([[0.5, 0.2], [1.3, 0.5]]), ref) == pytest.approx(0.3)


def test_reference_path_reaches_goal():
    world, obj, cfg = scene(DIFFDRIVE_SCENE)
    h = 0.01
    path = reference_path(world, obj, cfg, DIFFDRIVE_SCENE.start(), h)
    np.testing.assert_array_equal(path[-1], obj.x_star)
    steps = np.linalg.norm(np.diff(path[:-1], axis=0), axis=1)
    np.testing.assert_allclose(steps, h, rtol=1e-2)
