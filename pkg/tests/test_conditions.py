import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from krnav.conditions import check_ellipsoid, check_general, condition_numbers, max_condition_number
from krnav.errors import InputError
from krnav.experiments import ExperimentSpec, admissible_objective, trial_rng, trial_scene
from krnav.potential import QuadraticObjective
from krnav.world import EggObstacle, EllipsoidObstacle, Workspace, WorldModel, boundary_sample


def circle_world(center=(-4.0, 0.0)):
    return WorldModel(Workspace(np.zeros(2), 20.0), [EllipsoidObstacle(center, np.eye(2), 2.0)])


def objective(ratio):
    return QuadraticObjective(np.diag([1.0, ratio]), [0.0, 0.0])


def test_ellipsoid_condition_at_the_threshold():
    world = circle_world()
    report = check_ellipsoid(world, objective(3.0))
    assert report.margin == pytest.approx(0.0, abs=1e-15)
    assert not report.satisfied
    report = check_ellipsoid(world, objective(2.9))
    assert report.margin == pytest.approx(0.1, abs=1e-12)
    assert report.satisfied


def test_max_condition_number():
    assert max_condition_number(circle_world(), [0.0, 0.0]) == pytest.approx(3.0)
    ws = Workspace(np.zeros(2), 20.0)
    two = WorldModel(ws, [EllipsoidObstacle([-4.0, 0.0], np.eye(2), 2.0),
                          EllipsoidObstacle([0.0, 9.0], np.diag([1.0, 2.0]), 1.0)])
    per = condition_numbers(two, [0.0, 0.0])
    np.testing.assert_allclose(per, [3.0, 10.0 / 2.0])
    assert max_condition_number(two, [0.0, 0.0]) == per.min()


def test_general_condition_brute_force():
    # LHS at (-6, 0) is 3 * (-4, 0).(-6, 0) / 36 = 2 = 2 * mu_min(A): the margin closes there
    world = circle_world()
    report = check_general(world, objective(3.0), 512)
    assert report.margin == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(report.witness, [-6.0, 0.0], atol=1e-12)
    assert check_general(world, objective(2.9), 512).satisfied


def test_general_condition_far_side_has_large_margin():
    world = circle_world()
    pts = boundary_sample(world.obstacles[0], 512)
    front = pts[np.argmax(pts[:, 0])]
    lhs = 3.0 * world.obstacles[0].grad(front) @ front / (front @ front)
    assert lhs < 0


def test_general_condition_errors():
    world = circle_world()
    with pytest.raises(InputError):
        check_general(world, QuadraticObjective(np.eye(2), [-2.0, 0.0]))
    with pytest.raises(InputError):
        check_general(world, objective(1.0), 16)
    egg_world = WorldModel(Workspace(np.zeros(2), 20.0), [EggObstacle([5.0, 5.0], 1.0)])
    with pytest.raises(InputError):
        check_ellipsoid(egg_world, objective(1.0))


def test_report_serializes():
    data = check_general(circle_world(), objective(2.0), 64).to_dict()
    assert data["method"] == "general" and data["satisfied"]
    assert len(data["obstacles"]) == 1 and data["obstacles"][0]["samples_used"] == 64


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_admissible_objectives_satisfy_both_checks(seed):
    world, obj, _ = trial_scene(ExperimentSpec(d=10, seed=seed), 0, False)
    assert check_ellipsoid(world, obj).satisfied
    assert check_general(world, obj, 512).satisfied


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.01, 0.99))
def test_condition_number_is_the_threshold(seed, frac):
    world, obj, _ = trial_scene(ExperimentSpec(d=10, seed=seed), 0, False)
    n_cond = max_condition_number(world, obj.x_star)
    assume(n_cond > 1.0)
    rng = trial_rng(seed, 1)
    for ratio, expected in ((1.0 + frac * (n_cond - 1.0), True), (n_cond * (1.0 + frac), False)):
        q = QuadraticObjective(np.diag([1.0, ratio]), obj.x_star)
        assert check_ellipsoid(world, q).satisfied is expected
    assert check_ellipsoid(world, admissible_objective(world, obj.x_star, rng)).satisfied
