"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

The lines are printed as the tests run (visible with ``pytest -s``) and are
repeated in the terminal summary under "acceptance criteria".
"""
import functools

import numpy as np

from conftest import ACCEPTANCE_LINES, fd_gradient
from krnav.conditions import check_ellipsoid, check_general
from krnav.dynamics import (
    DiffDriveGains,
    DiffDriveState,
    SimConfig,
    diffdrive_dynamic_sim,
    diffdrive_kinematic_sim,
    double_integrator_sim,
    path_deviation,
    reference_path,
)
from krnav.errors import NumericalError
from krnav.experiments import (
    COUNTEREXAMPLE_STARTS,
    DIFFDRIVE_SCENE,
    DOUBLE_INTEGRATOR_SCENE,
    ExperimentSpec,
    collided,
    counterexample_objective,
    counterexample_world,
    run_batch,
    run_counterexample,
    run_trial,
    run_violated_batch,
    trial_scene,
)
from krnav.navigate import AdjustVerdict, FlowConfig, Verdict, adjustable_k
from krnav.potential import (
    CriticalKind,
    PotentialConfig,
    QuadraticObjective,
    grad_phi_k,
    hess_phi_k,
    phi_k,
    potential_state,
)
from krnav.world import EllipsoidObstacle, Workspace, WorldModel, boundary_sample


def report(name, ok, detail):
    ACCEPTANCE_LINES.append((name, bool(ok), detail))
    print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    assert ok, detail


@functools.lru_cache(maxsize=None)
def batch(d, k, c=None):
    return run_batch(ExperimentSpec(d=d, k=k, c=c))


def free_points(world, rng, count, margin):
    out = []
    while len(out) < count:
        x = rng.uniform(-world.workspace.radius, world.workspace.radius, world.dim)
        if np.min(world.factors(x)[0]) > margin:
            out.append(x)
    return out


def test_01_potential_derivatives():
    worst_g = worst_h = 0.0
    for w in range(10):
        world, obj, _ = trial_scene(ExperimentSpec(d=10, seed=100), w, False)
        cfg = PotentialConfig(2.0 + w)
        for x in free_points(world, np.random.default_rng(w), 10, margin=1.0):
            st = potential_state(world, obj, cfg, x)
            g = grad_phi_k(world, obj, cfg, x)
            # phi is within 1e-17 of 1 far from x* at larger k, so differences of phi
            # itself cancel; log phi keeps full precision there and grad phi = phi grad log phi
            fd = st.phi * fd_gradient(lambda p: potential_state(world, obj, cfg, p).log_phi, x, 1e-3)
            worst_g = max(worst_g, np.linalg.norm(g - fd) / np.linalg.norm(g))
            h = hess_phi_k(world, obj, cfg, x)
            fd_h = np.column_stack([fd_gradient(lambda p: grad_phi_k(world, obj, cfg, p)[i], x, 1e-3)
                                    for i in range(world.dim)])
            worst_h = max(worst_h, np.linalg.norm(h - fd_h) / np.linalg.norm(h))
    report("1 potential derivatives", worst_g < 1e-5 and worst_h < 1e-4,
           f"100 points / 10 worlds, k = 2..11, max rel. error gradient {worst_g:.2e} (< 1e-5), Hessian {worst_h:.2e} (< 1e-4)")


def test_02_admissibility_and_polarity():
    worst = 0.0
    exact_goal = True
    for w in range(10):
        world, obj, _ = trial_scene(ExperimentSpec(d=10, seed=200), w, False)
        cfg = PotentialConfig(2.0)
        for ob in (world.workspace, *world.obstacles):
            for p in boundary_sample(ob, 200):
                worst = max(worst, abs(phi_k(world, obj, cfg, p) - 1.0))
        xs = obj.x_star
        exact_goal &= phi_k(world, obj, cfg, xs) == 0.0 and bool(np.all(grad_phi_k(world, obj, cfg, xs) == 0.0))
    report("2 admissibility/polarity", worst < 1e-9 and exact_goal,
           f"max |phi - 1| on 200 samples per boundary = {worst:.1e}; phi(x*) = 0 and grad = 0 exactly: {exact_goal}")


def test_03_counterexamples():
    aligned = run_counterexample("aligned", 10)
    orthogonal = run_counterexample("orthogonal", 10)
    ok = (aligned.verdict is Verdict.CONVERGED_TO_CRITICAL and np.linalg.norm(aligned.final) > 0.5
          and orthogonal.verdict is Verdict.CONVERGED_TO_GOAL and np.linalg.norm(orthogonal.final) < 5e-2)
    report("3 counterexample", ok,
           f"aligned -> {aligned.verdict.value} at {np.round(aligned.final, 3).tolist()} "
           f"({aligned.critical_kind.value}); orthogonal -> {orthogonal.verdict.value}, "
           f"|x - x*| = {np.linalg.norm(orthogonal.final):.1e}")


def test_04_table_one_a():
    rows = {key: batch(*key).summary for key in [(10, 2), (9, 2), (9, 5), (3, 15)]}
    ok = all(s.collisions == 0 for s in rows.values())
    ok &= rows[10, 2].success_rate >= 0.95 and rows[9, 5].success_rate >= 0.95 and rows[3, 15].success_rate >= 0.95
    ok &= rows[9, 2].max_final_dist > 1.0
    detail = "; ".join(
        f"d={d} k={k}: collisions {s.collisions}, success {s.success_rate:.0%}, max final {s.max_final_dist:.3g}"
        for (d, k), s in rows.items()
    )
    report("4 ellipse batches", ok, detail)


def test_05_table_one_b():
    mu2, mu15 = batch(10, 2).summary.path_ratio_mean, batch(10, 15).summary.path_ratio_mean
    report("5 path ratio", 1.0 <= mu2 <= 1.2 and mu15 <= mu2,
           f"d=10 mean path ratio k=2: {mu2:.4f} (in [1, 1.2]); k=15: {mu15:.4f} (<= k=2)")


def random_sphere_world(rng):
    ws = Workspace(np.zeros(2), 20.0)
    spheres = []
    while len(spheres) < 4:
        c, r = rng.uniform(-15.0, 15.0, 2), rng.uniform(2.0, 4.0)
        if np.linalg.norm(c) + r >= 20.0:
            continue
        if any(np.linalg.norm(c - s.center) <= r + s.r for s in spheres):
            continue
        spheres.append(EllipsoidObstacle(c, np.eye(2), r))
    world = WorldModel(ws, spheres, validate=False)
    x_star = free_points(world, rng, 1, margin=0.0)[0]
    return world, QuadraticObjective(np.eye(2), x_star)


def test_06_spherical_worlds():
    rng = np.random.default_rng(6)
    margins = [check_ellipsoid(*random_sphere_world(rng)).margin for _ in range(1000)]
    report("6 spherical worlds", min(margins) > 0,
           f"1000 worlds with Q = I, smallest ellipsoid-condition margin {min(margins):.3g} (> 0)")


def test_07_condition_consistency():
    passed = consistent = 0
    for t in range(100):
        world, obj, _ = trial_scene(ExperimentSpec(d=10, seed=700), t, False)
        if not check_ellipsoid(world, obj).satisfied:
            continue
        passed += 1
        consistent += check_general(world, obj, 512).satisfied
    report("7 condition consistency", passed == 100 and consistent == passed,
           f"{passed}/100 worlds pass the ellipsoid check; {consistent} of them pass the sampled general check")


def test_08_switched_controller():
    result = batch(10, 2, 1.0)
    s = result.summary
    monotone = all(np.all(np.diff(r.trajectory.aware_count) >= 0) for r in result.records)
    # with c = 1 few trials see every obstacle; c = 1000 exercises the full-discovery case
    wide = run_batch(ExperimentSpec(d=10, k=2, c=1000.0, trials=20))
    gap, checked = 0.0, 0
    for r in (*result.records, *wide.records):
        tr, cfg = r.trajectory, PotentialConfig(2.0)
        for i in np.flatnonzero(tr.aware_count == r.world.m):
            gap = max(gap, abs(tr.phi[i] - phi_k(r.world, r.objective, cfg, tr.x[i])))
            checked += 1
        monotone &= bool(np.all(np.diff(tr.aware_count) >= 0))
    collisions = s.collisions + wide.summary.collisions
    ok = collisions == 0 and s.success_rate >= 0.95 and monotone and gap == 0.0 and checked > 0
    report("8 switched controller", ok,
           f"c=1: collisions {s.collisions}, success {s.success_rate:.0%}; awareness monotone {monotone}; "
           f"|phi_A - phi| = {gap} over {checked} fully-discovered states (c = 1 and 1000)")


def test_09_violated_condition_safety():
    rows = {}
    for d, k in [(10, 2), (9, 5), (6, 7), (5, 10), (3, 15)]:
        rows[d, k] = run_violated_batch(ExperimentSpec(d=d, k=k)).summary
    ok = all(s.collisions == 0 for s in rows.values())
    detail = "; ".join(f"d={d} k={k}: collisions {s.collisions}, success {s.success_rate:.0%}"
                       for (d, k), s in rows.items())
    report("9 violated-condition safety", ok, detail)


def test_10_adjustable_order():
    spec = ExperimentSpec(d=3, k=10)
    # first seed-0 trial at d=3 where plain descent with k = 10 misses the goal
    trial = next(t for t in range(1000) if not run_trial(spec, t).success)
    world, obj, x0 = trial_scene(spec, trial, False)
    res = adjustable_k(world, obj, 10, 30, FlowConfig(), x0)
    last = res.segments[-1]
    ok_world = (res.verdict is AdjustVerdict.MINIMUM and res.k <= 30
                and last.critical_kind is CriticalKind.MINIMUM
                and np.linalg.norm(res.x - obj.x_star) <= FlowConfig().goal_tolerance)
    safe = all(not collided(world, seg) for seg in res.segments)
    cx = adjustable_k(counterexample_world("aligned"), counterexample_objective(3.0), 10, 20,
                      FlowConfig(max_iters=50000), COUNTEREXAMPLE_STARTS["aligned"])
    ok_cx = cx.verdict is AdjustVerdict.K_MAX and cx.k == 20 and cx.condition_flagged
    report("10 adjustable order", ok_world and safe and ok_cx,
           f"d=3 trial {trial}: {res.verdict.value} at k={res.k:g}, |x - x*| = {np.linalg.norm(res.x - obj.x_star):.1e}, "
           f"collision-free {safe}; aligned counterexample: {cx.verdict.value} at k={cx.k:g}, "
           f"flagged {cx.condition_flagged}")


def test_11_dynamics():
    sc = DOUBLE_INTEGRATOR_SCENE
    world, obj, cfg = sc.world(), sc.objective(), sc.potential()
    ref = reference_path(world, obj, cfg, sc.start(), 1e-3 * sc.scale)
    sim = SimConfig(dt=1e-4, max_steps=30000, record_every=5)
    runs = {K: double_integrator_sim(world, obj, cfg, K, sim, sc.start()) for K in (4e3, 5e3)}
    dev = {K: path_deviation(tr.x, ref) / sc.scale for K, tr in runs.items()}
    di_ok = (runs[5e3].verdict is not Verdict.COLLISION and not collided(world, runs[5e3])
             and dev[5e3] < dev[4e3])

    sc = DIFFDRIVE_SCENE
    world, obj, cfg = sc.world(), sc.objective(), sc.potential()
    state = DiffDriveState(sc.start(), 0.0)
    kin = diffdrive_kinematic_sim(world, obj, cfg, DiffDriveGains(k_v=1, k_omega=1),
                                  SimConfig(dt=0.05, max_steps=40000, goal_tolerance=0.2, record_every=10), state)
    dyn = diffdrive_dynamic_sim(world, obj, cfg, DiffDriveGains(k_v=1, k_omega=1, k_vd=4, k_omegad=10),
                                SimConfig(dt=0.1, max_steps=60000, goal_tolerance=0.2, record_every=10), state)
    dist = {name: float(np.linalg.norm(tr.final - obj.x_star)) for name, tr in (("kinematic", kin), ("dynamic", dyn))}
    dd_ok = all(d <= 0.2 for d in dist.values()) and not collided(world, kin) and not collided(world, dyn)
    report("11 dynamics", di_ok and dd_ok,
           f"double integrator max deviation / scale: K=4e3 {dev[4e3]:.2e}, K=5e3 {dev[5e3]:.2e}; "
           f"diff drive final distance kinematic {dist['kinematic']:.3f}, dynamic {dist['dynamic']:.3f} (<= 0.2)")


def test_12_numerical_stability():
    world, obj, _ = trial_scene(ExperimentSpec(d=10), 0, False)
    steep = QuadraticObjective(1000.0 * obj.Q, obj.x_star)
    log_cfg, direct_cfg = PotentialConfig(50.0), PotentialConfig(50.0, "direct")
    overflow = agree = 0
    worst = 0.0
    finite = True
    for x in free_points(world, np.random.default_rng(12), 400, margin=0.0):
        a = potential_state(world, steep, log_cfg, x)
        finite &= bool(np.isfinite(a.phi) and np.isfinite(a.log_phi) and np.all(np.isfinite(a.grad)))
        try:
            b = potential_state(world, steep, direct_cfg, x)
        except NumericalError:
            overflow += 1
            continue
        agree += 1
        worst = max(worst, abs(a.phi - b.phi) / b.phi)
    # along a ray from x* in an obstacle-free disc phi_k is increasing; the far end overflows directly
    disc = WorldModel(Workspace(np.zeros(2), 60.0), [])
    ray_obj = QuadraticObjective(1000.0 * np.eye(2), [0.0, 0.0])
    ts = np.linspace(0.0, 59.0, 400)
    logs = [potential_state(disc, ray_obj, log_cfg, [t, 0.0]).log_phi for t in ts]
    monotone = bool(np.all(np.diff(logs) >= 0))
    try:
        phi_k(disc, ray_obj, direct_cfg, [59.0, 0.0])
        ray_overflows = False
    except NumericalError:
        ray_overflows = True
    ok = finite and overflow > 0 and worst < 1e-12 and monotone and ray_overflows
    report("12 numerical stability", ok,
           f"k=50: log-domain finite at all 400 points, direct overflows at {overflow}; "
           f"max rel. disagreement {worst:.1e} over {agree} shared points; log phi monotone on a ray: {monotone}")
