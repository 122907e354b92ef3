"""Plants driven by the navigation potential.

* double integrator ``x'' = tau`` with ``tau = -grad phi_k(x) - K x'``;
* differential-drive robot ``x' = v (cos th, sin th)``, ``th' = w``, either
  kinematic (v, w set to the commanded values) or dynamic
  (``v' = tau_v``, ``w' = tau_w``).

Sign convention for the robot.  The desired heading ``theta_d`` points along
+grad phi and the commanded speed

    v_c = -sgn(grad phi . h(theta)) * k_v * |grad phi|^2,   sgn(0) = 1,

is negative when the heading faces uphill, so the robot drives along
-grad phi either forwards or in reverse.  The dynamic variant regulates
the speeds toward the commands,

    tau_v = v_c - k_vd * v,    tau_w = w_c - k_wd * w,

so that the steady state v = v_c / k_vd moves downhill.  Negating v_c a
second time would make the closed loop ascend the potential.

All integrators are fixed-step semi-implicit: velocities are updated first
and the new velocities move the position.  Every state is checked against
the full world; a state with some ``beta_i < inflation`` ends the run with
the ``collision`` verdict.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from krnav.errors import DomainError, InputError
from krnav.navigate import Trajectory, Verdict, _check_start
from krnav.potential import PotentialConfig, potential_state
from krnav.world import WorldModel, _as_point


@dataclass(frozen=True)
class SimConfig:
    """Fixed-step integration settings.

    ``record_every`` thins the stored trajectory (the first and last states are
    always kept).  The run stops early once the state is within
    ``goal_tolerance`` of x* and the speed is below ``rest_speed``.
    """

    dt: float = 1e-4
    max_steps: int = 100_000
    goal_tolerance: float = 1e-2
    rest_speed: float = 0.0
    record_every: int = 1
    inflation: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise InputError("dt must be positive")
        if not self.max_steps > 0:
            raise InputError("max_steps must be positive")
        if not self.record_every >= 1:
            raise InputError("record_every must be >= 1")
        if self.inflation < 0:
            raise InputError("inflation must be nonnegative")


@dataclass(frozen=True)
class SecondOrderState:
    x: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class DiffDriveState:
    x: np.ndarray
    theta: float
    v: float = 0.0
    omega: float = 0.0


@dataclass(frozen=True)
class DiffDriveGains:
    k_v: float = 1.0
    k_omega: float = 1.0
    k_vd: float = 4.0
    k_omegad: float = 10.0


def wrap_angle(a: float) -> float:
    """Map an angle to (-pi, pi]."""
    w = math.remainder(a, 2.0 * math.pi)
    return math.pi if w == -math.pi else w


def sgn(a: float) -> float:
    return 1.0 if a >= 0 else -1.0


def diffdrive_command(grad: np.ndarray, theta: float, gains: DiffDriveGains) -> tuple[float, float]:
    """Commanded (v_c, omega_c) for a potential gradient and heading."""
    heading = np.array([math.cos(theta), math.sin(theta)])
    v_c = -sgn(float(grad @ heading)) * gains.k_v * float(grad @ grad)
    if grad[0] == 0.0 and grad[1] == 0.0:
        return v_c, 0.0
    theta_d = math.atan2(grad[1], grad[0])
    return v_c, gains.k_omega * wrap_angle(theta_d - theta)


class _Log:
    def __init__(self, every):
        self.every = every
        self.rows = []

    def add(self, step, t, x, phi, gnorm, extra, force=False):
        if force or step % self.every == 0:
            if self.rows and self.rows[-1][0] == step:
                return
            self.rows.append((step, t, np.array(x), phi, gnorm, extra))

    def build(self, verdict, k, names) -> Trajectory:
        cols = list(zip(*self.rows))
        extra = np.array(cols[5], dtype=float).reshape(len(self.rows), -1)
        return Trajectory(
            np.array(cols[1]), np.array(cols[2]), np.array(cols[3]), np.array(cols[4]),
            verdict, k, extra={name: extra[:, j] for j, name in enumerate(names)},
        )


def _collides(world, x, inflation) -> bool:
    vals, _ = world.factors(x)
    return bool(np.any(vals < inflation)) or not np.all(np.isfinite(vals))


def double_integrator_sim(world: WorldModel, obj, cfg: PotentialConfig, K: float,
                          sim: SimConfig, x0, v0=None) -> Trajectory:
    """Damped double integrator under ``tau = -grad phi_k - K v``.

    Extra trajectory columns ``v0, v1, ...`` hold the velocity components.
    """
    if not K > 0:
        raise InputError("damping K must be positive")
    x = _check_start(world, x0)
    v = np.zeros_like(x) if v0 is None else _as_point(v0, world.dim).copy()
    names = [f"v{j}" for j in range(world.dim)]
    x_star = np.asarray(obj.x_star)
    log = _Log(sim.record_every)
    st = potential_state(world, obj, cfg, x)
    log.add(0, 0.0, x, st.phi, float(np.linalg.norm(st.grad)), v.copy())
    verdict = Verdict.MAX_ITERS
    for step in range(1, sim.max_steps + 1):
        v = v + sim.dt * (-st.grad - K * v)
        x = x + sim.dt * v
        t = step * sim.dt
        if _collides(world, x, sim.inflation):
            log.add(step, t, x, math.nan, math.nan, v.copy(), force=True)
            verdict = Verdict.COLLISION
            break
        st = potential_state(world, obj, cfg, x)
        done = np.linalg.norm(x - x_star) <= sim.goal_tolerance and np.linalg.norm(v) <= sim.rest_speed
        log.add(step, t, x, st.phi, float(np.linalg.norm(st.grad)), v.copy(), force=done)
        if done:
            verdict = Verdict.CONVERGED_TO_GOAL
            break
    else:
        log.add(step, t, x, st.phi, float(np.linalg.norm(st.grad)), v.copy(), force=True)
        if np.linalg.norm(x - x_star) <= sim.goal_tolerance:
            verdict = Verdict.CONVERGED_TO_GOAL
    return log.build(verdict, cfg.k, names)


def _diffdrive(world, obj, cfg, gains, sim, state0, dynamic) -> Trajectory:
    if world.dim != 2:
        raise InputError("the differential-drive robot lives in the plane")
    x = _check_start(world, state0.x)
    theta = wrap_angle(float(state0.theta))
    v, w = (float(state0.v), float(state0.omega)) if dynamic else (0.0, 0.0)
    x_star = np.asarray(obj.x_star)
    log = _Log(sim.record_every)
    st = potential_state(world, obj, cfg, x)
    log.add(0, 0.0, x, st.phi, float(np.linalg.norm(st.grad)), (theta, v, w))
    verdict = Verdict.MAX_ITERS
    for step in range(1, sim.max_steps + 1):
        v_c, w_c = diffdrive_command(st.grad, theta, gains)
        if dynamic:
            v += sim.dt * (v_c - gains.k_vd * v)
            w += sim.dt * (w_c - gains.k_omegad * w)
        else:
            v, w = v_c, w_c
        x = x + sim.dt * v * np.array([math.cos(theta), math.sin(theta)])
        theta = wrap_angle(theta + sim.dt * w)
        t = step * sim.dt
        if _collides(world, x, sim.inflation):
            log.add(step, t, x, math.nan, math.nan, (theta, v, w), force=True)
            verdict = Verdict.COLLISION
            break
        st = potential_state(world, obj, cfg, x)
        done = np.linalg.norm(x - x_star) <= sim.goal_tolerance and abs(v) <= sim.rest_speed
        log.add(step, t, x, st.phi, float(np.linalg.norm(st.grad)), (theta, v, w), force=done)
        if done:
            verdict = Verdict.CONVERGED_TO_GOAL
            break
    else:
        log.add(step, t, x, st.phi, float(np.linalg.norm(st.grad)), (theta, v, w), force=True)
        if np.linalg.norm(x - x_star) <= sim.goal_tolerance:
            verdict = Verdict.CONVERGED_TO_GOAL
    return log.build(verdict, cfg.k, ["theta", "v", "omega"])


def diffdrive_kinematic_sim(world: WorldModel, obj, cfg: PotentialConfig, gains: DiffDriveGains,
                            sim: SimConfig, state0: DiffDriveState) -> Trajectory:
    """Unicycle kinematics with v and omega set to the commanded values."""
    return _diffdrive(world, obj, cfg, gains, sim, state0, dynamic=False)


def diffdrive_dynamic_sim(world: WorldModel, obj, cfg: PotentialConfig, gains: DiffDriveGains,
                          sim: SimConfig, state0: DiffDriveState) -> Trajectory:
    """Unicycle with first-order speed dynamics regulated toward the commands."""
    return _diffdrive(world, obj, cfg, gains, sim, state0, dynamic=True)


def path_deviation(path: np.ndarray, reference: np.ndarray) -> float:
    """Largest distance from a point of ``path`` to the polyline ``reference``."""
    a, b = reference[:-1], reference[1:]
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    denom[denom == 0] = 1.0
    worst = 0.0
    for p in path:
        s = np.clip(np.einsum("ij,ij->i", p - a, ab) / denom, 0.0, 1.0)
        d = np.min(np.linalg.norm(a + s[:, None] * ab - p, axis=1))
        worst = max(worst, float(d))
    return worst


def reference_path(world: WorldModel, obj, cfg: PotentialConfig, x0, h: float,
                   max_steps: int = 100_000) -> np.ndarray:
    """Geometric path of the gradient flow from ``x0`` (RK4 in arc length).

    Integrates ``dx/ds = -grad phi / |grad phi|`` with step ``h`` until the goal
    is within ``h`` or the direction field stops being defined.
    """
    x = _check_start(world, x0)
    x_star = np.asarray(obj.x_star)

    def direction(p):
        try:
            g = potential_state(world, obj, cfg, p).grad
        except DomainError:
            return None
        n = np.linalg.norm(g)
        return None if n == 0 else -g / n

    path = [x]
    for _ in range(max_steps):
        if np.linalg.norm(x - x_star) <= h:
            path.append(x_star.copy())
            break
        slopes = []
        for frac in (0.0, 0.5, 0.5, 1.0):
            p = x if not slopes else x + frac * h * slopes[-1]
            d = direction(p)
            if d is None:
                break
            slopes.append(d)
        if len(slopes) < 4:
            break
        k1, k2, k3, k4 = slopes
        x = x + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        path.append(x)
    return np.array(path)
