"""Discrete gradient flows of phi_k and the adjustable-order procedure.

All flows share one integrator: x_{t+1} = x_t - eps_t * d_t with d_t the
gradient (or the normalized gradient).  A candidate step is halved while it
leaves the free space of the *full* world or, with backtracking enabled,
fails to decrease the potential being followed.

Convergence is declared from the Newton displacement |H^{-1} grad phi|, which
is scale free: the raw gradient of phi_k spans tens of orders of magnitude
across a world (it is ~1e-17 far from the goal at k = 10), so an absolute
gradient threshold cannot tell a critical point from a flat region.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from krnav.errors import InputError
from krnav.potential import (
    CriticalKind,
    PotentialConfig,
    classify_hessian,
    hess_phi_k,
    phi_and_grad,
    potential_state,
)
from krnav.world import WorldModel, _as_point


class StepSchedule(str, Enum):
    CONSTANT = "constant"
    DIMINISHING = "diminishing"
    ADAPTIVE = "adaptive"


class Verdict(str, Enum):
    CONVERGED_TO_GOAL = "converged_to_goal"
    CONVERGED_TO_CRITICAL = "converged_to_critical"
    MAX_ITERS = "max_iters"
    COLLISION = "collision"
    LEFT_WORKSPACE = "left_workspace"


@dataclass(frozen=True)
class FlowConfig:
    """Step schedule and stopping rules.

    ``adaptive`` controls the step length instead of the multiplier:
    eps_t = l_t / |grad phi| with l_0 = ``eps0``, doubled after every move that
    needed no halving, so the flow crosses regions where |grad phi| is
    astronomically small.  ``constant`` uses ``eps0`` and ``diminishing`` uses
    ``eps0 / (1 + gamma * t)``.  ``max_step`` caps the displacement of a
    single step (length units).  ``gradient_tolerance`` is an optional
    absolute test on |grad phi|; ``stationarity_tolerance`` bounds the Newton
    displacement at a declared critical point.
    """

    schedule: StepSchedule = StepSchedule.ADAPTIVE
    eps0: float = 1e-2
    gamma: float = 1e-3
    growth: float = 2.0
    max_step: float | None = 0.25
    max_iters: int = 20000
    gradient_tolerance: float = 0.0
    stationarity_tolerance: float = 1e-5
    goal_tolerance: float = 1e-2
    backtracking: bool = True
    max_halvings: int = 40
    check_every: int = 5
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "schedule", StepSchedule(self.schedule))
        if not self.eps0 > 0:
            raise InputError("eps0 must be positive")
        if not self.max_iters > 0:
            raise InputError("max_iters must be positive")
        if self.gradient_tolerance < 0 or not self.stationarity_tolerance > 0:
            raise InputError("tolerances must be positive")
        if self.max_step is not None and not self.max_step > 0:
            raise InputError("max_step must be positive")

    def step_size(self, t: int, previous: float | None, grow: bool = True) -> float:
        if self.schedule is StepSchedule.CONSTANT:
            return self.eps0
        if self.schedule is StepSchedule.DIMINISHING:
            return self.eps0 / (1.0 + self.gamma * t)
        if previous is None:
            return self.eps0
        return previous * self.growth if grow else previous


class AwarenessSet:
    """Obstacles whose c-neighborhood (beta_i <= c) has been visited."""

    def __init__(self, c: float):
        if not c > 0:
            raise InputError(f"sensing constant c must be positive, got {c}")
        self.c = float(c)
        self.discovered: list[int] = []
        self.events: list[tuple[float, int]] = []

    def update(self, factor_values: np.ndarray, t: float) -> list[int]:
        new = [
            i for i in range(1, factor_values.shape[0])
            if factor_values[i] <= self.c and i not in self.discovered
        ]
        for i in new:
            self.discovered.append(i)
            self.events.append((t, i))
        return new

    def indices(self) -> tuple[int, ...]:
        return tuple(sorted(self.discovered))

    def __contains__(self, i) -> bool:
        return i in self.discovered

    def __len__(self) -> int:
        return len(self.discovered)


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    phi: np.ndarray
    grad_norm: np.ndarray
    verdict: Verdict
    k: float
    discoveries: list[tuple[float, int]] = field(default_factory=list)
    extra: dict[str, np.ndarray] = field(default_factory=dict)
    critical_kind: CriticalKind | None = None
    aware_count: np.ndarray | None = None

    @property
    def final(self) -> np.ndarray:
        return self.x[-1]

    @property
    def steps(self) -> int:
        return self.x.shape[0] - 1

    def path_length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.x, axis=0), axis=1)))


class _Recorder:
    def __init__(self):
        self.t, self.x, self.phi, self.gn, self.aware = [], [], [], [], []

    def add(self, t, x, phi, gnorm, aware=None):
        self.t.append(t)
        self.x.append(np.array(x))
        self.phi.append(phi)
        self.gn.append(gnorm)
        self.aware.append(aware)

    def build(self, verdict, k, **kw) -> Trajectory:
        aware = None if self.aware[0] is None else np.array(self.aware, dtype=int)
        return Trajectory(
            np.array(self.t, dtype=float), np.array(self.x), np.array(self.phi),
            np.array(self.gn), verdict, k, aware_count=aware, **kw,
        )


def _check_start(world: WorldModel, x0) -> np.ndarray:
    x = _as_point(x0, world.dim)
    vals, _ = world.factors(x)
    if not np.all(vals > 0):
        raise InputError(f"start {x.tolist()} is not in the interior of the free space")
    return x


def newton_displacement(world, obj, cfg, x, grad=None):
    """|H^{-1} grad phi| and the Hessian (inf when H is singular)."""
    if grad is None:
        grad = phi_and_grad(world, obj, cfg, x)[1]
    h = hess_phi_k(world, obj, cfg, x)
    try:
        step = np.linalg.solve(h, grad)
    except np.linalg.LinAlgError:
        return math.inf, h
    if not np.all(np.isfinite(step)):
        return math.inf, h
    return float(np.linalg.norm(step)), h


def _endpoint(hess, x, x_star, flow):
    """Verdict at a converged point: the goal needs a Morse minimum near x*."""
    kind = classify_hessian(hess)
    at_goal = kind is CriticalKind.MINIMUM and np.linalg.norm(x - x_star) <= flow.goal_tolerance
    return (Verdict.CONVERGED_TO_GOAL if at_goal else Verdict.CONVERGED_TO_CRITICAL), kind


def _run(world, obj, cfg, flow, x0, *, normalized=False, sensing=None) -> Trajectory:
    x = _check_start(world, x0)
    aware = AwarenessSet(sensing) if sensing is not None else None
    view = world
    if aware is not None:
        aware.update(world.factors(x)[0], 0.0)
        view = world.subset(aware.indices())

    rec = _Recorder()
    phi, lphi, g = potential_state(view, obj, cfg, x)
    rec.add(0, x, phi, float(np.linalg.norm(g)), None if aware is None else len(aware))
    length = None
    halved = False
    disp = math.inf
    verdict = Verdict.MAX_ITERS
    kind = None
    x_star = np.asarray(obj.x_star)

    for it in range(flow.max_iters):
        gnorm = float(np.linalg.norm(g))
        converged = gnorm == 0.0 or gnorm < flow.gradient_tolerance
        hess = None
        if not converged and disp < 1e-3 and it % flow.check_every == 0:
            nd, hess = newton_displacement(view, obj, cfg, x, g)
            converged = nd < flow.stationarity_tolerance
        if converged:
            if hess is None:
                hess = hess_phi_k(view, obj, cfg, x)
            verdict, kind = _endpoint(hess, x, x_star, flow)
            break

        unit = g / gnorm
        if flow.schedule is StepSchedule.ADAPTIVE:
            length = flow.step_size(it, length, grow=not halved)
        else:
            length = flow.step_size(it, None) * (1.0 if normalized else gnorm)
        if flow.max_step is not None:
            length = min(length, flow.max_step)
        accepted = False
        for attempt in range(flow.max_halvings + 1):
            cand = x - length * unit
            if np.array_equal(cand, x):
                break
            vals, _ = world.factors(cand)
            if np.all(vals >= 0):
                st = potential_state(view, obj, cfg, cand)
                if not flow.backtracking or st.log_phi <= lphi:
                    accepted = True
                    break
            length *= 0.5
        if not accepted:
            # no representable descent step; accept the point if it is stationary
            nd, hess = newton_displacement(view, obj, cfg, x, g)
            if nd < flow.stationarity_tolerance:
                verdict, kind = _endpoint(hess, x, x_star, flow)
            break
        halved = attempt > 0

        disp = float(np.linalg.norm(cand - x))
        x, (phi, lphi, g) = cand, st
        if aware is not None and aware.update(vals, float(it + 1)):
            view = world.subset(aware.indices())
            phi, lphi, g = potential_state(view, obj, cfg, x)
            disp = math.inf
        rec.add(it + 1, x, phi, float(np.linalg.norm(g)), None if aware is None else len(aware))

    return rec.build(
        verdict, cfg.k,
        discoveries=list(aware.events) if aware is not None else [],
        critical_kind=kind,
    )


def gradient_flow(world: WorldModel, obj, cfg: PotentialConfig, flow: FlowConfig, x0) -> Trajectory:
    """Follow -grad phi_k with full knowledge of the obstacles."""
    return _run(world, obj, cfg, flow, x0)


def switched_flow(world: WorldModel, obj, cfg: PotentialConfig, flow: FlowConfig, c: float, x0) -> Trajectory:
    """Follow the potential built from the workspace and the discovered
    obstacles only; an obstacle joins once a visited state has beta_i <= c."""
    return _run(world, obj, cfg, flow, x0, sensing=c)


def normalized_flow(world: WorldModel, obj, cfg: PotentialConfig, flow: FlowConfig, x0) -> Trajectory:
    """Unit-direction descent -grad phi / |grad phi| with step length eps_t."""
    return _run(world, obj, cfg, flow, x0, normalized=True)


class AdjustVerdict(str, Enum):
    MINIMUM = "minimum"
    K_MAX = "k_max"


@dataclass
class AdjustResult:
    x: np.ndarray
    k: float
    verdict: AdjustVerdict
    segments: list[Trajectory]
    k_history: list[float]

    @property
    def condition_flagged(self) -> bool:
        """True when the order budget ran out before reaching the goal."""
        return self.verdict is AdjustVerdict.K_MAX


def _perturb(world, x, radius, rng, tries=100):
    n = x.shape[0]
    for _ in range(tries):
        u = rng.standard_normal(n)
        u *= radius * rng.uniform() ** (1.0 / n) / np.linalg.norm(u)
        cand = x + u
        # the straight hop must stay in the free space as well
        if all(np.all(world.factors(x + s * u)[0] > 0) for s in np.linspace(0.1, 1.0, 10)):
            return cand
    return x.copy()


def _move_to(world, x, target, step):
    """Normalized motion toward target in steps of length ``step``."""
    path = [x]
    while np.linalg.norm(target - x) > step:
        x = x + step * (target - x) / np.linalg.norm(target - x)
        path.append(x)
    path.append(target.copy())
    return np.array(path)


def adjustable_k(world: WorldModel, obj, k0: float, k_max: float, flow: FlowConfig, x0,
                 cfg: PotentialConfig | None = None) -> AdjustResult:
    """Normalized descent, raising k by one and perturbing the iterate until it
    settles at the goal minimum of phi_k or k reaches ``k_max``.

    "At the minimum" means the endpoint classifies as a Morse minimum lying
    within ``flow.goal_tolerance`` of the objective's minimizer.
    """
    if not 1 <= k0 <= k_max:
        raise InputError(f"need 1 <= k0 <= k_max, got k0={k0}, k_max={k_max}")
    base = cfg or PotentialConfig(k0)
    rng = np.random.default_rng(flow.seed)
    k = k0
    traj = normalized_flow(world, obj, base.with_k(k), flow, x0)
    segments, ks = [traj], [k]
    x = traj.final
    while True:
        if traj.verdict is Verdict.CONVERGED_TO_GOAL:
            return AdjustResult(x, k, AdjustVerdict.MINIMUM, segments, ks)
        if k >= k_max:
            return AdjustResult(x, k, AdjustVerdict.K_MAX, segments, ks)
        k = min(k + 1, k_max)
        x_rand = _perturb(world, x, 5.0 * flow.eps0, rng)
        hop = _move_to(world, x, x_rand, flow.eps0)
        cfg_k = base.with_k(k)
        traj = normalized_flow(world, obj, cfg_k, flow, x_rand)
        # splice the hop in front of the descent so segments stay contiguous
        traj.x = np.vstack([hop[:-1], traj.x])
        pad = hop.shape[0] - 1
        traj.t = np.concatenate([np.arange(-pad, 0, dtype=float), traj.t])
        traj.phi = np.concatenate([np.full(pad, np.nan), traj.phi])
        traj.grad_norm = np.concatenate([np.full(pad, np.nan), traj.grad_norm])
        segments.append(traj)
        ks.append(k)
        x = traj.final
