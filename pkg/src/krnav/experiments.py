"""Seeded scenarios and batch runners.

Every trial draws from its own generator seeded by ``(spec.seed, trial)``, so
trials are independent of each other and of execution order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from krnav.conditions import condition_numbers
from krnav.errors import GenerationError, InputError
from krnav.navigate import FlowConfig, Trajectory, Verdict, gradient_flow, switched_flow
from krnav.potential import PotentialConfig, QuadraticObjective
from krnav.world import (
    EllipsoidObstacle,
    Workspace,
    WorldModel,
    WorldSpec,
    generate_world,
    random_rotation,
)

SAMPLE_BUDGET = 1000
COND_EPS = 1e-6


class Scenario(str, Enum):
    ELLIPSE_TABLE = "ellipse_table"
    EGG = "egg"
    VIOLATED = "violated"
    DOUBLE_INTEGRATOR = "double_integrator"
    DIFFDRIVE = "diffdrive"
    COUNTEREXAMPLE = "counterexample"


@dataclass(frozen=True)
class ExperimentSpec:
    """One batch: ``trials`` random worlds, objectives and starts.

    ``c`` switches to the locally aware controller with sensing constant c.
    A trial counts as a success when its final point is within
    ``success_radius`` of x*.  ``min_start_distance`` (off by default)
    rejects starts closer than that to x*.
    """

    scenario: Scenario = Scenario.ELLIPSE_TABLE
    n: int = 2
    d: float = 10.0
    delta: float = 1.0
    r0: float = 20.0
    k: float = 2.0
    trials: int = 100
    seed: int = 0
    c: float | None = None
    egg_count: int = 4
    success_radius: float = 0.1
    min_start_distance: float = 0.0
    flow: FlowConfig = field(default_factory=FlowConfig)

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        if self.trials < 1:
            raise InputError("trials must be >= 1")
        if not self.k >= 1:
            raise InputError("k must be >= 1")
        if self.c is not None and not self.c > 0:
            raise InputError("sensing constant c must be positive")

    def world_spec(self, seed: int) -> WorldSpec:
        kind = "egg" if self.scenario is Scenario.EGG else "ellipsoid"
        return WorldSpec(self.n, self.d, self.delta, self.r0, seed, kind, self.egg_count)


@dataclass
class TrialRecord:
    trial: int
    world: WorldModel
    objective: QuadraticObjective
    trajectory: Trajectory
    x0: np.ndarray
    collided: bool
    initial_dist: float
    final_dist: float
    path_length: float
    success: bool

    @property
    def path_ratio(self) -> float:
        return self.path_length / self.initial_dist

    def row(self) -> dict:
        return {
            "trial": self.trial,
            "verdict": self.trajectory.verdict.value,
            "collided": self.collided,
            "initial_dist": self.initial_dist,
            "final_dist": self.final_dist,
            "path_length": self.path_length,
            "path_ratio": self.path_ratio,
            "success": self.success,
            "steps": self.trajectory.steps,
        }


@dataclass(frozen=True)
class BatchSummary:
    trials: int
    collisions: int
    max_final_dist: float
    min_initial_dist: float
    success_rate: float
    path_ratio_mean: float
    path_ratio_var: float

    @classmethod
    def from_rows(cls, rows: list[dict]) -> "BatchSummary":
        ratios = np.array([r["path_ratio"] for r in rows], dtype=float)
        return cls(
            trials=len(rows),
            collisions=int(sum(bool(r["collided"]) for r in rows)),
            max_final_dist=float(max(r["final_dist"] for r in rows)),
            min_initial_dist=float(min(r["initial_dist"] for r in rows)),
            success_rate=float(np.mean([bool(r["success"]) for r in rows])),
            path_ratio_mean=float(ratios.mean()),
            path_ratio_var=float(ratios.var()),
        )

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class BatchResult:
    spec: ExperimentSpec
    summary: BatchSummary
    records: list[TrialRecord]


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, trial]))


def _sample_free(world: WorldModel, rng, half_width: float, what: str, accept=None) -> np.ndarray:
    for _ in range(SAMPLE_BUDGET):
        x = rng.uniform(-half_width, half_width, world.dim)
        if np.all(world.factors(x)[0] > 0) and (accept is None or accept(x)):
            return x
    raise GenerationError(f"could not place {what} in the free space after {SAMPLE_BUDGET} draws")


def sample_goal(world: WorldModel, rng, r0: float) -> np.ndarray:
    return _sample_free(world, rng, r0 / 2.0, "x*")


def sample_start(world: WorldModel, rng, r0: float, x_star=None, min_distance: float = 0.0) -> np.ndarray:
    accept = None
    if min_distance > 0:
        accept = lambda x: np.linalg.norm(x - x_star) >= min_distance  # noqa: E731
    return _sample_free(world, rng, r0, "the start", accept)


def admissible_objective(world: WorldModel, x_star, rng) -> QuadraticObjective:
    """Q with eigenvalues uniform on [1, N_cond - 1], randomly rotated."""
    n_cond = float(condition_numbers(world, x_star).min())
    hi = max(n_cond - 1.0, 1.0 + COND_EPS)
    eig = rng.uniform(1.0, hi, world.dim)
    rot = random_rotation(rng, world.dim)
    return QuadraticObjective((rot * eig) @ rot.T, x_star)


def violating_objective(world: WorldModel, x_star, rng) -> QuadraticObjective:
    """Unit eigenvalues except the largest, which is max_i N_cond^i + 1."""
    eig = np.ones(world.dim)
    eig[-1] = float(condition_numbers(world, x_star).max()) + 1.0
    rot = random_rotation(rng, world.dim)
    return QuadraticObjective((rot * eig) @ rot.T, x_star)


def egg_objective(world: WorldModel, x_star, rng) -> QuadraticObjective:
    """Spherical objective ``|x - x*|^2`` for egg worlds."""
    return QuadraticObjective(np.eye(world.dim), x_star)


def trial_scene(spec: ExperimentSpec, trial: int, violated: bool):
    rng = trial_rng(spec.seed, trial)
    try:
        world = generate_world(spec.world_spec(spec.seed), rng)
        x_star = sample_goal(world, rng, spec.r0)
        if spec.scenario is Scenario.EGG:
            obj = egg_objective(world, x_star, rng)
        elif violated:
            obj = violating_objective(world, x_star, rng)
        else:
            obj = admissible_objective(world, x_star, rng)
        x0 = sample_start(world, rng, spec.r0, x_star, spec.min_start_distance)
    except GenerationError as exc:
        raise GenerationError(f"trial {trial}: {exc}") from exc
    return world, obj, x0


def collided(world: WorldModel, traj: Trajectory) -> bool:
    """True if any recorded state has some beta_i < 0 in the full world."""
    finite = traj.x[np.all(np.isfinite(traj.x), axis=1)]
    return any(np.any(world.factors(x)[0] < 0) for x in finite) or traj.verdict is Verdict.COLLISION


def run_trial(spec: ExperimentSpec, trial: int, violated: bool = False) -> TrialRecord:
    world, obj, x0 = trial_scene(spec, trial, violated)
    cfg = PotentialConfig(spec.k)
    flow = replace(spec.flow, seed=spec.seed)
    if spec.c is None:
        traj = gradient_flow(world, obj, cfg, flow, x0)
    else:
        traj = switched_flow(world, obj, cfg, flow, spec.c, x0)
    x_star = obj.x_star
    final_dist = float(np.linalg.norm(traj.final - x_star))
    return TrialRecord(
        trial=trial, world=world, objective=obj, trajectory=traj, x0=x0,
        collided=collided(world, traj),
        initial_dist=float(np.linalg.norm(x0 - x_star)),
        final_dist=final_dist,
        path_length=traj.path_length(),
        success=final_dist <= spec.success_radius,
    )


def run_batch(spec: ExperimentSpec, *, violated: bool = False) -> BatchResult:
    """Run ``spec.trials`` independent trials and aggregate the table statistics.

    Path ratio is arc length of the recorded states over the initial distance
    to x*; ``max_final_dist`` is the largest final distance over trials.
    """
    records = [run_trial(spec, t, violated) for t in range(spec.trials)]
    summary = BatchSummary.from_rows([r.row() for r in records])
    return BatchResult(spec, summary, records)


def run_violated_batch(spec: ExperimentSpec) -> BatchResult:
    """As :func:`run_batch` with an objective that violates the ellipsoid
    condition at every obstacle."""
    return run_batch(replace(spec, scenario=Scenario.VIOLATED), violated=True)


# -- fixed worlds ------------------------------------------------------------------


COUNTEREXAMPLE_STARTS = {"aligned": (-9.0, 0.5), "orthogonal": (0.5, -9.0)}


def counterexample_world(which: str, workspace_radius: float = 20.0) -> WorldModel:
    """Single circle of radius 2 at (-4, 0) ("aligned") or (0, -4) ("orthogonal")."""
    centers = {"aligned": (-4.0, 0.0), "orthogonal": (0.0, -4.0)}
    if which not in centers:
        raise InputError(f"unknown counterexample {which!r}; expected one of {sorted(centers)}")
    return WorldModel(
        Workspace(np.zeros(2), workspace_radius),
        [EllipsoidObstacle(np.array(centers[which]), np.eye(2), 2.0)],
    )


def counterexample_objective(lambda_max: float = 3.0) -> QuadraticObjective:
    """f0 = x^T diag(1, lambda_max) x: the slow direction is horizontal."""
    return QuadraticObjective(np.diag([1.0, lambda_max]), np.zeros(2))


def run_counterexample(which: str, k: float, *, lambda_max: float = 3.0,
                       flow: FlowConfig | None = None, x0=None) -> Trajectory:
    world = counterexample_world(which)
    obj = counterexample_objective(lambda_max)
    start = COUNTEREXAMPLE_STARTS[which] if x0 is None else x0
    return gradient_flow(world, obj, PotentialConfig(k), flow or FlowConfig(max_iters=50000), start)


FIVE_DISC_CENTERS = ((-4.0, 2.0), (-2.0, -3.0), (2.0, 3.0), (4.0, -1.0), (0.0, 0.5))


@dataclass(frozen=True)
class FiveDiscScene:
    """Five unit discs in a radius-10 disc, goal at (6, 0), start at (-7, -1),
    objective ``q_gain * |x - x*|^2``, all lengths multiplied by ``scale``.

    With k = 6 = m + 1 both f0**k and beta scale as ``scale**12``, so phi_k is
    the same function in scaled coordinates while its gradient grows as
    ``1 / scale``.  The dynamics experiments use this to pick a length scale
    at which a plant with the prescribed gains crosses the world in a few
    thousand integration steps.
    """

    scale: float = 1.0
    q_gain: float = 0.1
    k: float = 6.0

    def world(self) -> WorldModel:
        s = self.scale
        return WorldModel(
            Workspace(np.zeros(2), 10.0 * s),
            [EllipsoidObstacle(np.array(c) * s, np.eye(2), s) for c in FIVE_DISC_CENTERS],
        )

    def objective(self) -> QuadraticObjective:
        return QuadraticObjective(self.q_gain * np.eye(2), np.array([6.0, 0.0]) * self.scale)

    def start(self) -> np.ndarray:
        return np.array([-7.0, -1.0]) * self.scale

    def potential(self) -> PotentialConfig:
        return PotentialConfig(self.k)


# shipped dynamics scenes: a millimetre-scale scene for the heavily damped
# double integrator and a metre-scale scene for the differential-drive robot
DOUBLE_INTEGRATOR_SCENE = FiveDiscScene(scale=5e-4, q_gain=0.1)
DIFFDRIVE_SCENE = FiveDiscScene(scale=0.3, q_gain=0.2)


def summary_matches(summary: BatchSummary, rows: list[dict]) -> bool:
    again = BatchSummary.from_rows(rows)
    return all(
        (math.isnan(a) and math.isnan(b)) or a == b
        for a, b in zip(again.to_dict().values(), summary.to_dict().values())
    )
