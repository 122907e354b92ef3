"""Sufficient conditions for phi_k to be a navigation function.

Two certificates are offered:

* :func:`check_general` samples each obstacle boundary and tests

      (lambda_max / lambda_min) * grad beta_i(x)^T (x - x*) / |x - x*|^2 < mu_min^i

* :func:`check_ellipsoid` evaluates the closed form for ellipsoids

      (lambda_max / lambda_min) * (mu_max^i / mu_min^i) < 1 + d_i / r_i,

  with d_i the distance from the obstacle center to x*.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from krnav.errors import InputError
from krnav.world import WorldModel, boundary_sample


@dataclass(frozen=True)
class ObstacleMargin:
    index: int
    margin: float
    witness: np.ndarray | None
    samples_used: int

    @property
    def satisfied(self) -> bool:
        return self.margin > 0


@dataclass(frozen=True)
class ConditionReport:
    """Per-obstacle margins (RHS - LHS, minimized over tested points)."""

    obstacles: tuple[ObstacleMargin, ...]
    method: str

    @property
    def margin(self) -> float:
        return min((o.margin for o in self.obstacles), default=np.inf)

    @property
    def satisfied(self) -> bool:
        return self.margin > 0

    @property
    def samples_used(self) -> int:
        return sum(o.samples_used for o in self.obstacles)

    @property
    def witness(self) -> np.ndarray | None:
        if not self.obstacles:
            return None
        return min(self.obstacles, key=lambda o: o.margin).witness

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "satisfied": self.satisfied,
            "margin": self.margin,
            "obstacles": [
                {
                    "index": o.index,
                    "margin": o.margin,
                    "satisfied": o.satisfied,
                    "witness": None if o.witness is None else o.witness.tolist(),
                    "samples_used": o.samples_used,
                }
                for o in self.obstacles
            ],
        }


def default_samples(dim: int) -> int:
    return 512 if dim == 2 else 4096


def check_general(world: WorldModel, obj, samples_per_obstacle: int | None = None) -> ConditionReport:
    """Sampled certification of the boundary condition for arbitrary convex obstacles.

    ``mu_min^i`` bounds the Hessian of beta_i from below: ``2 * mu_min(A)`` for
    an ellipsoid, the smallest Hessian eigenvalue over the samples otherwise.
    """
    n_samples = samples_per_obstacle or default_samples(world.dim)
    if n_samples < 64:
        raise InputError("check_general needs at least 64 samples per obstacle")
    x_star = np.asarray(obj.x_star)
    ratio = obj.lambda_max / obj.lambda_min
    vals, _ = world.factors(x_star)
    if np.any(np.abs(vals[1:]) <= 1e-12):
        raise InputError("x* lies on an obstacle boundary")
    out = []
    for i, ob in enumerate(world.obstacles, 1):
        pts = boundary_sample(ob, n_samples)
        grads = np.stack([ob.grad(p) for p in pts])
        diff = pts - x_star
        lhs = ratio * np.einsum("ij,ij->i", grads, diff) / np.einsum("ij,ij->i", diff, diff)
        if ob.kind == "ellipsoid":
            mu_min = 2.0 * ob.mu_min
        else:
            mu_min = min(float(np.linalg.eigvalsh(ob.hess(p))[0]) for p in pts)
        slack = mu_min - lhs
        j = int(np.argmin(slack))
        out.append(ObstacleMargin(i, float(slack[j]), pts[j], n_samples))
    return ConditionReport(tuple(out), "general")


def _ellipsoid_terms(world: WorldModel, obj):
    x_star = np.asarray(obj.x_star)
    for i, ob in enumerate(world.obstacles, 1):
        if ob.kind != "ellipsoid":
            raise InputError(f"obstacle {i} is not an ellipsoid")
        d = float(np.linalg.norm(ob.center - x_star))
        yield i, ob, d


def check_ellipsoid(world: WorldModel, obj) -> ConditionReport:
    """Closed-form verdict per ellipsoid; margin = 1 + d_i/r_i - LHS."""
    ratio = obj.lambda_max / obj.lambda_min
    out = []
    for i, ob, d in _ellipsoid_terms(world, obj):
        margin = 1.0 + d / ob.r - ratio * ob.mu_max / ob.mu_min
        out.append(ObstacleMargin(i, margin, None, 0))
    return ConditionReport(tuple(out), "ellipsoid")


def condition_numbers(world: WorldModel, x_star) -> np.ndarray:
    """Per-obstacle largest admissible objective condition number."""
    x_star = np.asarray(x_star, dtype=float)
    out = []
    for i, ob in enumerate(world.obstacles, 1):
        if ob.kind != "ellipsoid":
            raise InputError(f"obstacle {i} is not an ellipsoid")
        d = float(np.linalg.norm(ob.center - x_star))
        out.append((1.0 + d / ob.r) * ob.mu_min / ob.mu_max)
    return np.array(out)


def max_condition_number(world: WorldModel, x_star) -> float:
    """N_cond = min_i (1 + d_i/r_i) mu_min^i / mu_max^i; any objective with a
    smaller eigenvalue ratio passes :func:`check_ellipsoid`."""
    nc = condition_numbers(world, x_star)
    return float(nc.min()) if nc.size else np.inf
