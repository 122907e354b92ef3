"""Workspace, convex obstacles and the free-space encoding.

The free space is the set where the product of the encoding functions

    beta(x) = beta_0(x) * prod_i beta_i(x)

is nonnegative.  ``beta_0`` is the concave workspace function (positive inside
the spherical shell) and ``beta_i`` are the obstacle functions (negative inside
obstacle ``i``).  Index 0 always refers to the workspace in reports and factor
arrays; obstacles are numbered 1..m in the order they were given.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from krnav.errors import GenerationError, InputError, NumericalError

SYMMETRY_TOL = 1e-12
SEPARATION_MARGIN = 1e-6
VALIDATION_STARTS = 32
REDRAW_BUDGET = 1000


def _as_point(x, dim: int | None = None) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise InputError(f"expected a 1-D point, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise InputError(f"dimension mismatch: expected {dim}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise InputError("point has non-finite components")
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Workspace:
    """Spherical shell ``beta_0(x) = radius**2 - |x - center|**2``."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _frozen(_as_point(self.center)))
        if not self.radius > 0:
            raise InputError(f"workspace radius must be positive, got {self.radius}")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def value(self, x: np.ndarray) -> float:
        d = x - self.center
        return self.radius**2 - float(np.einsum("i,i->", d, d))

    def grad(self, x: np.ndarray) -> np.ndarray:
        return -2.0 * (x - self.center)

    def hess(self, x: np.ndarray) -> np.ndarray:
        return -2.0 * np.eye(self.dim)

    def values(self, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Values and gradients at the rows of ``pts``."""
        d = pts - self.center
        return self.radius**2 - np.einsum("ij,ij->i", d, d), -2.0 * d

    @property
    def value_scale(self) -> float:
        return self.radius**2

    def to_dict(self) -> dict:
        return {"center": self.center.tolist(), "radius": self.radius}


@dataclass(frozen=True, eq=False)
class EllipsoidObstacle:
    """Ellipsoid ``(x - c)^T A (x - c) - mu_min * r**2``.

    ``r`` is the length of the largest semi-axis; ``mu_min``/``mu_max`` are the
    extreme eigenvalues of ``A`` (not of the Hessian ``2A``).
    """

    center: np.ndarray
    matrix: np.ndarray
    r: float
    mu_min: float = field(init=False)
    mu_max: float = field(init=False)

    kind = "ellipsoid"

    def __post_init__(self):
        c = _as_point(self.center)
        a = np.asarray(self.matrix, dtype=float)
        if a.shape != (c.shape[0], c.shape[0]):
            raise InputError(f"shape matrix must be {c.shape[0]}x{c.shape[0]}, got {a.shape}")
        if np.max(np.abs(a - a.T)) > SYMMETRY_TOL * max(1.0, np.max(np.abs(a))):
            raise InputError("shape matrix is not symmetric")
        a = 0.5 * (a + a.T)
        eig = np.linalg.eigvalsh(a)
        if eig[0] <= 0:
            raise InputError(f"shape matrix is not positive definite (eigenvalues {eig})")
        if not self.r > 0:
            raise InputError(f"axis length r must be positive, got {self.r}")
        object.__setattr__(self, "center", _frozen(c))
        object.__setattr__(self, "matrix", _frozen(a))
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "mu_min", float(eig[0]))
        object.__setattr__(self, "mu_max", float(eig[-1]))

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    @property
    def offset(self) -> float:
        return self.mu_min * self.r**2

    @property
    def inner_radius(self) -> float:
        """Smallest semi-axis."""
        return self.r * math.sqrt(self.mu_min / self.mu_max)

    @property
    def outer_radius(self) -> float:
        return self.r

    @property
    def value_scale(self) -> float:
        """Typical magnitude of beta near the obstacle (sets relative margins)."""
        return self.offset

    def value(self, x: np.ndarray) -> float:
        return float(self.values(x[None])[0][0])

    def grad(self, x: np.ndarray) -> np.ndarray:
        return self.values(x[None])[1][0]

    def hess(self, x: np.ndarray) -> np.ndarray:
        return 2.0 * np.array(self.matrix)

    def values(self, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        d = pts - self.center
        ad = np.einsum("kj,ji->ki", d, self.matrix)
        return np.einsum("ij,ij->i", d, ad) - self.offset, 2.0 * ad

    def radial(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Boundary distance along unit rows ``u`` and its gradient w.r.t. ``u``."""
        au = u @ self.matrix
        q = np.einsum("ij,ij->i", u, au)
        rho = np.sqrt(self.offset / q)
        return rho, -(rho / q)[:, None] * au

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "center": self.center.tolist(),
            "matrix": self.matrix.ravel().tolist(),
            "r": self.r,
        }


@dataclass(frozen=True, eq=False)
class EggObstacle:
    """Planar egg ``|x - c|**4 - 2 r (x_a - c_a)**3``.

    ``a`` is the first coordinate for a horizontal egg and the second for a
    vertical one.  The tip sits at distance ``2r`` from the center along the
    positive ``a`` axis; the center itself is the (cusp) bottom of the egg.
    Only the exterior is meaningful: the function is convex outside the egg.
    """

    center: np.ndarray
    r: float
    orientation: str = "horizontal"

    kind = "egg"

    def __post_init__(self):
        c = _as_point(self.center)
        if c.shape[0] != 2:
            raise InputError("egg obstacles are planar")
        if not self.r > 0:
            raise InputError(f"egg size r must be positive, got {self.r}")
        if self.orientation not in ("horizontal", "vertical"):
            raise InputError(f"unknown egg orientation {self.orientation!r}")
        object.__setattr__(self, "center", _frozen(c))
        object.__setattr__(self, "r", float(self.r))

    dim = 2

    @property
    def axis(self) -> int:
        return 0 if self.orientation == "horizontal" else 1

    @property
    def outer_radius(self) -> float:
        return 2.0 * self.r

    @property
    def value_scale(self) -> float:
        return (2.0 * self.r) ** 4

    inner_radius = 0.0

    def value(self, x: np.ndarray) -> float:
        return float(self.values(x[None])[0][0])

    def grad(self, x: np.ndarray) -> np.ndarray:
        return self.values(x[None])[1][0]

    def hess(self, x: np.ndarray) -> np.ndarray:
        d = x - self.center
        h = 4.0 * float(d @ d) * np.eye(2) + 8.0 * np.outer(d, d)
        h[self.axis, self.axis] -= 12.0 * self.r * d[self.axis]
        return h

    def values(self, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        d = pts - self.center
        s = np.einsum("ij,ij->i", d, d)
        da = d[:, self.axis]
        g = 4.0 * s[:, None] * d
        g[:, self.axis] -= 6.0 * self.r * da**2
        return s * s - 2.0 * self.r * da**3, g

    def radial(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        ua = np.maximum(u[:, self.axis], 0.0)
        rho = 2.0 * self.r * ua**3
        drho = np.zeros_like(u)
        drho[:, self.axis] = 6.0 * self.r * ua**2
        return rho, drho

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "center": self.center.tolist(),
            "r": self.r,
            "orientation": self.orientation,
        }


Obstacle = Union[EllipsoidObstacle, EggObstacle]


@dataclass(frozen=True)
class Violation:
    """Failed separation test: ``beta_j`` reaches ``value`` on the boundary of ``i``.

    ``j == 0`` means obstacle ``i`` is not strictly inside the workspace.
    """

    i: int
    j: int
    witness: np.ndarray
    value: float


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


class WorldModel:
    """Workspace plus ordered obstacles; checked against Assumption-style
    non-intersection on construction unless ``validate=False``."""

    def __init__(self, workspace: Workspace, obstacles: Sequence[Obstacle] = (), *, validate: bool = True):
        self.workspace = workspace
        self.obstacles = tuple(obstacles)
        for ob in self.obstacles:
            if ob.dim != workspace.dim:
                raise InputError(f"obstacle dimension {ob.dim} does not match workspace {workspace.dim}")
        self._ell_idx = np.array([i for i, ob in enumerate(self.obstacles, 1) if ob.kind == "ellipsoid"], dtype=int)
        if self._ell_idx.size:
            ells = [self.obstacles[i - 1] for i in self._ell_idx]
            self._ell_c = np.stack([e.center for e in ells])
            self._ell_a = np.stack([e.matrix for e in ells])
            self._ell_s = np.array([e.offset for e in ells])
        self._egg_idx = [i for i, ob in enumerate(self.obstacles, 1) if ob.kind == "egg"]
        if validate:
            report = validate_world(self)
            if not report.ok:
                v = report.violations[0]
                raise InputError(
                    f"invalid world: boundary of {v.i} reaches beta_{v.j} = {v.value:.3g} at {v.witness.tolist()}"
                )

    @property
    def dim(self) -> int:
        return self.workspace.dim

    @property
    def m(self) -> int:
        return len(self.obstacles)

    def __len__(self) -> int:
        return len(self.obstacles)

    def subset(self, indices) -> "WorldModel":
        """World keeping only the listed obstacles (1-based), in that order."""
        return WorldModel(self.workspace, [self.obstacles[i - 1] for i in indices], validate=False)

    def factor(self, i: int):
        return self.workspace if i == 0 else self.obstacles[i - 1]

    def factors(self, x: np.ndarray, order: int = 1):
        """Values, gradients (and Hessians if ``order == 2``) of beta_0..beta_m at x."""
        x = _as_point(x, self.dim)
        n, m = self.dim, self.m
        vals = np.empty(m + 1)
        grads = np.empty((m + 1, n))
        d0 = x - self.workspace.center
        vals[0] = self.workspace.radius**2 - np.einsum("i,i->", d0, d0)
        grads[0] = -2.0 * d0
        if self._ell_idx.size:
            d = x - self._ell_c
            ad = np.einsum("kj,kji->ki", d, self._ell_a)
            vals[self._ell_idx] = np.einsum("ki,ki->k", d, ad) - self._ell_s
            grads[self._ell_idx] = 2.0 * ad
        for i in self._egg_idx:
            ob = self.obstacles[i - 1]
            v, g = ob.values(x[None])
            vals[i], grads[i] = v[0], g[0]
        if order < 2:
            return vals, grads
        hess = np.empty((m + 1, n, n))
        hess[0] = -2.0 * np.eye(n)
        if self._ell_idx.size:
            hess[self._ell_idx] = 2.0 * self._ell_a
        for i in self._egg_idx:
            hess[i] = self.obstacles[i - 1].hess(x)
        return vals, grads, hess

    def contains(self, x, tol: float = 0.0) -> bool:
        """True when every factor is >= -tol at x."""
        vals, _ = self.factors(x)
        return bool(np.all(vals >= -tol))

    def to_dict(self) -> dict:
        return {
            "workspace": self.workspace.to_dict(),
            "obstacles": [ob.to_dict() for ob in self.obstacles],
        }

    @classmethod
    def from_dict(cls, data: dict, *, validate: bool = True) -> "WorldModel":
        try:
            ws = data["workspace"]
            workspace = Workspace(np.asarray(ws["center"], dtype=float), float(ws["radius"]))
            obstacles = [obstacle_from_dict(o, workspace.dim) for o in data.get("obstacles", [])]
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed world description: {exc!r}") from exc
        return cls(workspace, obstacles, validate=validate)


def obstacle_from_dict(data: dict, dim: int) -> Obstacle:
    kind = data.get("kind")
    if kind == "ellipsoid":
        mat = np.asarray(data["matrix"], dtype=float)
        if mat.size != dim * dim:
            raise InputError(f"ellipsoid matrix needs {dim * dim} entries, got {mat.size}")
        return EllipsoidObstacle(np.asarray(data["center"], dtype=float), mat.reshape(dim, dim), float(data["r"]))
    if kind == "egg":
        return EggObstacle(np.asarray(data["center"], dtype=float), float(data["r"]), data.get("orientation", "horizontal"))
    raise InputError(f"unknown obstacle kind {kind!r}")


# -- per-obstacle evaluation -------------------------------------------------


def beta_i(obstacle, x) -> float:
    return obstacle.value(_as_point(x, obstacle.dim))


def grad_beta_i(obstacle, x) -> np.ndarray:
    return obstacle.grad(_as_point(x, obstacle.dim))


def hess_beta_i(obstacle, x) -> np.ndarray:
    return obstacle.hess(_as_point(x, obstacle.dim))


# -- product encoding ----------------------------------------------------------


def _leave_one_out(vals: np.ndarray) -> np.ndarray:
    """prod_{j != i} vals[j] for every i, without division."""
    prefix = np.concatenate(([1.0], np.cumprod(vals[:-1])))
    suffix = np.concatenate((np.cumprod(vals[::-1][:-1])[::-1], [1.0]))
    return prefix * suffix


def product_derivatives(vals: np.ndarray, grads: np.ndarray, hess: np.ndarray | None = None):
    """beta, grad beta (and Hessian) of the product of factors from their parts."""
    loo = _leave_one_out(vals)
    b = float(np.prod(vals))
    g = loo @ grads
    if hess is None:
        return b, g
    h = np.einsum("i,ijk->jk", loo, hess)
    nf = vals.shape[0]
    for i in range(nf):
        for j in range(i + 1, nf):
            mask = np.ones(nf, dtype=bool)
            mask[[i, j]] = False
            c = float(np.prod(vals[mask]))
            outer = np.outer(grads[i], grads[j])
            h += c * (outer + outer.T)
    return b, g, h


def beta(world: WorldModel, x) -> float:
    vals, _ = world.factors(x)
    return float(np.prod(vals))


def grad_beta(world: WorldModel, x) -> np.ndarray:
    vals, grads = world.factors(x)
    return product_derivatives(vals, grads)[1]


def hess_beta(world: WorldModel, x) -> np.ndarray:
    return product_derivatives(*world.factors(x, order=2))[2]


# -- boundary sampling ---------------------------------------------------------


def unit_directions(dim: int, count: int) -> np.ndarray:
    """Deterministic, near-uniform unit vectors (circle or Fibonacci sphere)."""
    if dim == 2:
        t = 2.0 * np.pi * np.arange(count) / count
        return np.column_stack((np.cos(t), np.sin(t)))
    if dim == 3:
        i = np.arange(count) + 0.5
        z = 1.0 - 2.0 * i / count
        rxy = np.sqrt(1.0 - z * z)
        t = np.pi * (1.0 + 5.0**0.5) * i
        return np.column_stack((rxy * np.cos(t), rxy * np.sin(t), z))
    raise InputError(f"only 2-D and 3-D worlds are supported, got {dim}")


def boundary_sample(obstacle, count: int) -> np.ndarray:
    """``count`` points on the boundary of an obstacle or workspace, shape (count, dim).

    Points are rounded onto the closed side (computed beta_i <= 0) so that the
    potential sees them as boundary points rather than as free points a few
    ulps away, where phi_k can be ill-conditioned when x* is close by.
    """
    if count < 4:
        raise InputError("boundary_sample needs at least 4 points")
    if isinstance(obstacle, Workspace):
        u = unit_directions(obstacle.dim, count)
        pts = obstacle.center + obstacle.radius * u
        outer = obstacle.radius
    elif obstacle.kind == "ellipsoid":
        u = unit_directions(obstacle.dim, count)
        w, v = np.linalg.eigh(obstacle.matrix)
        inv_sqrt = (v / np.sqrt(w)) @ v.T
        pts = obstacle.center + obstacle.r * math.sqrt(obstacle.mu_min) * u @ inv_sqrt
        outer = obstacle.outer_radius
    else:
        # closed-form radial root rho = 2 r cos^3(angle) over the open half-plane
        t = -0.5 * np.pi + np.pi * (np.arange(count) + 0.5) / count
        along, across = np.cos(t), np.sin(t)
        u = np.column_stack((along, across)) if obstacle.axis == 0 else np.column_stack((across, along))
        rho, _ = obstacle.radial(u)
        pts = obstacle.center + rho[:, None] * u
        outer = obstacle.outer_radius
    resid = obstacle.values(pts)[0]
    scale = obstacle.value_scale * max(1.0, float(np.max(np.abs(obstacle.center))) / outer)
    bad = np.flatnonzero(np.abs(resid) > 1e-10 * scale)
    if bad.size:
        raise NumericalError(f"boundary sample off the surface along direction {u[bad[0]].tolist()}")
    # obstacles are left by moving toward the center, the workspace by moving away
    sign = 1.0 if isinstance(obstacle, Workspace) else -1.0
    nudge = np.finfo(float).eps
    for _ in range(20):
        out = resid > 0
        if not out.any():
            break
        pts[out] = obstacle.center + (pts[out] - obstacle.center) * (1.0 + sign * nudge)
        resid[out] = obstacle.values(pts[out])[0]
        nudge *= 2.0
    return pts


# -- validation -----------------------------------------------------------------


def _min_over_boundary(ob, target, starts: int = VALIDATION_STARTS, iters: int = 200):
    """Multi-start projected descent of ``target`` over the boundary of ``ob``.

    The boundary is parametrized by unit directions from the center; each start
    takes normalized tangential steps with its own adaptive angular step size.
    """
    c = ob.center
    u = unit_directions(ob.dim, starts)
    if ob.kind == "egg":
        u = u[u[:, ob.axis] > 1e-3]

    def evaluate(u):
        rho, drho = ob.radial(u)
        pts = c + rho[:, None] * u
        vals, grads = target.values(pts)
        # chain rule through p(u) = c + rho(u) u
        gu = rho[:, None] * grads + drho * np.einsum("ij,ij->i", u, grads)[:, None]
        gu -= np.einsum("ij,ij->i", gu, u)[:, None] * u
        return pts, vals, gu

    pts, vals, gu = evaluate(u)
    step = np.full(u.shape[0], 0.2)
    for _ in range(iters):
        gn = np.linalg.norm(gu, axis=1)
        active = (step > 1e-10) & (gn > 0)
        if not active.any():
            break
        cand = u - (step / np.where(gn > 0, gn, 1.0))[:, None] * gu
        cand /= np.linalg.norm(cand, axis=1)[:, None]
        if ob.kind == "egg":
            cand[:, ob.axis] = np.maximum(cand[:, ob.axis], 1e-6)
            cand /= np.linalg.norm(cand, axis=1)[:, None]
        cpts, cvals, cgu = evaluate(cand)
        better = active & (cvals < vals)
        u[better], pts[better], vals[better], gu[better] = cand[better], cpts[better], cvals[better], cgu[better]
        step = np.where(better, step * 1.5, step * 0.5)
    k = int(np.argmin(vals))
    return float(vals[k]), pts[k]


def _pair_status(a, b) -> int:
    """+1 certainly separated, -1 certainly overlapping, 0 undecided (from bounding balls)."""
    dist = float(np.linalg.norm(a.center - b.center))
    if dist > (a.outer_radius + b.outer_radius) * (1.0 + 1e-3):
        return 1
    if a.kind == "ellipsoid" and b.kind == "ellipsoid" and dist < a.inner_radius + b.inner_radius:
        return -1
    return 0


def _workspace_status(ws: Workspace, ob) -> int:
    dist = float(np.linalg.norm(ob.center - ws.center))
    if dist + ob.outer_radius < ws.radius * (1.0 - 1e-3):
        return 1
    if dist + ob.inner_radius > ws.radius:
        return -1
    return 0


def validate_world(world: WorldModel, *, first_only: bool = False) -> ValidationReport:
    """Check that every obstacle lies strictly inside the workspace and that
    no two obstacles intersect (minimum of beta_j over each boundary of i must
    exceed the separation margin, relative to the typical size of beta_j)."""
    violations = []
    ws = world.workspace
    for i, ob in enumerate(world.obstacles, 1):
        if _workspace_status(ws, ob) == 1:
            continue
        val, wit = _min_over_boundary(ob, ws)
        if val <= SEPARATION_MARGIN * ws.value_scale:
            violations.append(Violation(i, 0, wit, val))
            if first_only:
                return ValidationReport(tuple(violations))
    for i, a in enumerate(world.obstacles, 1):
        for j, b in enumerate(world.obstacles, 1):
            if i == j:
                continue
            status = _pair_status(a, b)
            if status == 1:
                continue
            if status == -1 and first_only:
                return ValidationReport((Violation(i, j, a.center.copy(), b.value(a.center)),))
            val, wit = _min_over_boundary(a, b)
            if val <= SEPARATION_MARGIN * b.value_scale:
                violations.append(Violation(i, j, wit, val))
                if first_only:
                    return ValidationReport(tuple(violations))
    return ValidationReport(tuple(violations))


# -- random worlds --------------------------------------------------------------


@dataclass(frozen=True)
class WorldSpec:
    """Parameters of the random-world protocols.

    ``obstacle_kind`` is "ellipsoid" (centers at d(+-1, ..., +-1) plus a uniform
    perturbation in [-delta, delta]^n) or "egg" (centers uniform over
    [-d/2, d/2]^2).
    """

    n: int = 2
    d: float = 10.0
    delta: float = 1.0
    r0: float = 20.0
    seed: int = 0
    obstacle_kind: str = "ellipsoid"
    egg_count: int = 4


def random_rotation(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def _draw_obstacles(spec: WorldSpec, rng: np.random.Generator) -> list:
    n = spec.n
    lo, hi = spec.r0 / 10.0, spec.r0 / 5.0
    if spec.obstacle_kind == "ellipsoid":
        corners = np.array(np.meshgrid(*([[-1.0, 1.0]] * n), indexing="ij")).reshape(n, -1).T
        obstacles = []
        for corner in corners:
            center = spec.d * corner + rng.uniform(-spec.delta, spec.delta, n)
            r = rng.uniform(lo, hi)
            rot = random_rotation(rng, n)
            eig = rng.uniform(1.0, 2.0, n)
            obstacles.append(EllipsoidObstacle(center, (rot * eig) @ rot.T, r))
        return obstacles
    obstacles = []
    for _ in range(spec.egg_count):
        center = rng.uniform(-spec.d / 2.0, spec.d / 2.0, 2)
        r = rng.uniform(lo, hi)
        orientation = "horizontal" if rng.uniform() < 0.5 else "vertical"
        obstacles.append(EggObstacle(center, r, orientation))
    return obstacles


def generate_world(spec: WorldSpec, rng: np.random.Generator | None = None) -> WorldModel:
    """Draw a random valid world, redrawing every parameter on intersection."""
    if spec.n not in (2, 3):
        raise InputError(f"n must be 2 or 3, got {spec.n}")
    if spec.obstacle_kind not in ("ellipsoid", "egg"):
        raise InputError(f"unknown obstacle kind {spec.obstacle_kind!r}")
    if spec.obstacle_kind == "egg" and spec.n != 2:
        raise InputError("egg worlds are planar")
    if not 0 < spec.delta < spec.d:
        raise InputError(f"need 0 < delta < d, got delta={spec.delta}, d={spec.d}")
    if not spec.r0 > 0:
        raise InputError("r0 must be positive")
    rng = np.random.default_rng(spec.seed) if rng is None else rng
    workspace = Workspace(np.zeros(spec.n), spec.r0)
    for _ in range(REDRAW_BUDGET):
        world = WorldModel(workspace, _draw_obstacles(spec, rng), validate=False)
        if validate_world(world, first_only=True).ok:
            return world
    raise GenerationError(f"no valid world after {REDRAW_BUDGET} attempts for {spec}")
