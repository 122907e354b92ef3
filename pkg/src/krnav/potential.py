"""Objective functions and the artificial potential

    phi_k(x) = f0(x) / (f0(x)**k + beta(x))**(1/k)

with analytic gradient and Hessian.  In ``log_domain`` mode every scalar
coefficient is formed from logarithms so that large orders k neither
overflow ``f0**k`` nor underflow the common factor ``(f0**k + beta)**(-1-1/k)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Protocol

import numpy as np

from krnav.errors import ContractError, DomainError, InputError, NumericalError
from krnav.world import WorldModel, _as_point, product_derivatives


class Objective(Protocol):
    """Strongly convex objective with known minimizer and Hessian bounds."""

    x_star: np.ndarray
    lambda_min: float
    lambda_max: float

    def value(self, x: np.ndarray) -> float: ...
    def grad(self, x: np.ndarray) -> np.ndarray: ...
    def hess(self, x: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True, eq=False)
class QuadraticObjective:
    """``f0(x) = (x - x_star)^T Q (x - x_star)``; lambda bounds are those of 2Q."""

    Q: np.ndarray
    x_star: np.ndarray

    def __post_init__(self):
        xs = _as_point(self.x_star)
        q = np.asarray(self.Q, dtype=float)
        if q.shape != (xs.shape[0], xs.shape[0]):
            raise InputError(f"Q must be {xs.shape[0]}x{xs.shape[0]}, got {q.shape}")
        if np.max(np.abs(q - q.T)) > 1e-12 * max(1.0, np.max(np.abs(q))):
            raise InputError("Q is not symmetric")
        q = 0.5 * (q + q.T)
        eig = np.linalg.eigvalsh(q)
        if eig[0] <= 0:
            raise InputError("Q is not positive definite")
        q.setflags(write=False)
        xs = xs.copy()
        xs.setflags(write=False)
        object.__setattr__(self, "Q", q)
        object.__setattr__(self, "x_star", xs)
        object.__setattr__(self, "_eig", eig)

    @property
    def dim(self) -> int:
        return self.x_star.shape[0]

    @property
    def lambda_min(self) -> float:
        return 2.0 * float(self._eig[0])

    @property
    def lambda_max(self) -> float:
        return 2.0 * float(self._eig[-1])

    @property
    def condition_number(self) -> float:
        return float(self._eig[-1] / self._eig[0])

    def value(self, x: np.ndarray) -> float:
        d = x - self.x_star
        return float(d @ self.Q @ d)

    def grad(self, x: np.ndarray) -> np.ndarray:
        return 2.0 * self.Q @ (x - self.x_star)

    def hess(self, x: np.ndarray) -> np.ndarray:
        return 2.0 * np.array(self.Q)

    def to_dict(self) -> dict:
        return {"matrix": self.Q.ravel().tolist(), "x_star": self.x_star.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "QuadraticObjective":
        try:
            xs = np.asarray(data["x_star"], dtype=float)
            q = np.asarray(data["matrix"], dtype=float)
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed objective description: {exc!r}") from exc
        if q.size != xs.size**2:
            raise InputError(f"objective matrix needs {xs.size**2} entries, got {q.size}")
        return cls(q.reshape(xs.size, xs.size), xs)


def f0(obj, x) -> float:
    return obj.value(_as_point(x, obj.x_star.shape[0]))


def grad_f0(obj, x) -> np.ndarray:
    return obj.grad(_as_point(x, obj.x_star.shape[0]))


def hess_f0(obj, x) -> np.ndarray:
    return obj.hess(_as_point(x, obj.x_star.shape[0]))


class EvalMode(str, Enum):
    LOG_DOMAIN = "log_domain"
    DIRECT = "direct"


@dataclass(frozen=True)
class PotentialConfig:
    k: float = 2.0
    eval_mode: EvalMode = EvalMode.LOG_DOMAIN
    boundary_tolerance: float = 1e-9

    def __post_init__(self):
        if not self.k >= 1:
            raise InputError(f"order k must be >= 1, got {self.k}")
        object.__setattr__(self, "eval_mode", EvalMode(self.eval_mode))
        if not self.boundary_tolerance >= 0:
            raise InputError("boundary_tolerance must be nonnegative")

    def with_k(self, k: float) -> "PotentialConfig":
        return PotentialConfig(k, self.eval_mode, self.boundary_tolerance)


def _parts(world: WorldModel, obj, cfg: PotentialConfig, x, order: int):
    x = _as_point(x, world.dim)
    if order == 2:
        vals, grads, hessians = world.factors(x, order=2)
    else:
        vals, grads = world.factors(x)
    worst = int(np.argmin(vals))
    if vals[worst] < -cfg.boundary_tolerance:
        raise DomainError(f"point {x.tolist()} is outside the free space (beta_{worst} = {vals[worst]:.3g})")
    if order == 2:
        b, gb, hb = product_derivatives(vals, grads, hessians)
    else:
        b, gb = product_derivatives(vals, grads)
        hb = None
    # inside the tolerance band the point is treated as lying on the boundary
    if np.any(vals <= 0.0):
        b = 0.0
    f = obj.value(x)
    if f < 0:
        raise NumericalError(f"objective is negative ({f}) at {x.tolist()}")
    return x, f, b, gb, hb


class _Coefficients:
    """Scalar factors of phi and its derivatives for given f0, beta, k."""

    __slots__ = ("phi", "log_phi", "cb", "cf", "c", "dlog_f", "dlog_b")

    def __init__(self, f: float, b: float, k: float, mode: EvalMode):
        if mode is EvalMode.DIRECT:
            self._direct(f, b, k)
        else:
            self._log(f, b, k)

    def _direct(self, f, b, k):
        with np.errstate(over="raise", invalid="raise", divide="raise", under="ignore"):
            try:
                fk = np.float64(f) ** k
                d = fk + b
                if not d > 0:
                    raise NumericalError(f"f0**k + beta = {d} is not positive")
                c = d ** (-1.0 - 1.0 / k)
                self.phi = 0.0 if f == 0 else float(f / d ** (1.0 / k))
                self.c = float(c)
                self.cb = float(b * c)
                self.cf = float(f * c / k)
                self.dlog_f = float(k * np.float64(f) ** (k - 1.0) / d) if f > 0 else 0.0
                self.dlog_b = float(1.0 / d)
                self.log_phi = math.log(self.phi) if self.phi > 0 else -math.inf
            except FloatingPointError as exc:
                raise NumericalError(f"direct evaluation overflowed at k={k}: {exc}") from exc
        if not math.isfinite(self.phi):
            raise NumericalError(f"direct evaluation overflowed at k={k}")

    def _log(self, f, b, k):
        if f == 0.0 and b <= 0.0:
            raise NumericalError("f0**k + beta = 0: the goal lies on the free-space boundary")
        lf = math.log(f) if f > 0 else -math.inf
        lb = math.log(b) if b > 0 else -math.inf
        ld = np.logaddexp(k * lf, lb)
        lc = -(1.0 + 1.0 / k) * ld
        # log phi = -softplus(log beta - k log f) / k keeps full precision when phi ~ 1
        self.log_phi = -math.inf if f == 0 else -float(np.logaddexp(0.0, lb - k * lf)) / k
        self.phi = 0.0 if f == 0 else (1.0 if b == 0 else math.exp(self.log_phi))
        self.c = math.exp(lc)
        self.cb = math.exp(lb + lc) if b > 0 else 0.0
        self.cf = math.exp(lf + lc) / k if f > 0 else 0.0
        self.dlog_f = k * math.exp((k - 1.0) * lf - ld) if f > 0 else 0.0
        self.dlog_b = math.exp(-ld)


def phi_k(world: WorldModel, obj, cfg: PotentialConfig, x) -> float:
    """Artificial potential value in [0, 1]; exactly 1 on the free-space boundary."""
    x, f, b, _, _ = _parts(world, obj, cfg, x, order=1)
    return _Coefficients(f, b, cfg.k, cfg.eval_mode).phi


class PotentialState(NamedTuple):
    phi: float
    log_phi: float
    grad: np.ndarray


def potential_state(world: WorldModel, obj, cfg: PotentialConfig, x) -> PotentialState:
    """phi_k, log phi_k (precise near 1, used for descent tests) and the gradient."""
    x, f, b, gb, _ = _parts(world, obj, cfg, x, order=1)
    co = _Coefficients(f, b, cfg.k, cfg.eval_mode)
    return PotentialState(co.phi, co.log_phi, co.cb * obj.grad(x) - co.cf * gb)


def phi_and_grad(world: WorldModel, obj, cfg: PotentialConfig, x) -> tuple[float, np.ndarray]:
    st = potential_state(world, obj, cfg, x)
    return st.phi, st.grad


def grad_phi_k(world: WorldModel, obj, cfg: PotentialConfig, x) -> np.ndarray:
    """(f0^k + beta)^(-1-1/k) * (beta grad f0 - f0 grad beta / k)."""
    return phi_and_grad(world, obj, cfg, x)[1]


def hess_phi_k(world: WorldModel, obj, cfg: PotentialConfig, x) -> np.ndarray:
    """Full Hessian of phi_k.

    With g = beta grad f0 - (f0/k) grad beta and D = f0^k + beta,
    H = D^(-1-1/k) Dg - (1 + 1/k) grad phi (grad D / D)^T.
    """
    x, f, b, gb, hb = _parts(world, obj, cfg, x, order=2)
    k = cfg.k
    co = _Coefficients(f, b, k, cfg.eval_mode)
    gf = obj.grad(x)
    grad = co.cb * gf - co.cf * gb
    jac_g = (
        co.cb * obj.hess(x)
        + co.c * (np.outer(gf, gb) - np.outer(gb, gf) / k)
        - co.cf * hb
    )
    dlog_d = co.dlog_f * gf + co.dlog_b * gb
    h = jac_g - (1.0 + 1.0 / k) * np.outer(grad, dlog_d)
    return 0.5 * (h + h.T)


def critical_point_hessian(world: WorldModel, obj, cfg: PotentialConfig, x) -> np.ndarray:
    """Reduced Hessian valid only where grad phi_k vanishes:
    D^(-1-1/k) [beta H_f + (1 - 1/k) grad f grad beta^T - (f0/k) H_beta]."""
    x, f, b, gb, hb = _parts(world, obj, cfg, x, order=2)
    k = cfg.k
    co = _Coefficients(f, b, k, cfg.eval_mode)
    return co.cb * obj.hess(x) + co.c * (1.0 - 1.0 / k) * np.outer(obj.grad(x), gb) - co.cf * hb


class CriticalKind(str, Enum):
    MINIMUM = "minimum"
    SADDLE = "saddle"
    MAXIMUM = "maximum"
    DEGENERATE = "degenerate"


def classify_hessian(h: np.ndarray, rel_cutoff: float = 1e-8) -> CriticalKind:
    eig = np.linalg.eigvalsh(0.5 * (h + h.T))
    scale = float(np.max(np.abs(eig)))
    if scale == 0.0 or np.any(np.abs(eig) < rel_cutoff * scale):
        return CriticalKind.DEGENERATE
    if np.all(eig > 0):
        return CriticalKind.MINIMUM
    if np.all(eig < 0):
        return CriticalKind.MAXIMUM
    return CriticalKind.SADDLE


def classify_critical_point(world: WorldModel, obj, cfg: PotentialConfig, x,
                            gradient_tolerance: float = 1e-6) -> CriticalKind:
    """Morse classification from the eigenvalue signs of the Hessian of phi_k."""
    g = grad_phi_k(world, obj, cfg, x)
    if not np.linalg.norm(g) < gradient_tolerance:
        raise ContractError(f"not a critical point: |grad phi| = {np.linalg.norm(g):.3g}")
    return classify_hessian(hess_phi_k(world, obj, cfg, x))
