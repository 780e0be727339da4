"""Finite-difference solver for the Poisson equation of a fixed policy.

At every interior node the discrete equation

    1/2 sigma_pi^2 D2 v + mu_pi D v - alpha_pi v + f_pi = 0

is imposed with central stencils, and v(a) = g_lo, v(b) = g_hi.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .choices import Interpolation
from .exceptions import ArgumentError
from .problems import ActionSet, ControlProblem
from .tridiag import check_diagonal_dominance, solve_tridiag

logger = logging.getLogger(__name__)

PECLET_LIMIT = 2.0
BOUND_TOLERANCE = 1e-6


def _frozen(values) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Grid:
    a: float
    b: float
    n: int
    nodes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        a = float(self.a)
        b = float(self.b)
        if not (math.isfinite(a) and math.isfinite(b)) or not a < b:
            raise ArgumentError("Grade exige a < b finitos.")
        if int(self.n) != self.n or self.n < 3:
            raise ArgumentError("Grade exige pelo menos 3 nos.")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "nodes", _frozen(np.linspace(a, b, int(self.n))))

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.n - 1)

    @classmethod
    def for_problem(cls, problem: ControlProblem, n: int) -> Grid:
        return cls(problem.domain_lo, problem.domain_hi, n)


@dataclass(frozen=True)
class Policy:
    """Nodal actions, evaluated by clamped piecewise-linear interpolation."""

    grid: Grid
    p: np.ndarray
    actions: ActionSet
    interpolation: str = Interpolation.PIECEWISE_LINEAR

    def __post_init__(self):
        p = _frozen(self.p)
        if p.shape != (self.grid.n,):
            raise ArgumentError(
                f"Politica com {p.size} valores para uma grade de {self.grid.n} nos."
            )
        if not self.actions.contains(p):
            raise ArgumentError(
                f"Politica fora de A=[{self.actions.lo}, {self.actions.hi}]."
            )
        if self.interpolation != Interpolation.PIECEWISE_LINEAR:
            raise ArgumentError(f"Interpolacao nao suportada: {self.interpolation}.")
        object.__setattr__(self, "p", p)

    def __call__(self, x) -> np.ndarray:
        values = np.interp(x, self.grid.nodes, self.p)
        return self.actions.clamp(values)

    @classmethod
    def constant(cls, grid: Grid, actions: ActionSet, value: float) -> Policy:
        return cls(grid, np.full(grid.n, float(value)), actions)


def nodal_derivatives(v: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Central first and second differences, second-order one-sided at the ends."""
    v = np.asarray(v, dtype=float)
    n = v.size
    if n < 3:
        raise ArgumentError("Derivadas nodais exigem pelo menos 3 nos.")
    dv = np.empty(n)
    d2v = np.empty(n)
    dv[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    dv[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
    dv[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    d2v[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / h**2
    if n >= 4:
        d2v[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h**2
        d2v[-1] = (2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]) / h**2
    else:
        # three nodes carry only one second difference
        d2v[0] = d2v[-1] = d2v[1]
    return dv, d2v


@dataclass(frozen=True)
class ValueFunction:
    grid: Grid
    v: np.ndarray
    dv: np.ndarray
    d2v: np.ndarray

    def __post_init__(self):
        for label in ("v", "dv", "d2v"):
            values = _frozen(getattr(self, label))
            if values.shape != (self.grid.n,):
                raise ArgumentError(f"{label} deve ter {self.grid.n} valores.")
            object.__setattr__(self, label, values)

    @classmethod
    def from_values(cls, grid: Grid, v) -> ValueFunction:
        dv, d2v = nodal_derivatives(v, grid.h)
        return cls(grid, v, dv, d2v)

    def at(self, x) -> np.ndarray:
        return np.interp(x, self.grid.nodes, self.v)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.v)))


@dataclass(frozen=True)
class PolicyCoefficients:
    sigma_sq: np.ndarray
    mu: np.ndarray
    alpha: np.ndarray
    f: np.ndarray


def policy_coefficients(problem: ControlProblem, policy: Policy) -> PolicyCoefficients:
    x = policy.grid.nodes
    p = policy.p
    return PolicyCoefficients(
        sigma_sq=problem.sigma_at(x, p) ** 2,
        mu=problem.mu_at(x, p),
        alpha=problem.alpha_at(x, p),
        f=problem.f_at(x, p),
    )


def value_bound(problem: ControlProblem, policy: Policy) -> float:
    """Maximum-principle bound sup|f_pi|/epsilon0 + max(|g_lo|, |g_hi|)."""
    f = problem.f_at(policy.grid.nodes, policy.p)
    return float(np.max(np.abs(f))) / problem.epsilon0 + max(abs(problem.g_lo), abs(problem.g_hi))


def _check_compatible(problem: ControlProblem, policy: Policy, grid: Grid) -> None:
    if policy.grid != grid:
        raise ArgumentError("Politica definida em outra grade.")
    if not (
        math.isclose(problem.domain_lo, grid.a, abs_tol=1e-12)
        and math.isclose(problem.domain_hi, grid.b, abs_tol=1e-12)
    ):
        raise ArgumentError(
            f"Grade [{grid.a}, {grid.b}] difere do dominio "
            f"[{problem.domain_lo}, {problem.domain_hi}]."
        )


def solve_poisson(problem: ControlProblem, policy: Policy, grid: Grid) -> ValueFunction:
    _check_compatible(problem, policy, grid)
    h = grid.h
    coeffs = policy_coefficients(problem, policy)

    mu_max = float(np.max(np.abs(coeffs.mu)))
    peclet = h * mu_max / problem.lambda_
    if not peclet < PECLET_LIMIT:
        needed = int(math.floor((grid.b - grid.a) * mu_max / (PECLET_LIMIT * problem.lambda_))) + 2
        raise ArgumentError(
            f"Numero de Peclet da malha {peclet} >= {PECLET_LIMIT}: refine a grade "
            f"para pelo menos {needed} nos."
        )

    inner = slice(1, -1)
    diffusion = 0.5 * coeffs.sigma_sq[inner] / h**2
    advection = coeffs.mu[inner] / (2.0 * h)
    lower = diffusion - advection
    diag = -2.0 * diffusion - coeffs.alpha[inner]
    upper = diffusion + advection
    rhs = -coeffs.f[inner]

    check_diagonal_dominance(lower, diag, upper, nodes=grid.nodes, offset=1)

    rhs[0] -= lower[0] * problem.g_lo
    rhs[-1] -= upper[-1] * problem.g_hi
    interior = solve_tridiag(
        np.concatenate(([0.0], lower[1:])),
        diag,
        np.concatenate((upper[:-1], [0.0])),
        rhs,
    )

    v = np.empty(grid.n)
    v[0] = problem.g_lo
    v[-1] = problem.g_hi
    v[1:-1] = interior
    vf = ValueFunction.from_values(grid, v)

    bound = value_bound(problem, policy)
    if vf.sup_norm() > bound + BOUND_TOLERANCE:
        logger.warning(
            "sup|v|=%s excede a cota do principio do maximo %s.", vf.sup_norm(), bound
        )
    logger.debug("Poisson resolvido em %s nos (Peclet=%s).", grid.n, peclet)
    return vf


def residual(problem: ControlProblem, policy: Policy, vf: ValueFunction) -> np.ndarray:
    """Discrete residual 1/2 sigma^2 d2v + mu dv - alpha v + f at the interior nodes."""
    if policy.grid != vf.grid:
        raise ArgumentError("Politica e funcao valor em grades diferentes.")
    coeffs = policy_coefficients(problem, policy)
    inner = slice(1, -1)
    return (
        0.5 * coeffs.sigma_sq[inner] * vf.d2v[inner]
        + coeffs.mu[inner] * vf.dv[inner]
        - coeffs.alpha[inner] * vf.v[inner]
        + coeffs.f[inner]
    )


def observed_order(error_coarse: float, error_fine: float, h_coarse: float, h_fine: float) -> float:
    return math.log(error_coarse / error_fine) / math.log(h_coarse / h_fine)
