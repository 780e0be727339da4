"""Policy improvement and the generalized policy iteration loop."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .assumptions import estimate_policy_lipschitz
from .choices import ArgminVariant, ScalingChoice
from .exceptions import ArgumentError, GpiaError, RuleMismatchError, ScalingBoundError
from .poisson import Policy, ValueFunction, residual, solve_poisson
from .problems import ControlProblem, ExampleClassSpec, evaluate

logger = logging.getLogger(__name__)

MONOTONICITY_FACTOR = 10.0
_SEARCH_BLOCK = 128


@dataclass(frozen=True)
class ScalingFunction:
    """Strictly positive weight S(x, p) with claimed bounds eps_s < S < m_s."""

    s: Callable[[np.ndarray, np.ndarray], np.ndarray]
    eps_s: float
    m_s: float
    kind: str = ScalingChoice.CUSTOM

    def __post_init__(self):
        if not 0 < self.eps_s < self.m_s:
            raise ArgumentError("Escala exige 0 < eps_s < m_s.")

    def values(self, x, p) -> np.ndarray:
        values = evaluate(self.s, x, p)
        outside = ~((values > self.eps_s) & (values < self.m_s))
        if np.any(outside):
            index = np.unravel_index(int(np.argmax(outside)), values.shape)
            raise ScalingBoundError(
                f"S={values[index]} fora de ({self.eps_s}, {self.m_s}) em "
                f"x={np.broadcast_to(x, values.shape)[index]}, "
                f"p={np.broadcast_to(p, values.shape)[index]}."
            )
        return values

    @classmethod
    def unit(cls) -> ScalingFunction:
        return cls(lambda x, p: 1.0, eps_s=0.5, m_s=2.0, kind=ScalingChoice.UNIT)

    @classmethod
    def inverse_sigma_squared(
        cls, problem: ControlProblem, eps_s: float = 1e-9, m_s: float | None = None
    ) -> ScalingFunction:
        # sigma^2 >= lambda gives S <= 1/lambda; the claimed bound keeps a margin
        upper = 2.0 / problem.lambda_ if m_s is None else m_s
        return cls(
            lambda x, p: 1.0 / problem.sigma_at(x, p) ** 2,
            eps_s=eps_s,
            m_s=upper,
            kind=ScalingChoice.INVERSE_SIGMA_SQUARED,
        )

    @property
    def drops_second_order(self) -> bool:
        return self.kind == ScalingChoice.INVERSE_SIGMA_SQUARED


@dataclass(frozen=True)
class ArgminRule:
    variant: str
    n_actions: int = 2001
    tolerance: float = 1e-10
    spec: ExampleClassSpec | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.variant not in ArgminVariant.values:
            raise ArgumentError(f"Regra de argmin desconhecida: {self.variant}.")
        if self.variant == ArgminVariant.GRID_SEARCH and (
            int(self.n_actions) != self.n_actions or self.n_actions < 2
        ):
            raise ArgumentError("Busca em grade exige n_actions >= 2.")
        if self.variant == ArgminVariant.GOLDEN_SECTION and not self.tolerance > 0:
            raise ArgumentError("Secao aurea exige tolerancia positiva.")

    @classmethod
    def closed_form(cls, spec: ExampleClassSpec | None = None) -> ArgminRule:
        return cls(ArgminVariant.CLOSED_FORM, spec=spec)

    @classmethod
    def grid_search(cls, n_actions: int = 2001) -> ArgminRule:
        return cls(ArgminVariant.GRID_SEARCH, n_actions=n_actions)

    @classmethod
    def golden_section(cls, tolerance: float = 1e-10) -> ArgminRule:
        return cls(ArgminVariant.GOLDEN_SECTION, tolerance=tolerance)


def _operand(
    problem: ControlProblem,
    scaling: ScalingFunction,
    x: np.ndarray,
    v: np.ndarray,
    dv: np.ndarray,
    d2v: np.ndarray,
    p: np.ndarray,
    drop_second_order: bool,
) -> np.ndarray:
    sigma_sq = problem.sigma_at(x, p) ** 2
    first_order = problem.mu_at(x, p) * dv - problem.alpha_at(x, p) * v + problem.f_at(x, p)
    s = scaling.values(x, p)
    if drop_second_order:
        # valid when S sigma^2 does not depend on p, e.g. S = 1/sigma^2
        return s * first_order
    return s * (0.5 * sigma_sq * d2v + first_order)


def scaled_bellman_operand(
    problem: ControlProblem,
    scaling: ScalingFunction,
    vf: ValueFunction,
    node_index: int,
    p: float,
    drop_second_order: bool = False,
) -> float:
    if not 0 <= node_index < vf.grid.n:
        raise ArgumentError(f"No {node_index} fora da grade de {vf.grid.n} nos.")
    if not problem.actions.contains(p):
        raise ArgumentError(f"Acao {p} fora de A.")
    i = node_index
    value = _operand(
        problem,
        scaling,
        np.asarray(vf.grid.nodes[i]),
        vf.v[i],
        vf.dv[i],
        vf.d2v[i],
        np.asarray(float(p)),
        drop_second_order,
    )
    return float(value)


def _closed_form(problem: ControlProblem, vf: ValueFunction, rule: ArgminRule) -> np.ndarray:
    spec = rule.spec if rule.spec is not None else problem.structure
    if problem.structure is None or spec is None:
        raise RuleMismatchError(
            f"Forma fechada exige problema da classe exemplo; {problem.name} nao e."
        )
    target = -spec.mu2 * np.asarray(vf.dv)
    return problem.actions.clamp(spec.inverse_slope(target))


def _grid_search(
    problem: ControlProblem, scaling: ScalingFunction, vf: ValueFunction, rule: ArgminRule
) -> np.ndarray:
    actions = np.linspace(problem.actions.lo, problem.actions.hi, int(rule.n_actions))
    nodes = vf.grid.nodes
    best = np.empty(vf.grid.n)
    drop = scaling.drops_second_order
    for start in range(0, vf.grid.n, _SEARCH_BLOCK):
        block = slice(start, min(start + _SEARCH_BLOCK, vf.grid.n))
        values = _operand(
            problem,
            scaling,
            nodes[block, None],
            vf.v[block, None],
            vf.dv[block, None],
            vf.d2v[block, None],
            actions[None, :],
            drop,
        )
        # argmin returns the first minimiser, i.e. the smallest action
        best[block] = actions[np.argmin(values, axis=1)]
    return best


def _golden_section(
    problem: ControlProblem, scaling: ScalingFunction, vf: ValueFunction, rule: ArgminRule
) -> np.ndarray:
    lo, hi = problem.actions.lo, problem.actions.hi
    drop = scaling.drops_second_order
    best = np.empty(vf.grid.n)
    for i in range(vf.grid.n):
        def objective(q, i=i):
            return scaled_bellman_operand(problem, scaling, vf, i, q, drop)

        result = minimize_scalar(
            objective, bounds=(lo, hi), method="bounded", options={"xatol": rule.tolerance}
        )
        candidates = sorted({lo, float(np.clip(result.x, lo, hi)), hi})
        scores = [objective(q) for q in candidates]
        best[i] = candidates[int(np.argmin(scores))]
    return best


def improve_policy(
    problem: ControlProblem,
    scaling: ScalingFunction,
    vf: ValueFunction,
    rule: ArgminRule,
) -> Policy:
    if rule.variant == ArgminVariant.CLOSED_FORM:
        p = _closed_form(problem, vf, rule)
        # closed form ignores S, the claimed bounds are still enforced
        scaling.values(vf.grid.nodes, p)
    elif rule.variant == ArgminVariant.GRID_SEARCH:
        p = _grid_search(problem, scaling, vf, rule)
    else:
        p = _golden_section(problem, scaling, vf, rule)
    return Policy(vf.grid, problem.actions.clamp(p), problem.actions)


@dataclass(frozen=True)
class GpiaConfig:
    max_iters: int = 50
    tol_v: float = 1e-8
    tol_pi: float = 1e-6

    def __post_init__(self):
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ArgumentError("max_iters deve ser >= 1.")
        if not (self.tol_v > 0 and self.tol_pi > 0):
            raise ArgumentError("Tolerancias devem ser positivas.")


@dataclass(frozen=True)
class IterationRecord:
    n: int
    sup_dV: float
    sup_dPi: float
    max_monotonicity_violation: float
    interior_residual_norm: float
    policy_lipschitz: float
    monotone: bool


@dataclass
class IterationReport:
    iterations: list[IterationRecord]
    converged: bool
    final_policy: Policy
    final_value: ValueFunction
    values: list[ValueFunction] = field(default_factory=list)
    policies: list[Policy] = field(default_factory=list)

    @property
    def monotone(self) -> bool:
        return all(record.monotone for record in self.iterations)

    @property
    def max_monotonicity_violation(self) -> float:
        return max((r.max_monotonicity_violation for r in self.iterations), default=0.0)


def run_gpia(
    problem: ControlProblem,
    scaling: ScalingFunction,
    initial_policy: Policy,
    rule: ArgminRule,
    config: GpiaConfig | None = None,
) -> IterationReport:
    """Alternate Poisson solves and policy improvements.

    Iteration n solves V_n for pi_n and computes pi_{n+1}. The run stops once
    sup|V_n - V_{n-1}| < tol_v and sup|pi_{n+1} - pi_n| < tol_pi.
    """
    config = config or GpiaConfig()
    grid = initial_policy.grid
    policy = initial_policy
    previous: ValueFunction | None = None
    records: list[IterationRecord] = []
    values: list[ValueFunction] = []
    policies: list[Policy] = [initial_policy]
    converged = False
    vf: ValueFunction | None = None
    solved_policy = initial_policy

    for n in range(int(config.max_iters)):
        try:
            vf = solve_poisson(problem, policy, grid)
            improved = improve_policy(problem, scaling, vf, rule)
        except GpiaError as exc:
            exc.iteration = n
            raise
        solved_policy = policy
        values.append(vf)
        policies.append(improved)

        if previous is None:
            sup_dv = math.inf
            violation = 0.0
        else:
            delta = vf.v - previous.v
            sup_dv = float(np.max(np.abs(delta)))
            violation = float(np.max(delta))
        sup_dpi = float(np.max(np.abs(improved.p - policy.p)))
        residual_norm = float(np.max(np.abs(residual(problem, policy, vf))))
        lipschitz = estimate_policy_lipschitz(grid.nodes, improved.p)
        monotone = violation <= MONOTONICITY_FACTOR * config.tol_v
        if not monotone:
            logger.warning(
                "Iteracao %s: V_n excede V_{n-1} em %s (> %s x tol_v).",
                n,
                violation,
                MONOTONICITY_FACTOR,
            )
        records.append(
            IterationRecord(
                n=n,
                sup_dV=sup_dv,
                sup_dPi=sup_dpi,
                max_monotonicity_violation=violation,
                interior_residual_norm=residual_norm,
                policy_lipschitz=lipschitz,
                monotone=monotone,
            )
        )
        logger.info(
            "Iteracao %s: sup|dV|=%s sup|dPi|=%s residuo=%s Lip(pi)=%s",
            n,
            sup_dv,
            sup_dpi,
            residual_norm,
            lipschitz,
        )
        if previous is not None and sup_dv < config.tol_v and sup_dpi < config.tol_pi:
            converged = True
            break
        previous = vf
        policy = improved

    if not converged:
        logger.warning("gPIA sem convergencia apos %s iteracoes.", config.max_iters)
    if problem.structure is None:
        logger.info(
            "Constantes B_K e C_K nao verificaveis para %s; apenas Lip(pi) e registrado.",
            problem.name,
        )
    return IterationReport(
        iterations=records,
        converged=converged,
        final_policy=solved_policy,
        final_value=vf,
        values=values,
        policies=policies,
    )
