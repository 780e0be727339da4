"""Euler-Maruyama payoff estimates for a Markov policy.

Paths stop at the first step that leaves (a, b): the state is clamped to the
crossed end point and the discounted boundary reward is added. There is no
Brownian-bridge correction, so the exit time carries an O(sqrt(dt)) bias.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .choices import ExitSide
from .exceptions import ArgumentError
from .poisson import Policy
from .problems import ControlProblem
from .streams import GaussianStream

logger = logging.getLogger(__name__)

TRUNCATION_WARNING = 1e-8

_NONE, _LO, _HI = 0, 1, 2
_SIDES = {_NONE: ExitSide.NONE, _LO: ExitSide.LO, _HI: ExitSide.HI}


@dataclass(frozen=True)
class SimConfig:
    dt: float
    t_max: float
    n_paths: int
    seed: int

    def __post_init__(self):
        if not (self.dt > 0 and self.t_max > 0):
            raise ArgumentError("dt e t_max devem ser positivos.")
        if self.dt > self.t_max:
            raise ArgumentError("dt nao pode exceder t_max.")
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise ArgumentError("n_paths deve ser >= 1.")
        if int(self.seed) != self.seed or not 0 <= int(self.seed) < 2**64:
            raise ArgumentError("Semente deve ser um inteiro de 64 bits sem sinal.")

    @property
    def n_steps(self) -> int:
        return max(1, int(math.ceil(self.t_max / self.dt - 1e-9)))


@dataclass(frozen=True)
class PathPayoff:
    payoff: float
    exited: bool
    exit_side: str
    exit_time: float


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    std_error: float
    n_paths: int
    exit_lo: float = 0.0
    exit_hi: float = 0.0


@dataclass(frozen=True)
class _Batch:
    payoff: np.ndarray
    side: np.ndarray
    exit_time: np.ndarray


def truncation_bias_bound(problem: ControlProblem, policy: Policy, t_max: float) -> float:
    """sup|f_pi| / epsilon0 * exp(-epsilon0 t_max): the reward lost after t_max."""
    f = problem.f_at(policy.grid.nodes, policy.p)
    return float(np.max(np.abs(f))) / problem.epsilon0 * math.exp(-problem.epsilon0 * t_max)


def _simulate(
    problem: ControlProblem,
    policy: Policy,
    x0: float,
    cfg: SimConfig,
    path_indices: np.ndarray,
) -> _Batch:
    if not problem.contains(x0):
        raise ArgumentError(
            f"x0={x0} fora de ({problem.domain_lo}, {problem.domain_hi})."
        )
    a, b = problem.domain_lo, problem.domain_hi
    dt = cfg.dt
    sqrt_dt = math.sqrt(dt)
    m = len(path_indices)
    stream = GaussianStream(cfg.seed)

    payoff = np.zeros(m)
    side = np.full(m, _NONE, dtype=np.int8)
    exit_time = np.full(m, float(cfg.t_max))

    # state of the paths still inside (a, b), compacted on every exit
    slots = np.arange(m)
    paths = np.asarray(path_indices, dtype=np.int64)
    x = np.full(m, float(x0))
    discount = np.ones(m)
    running = np.zeros(m)

    for k in range(cfg.n_steps):
        if slots.size == 0:
            break
        p = policy(x)
        alpha = problem.alpha_at(x, p)
        # exact integral of the discount over the step; tends to disc * f * dt
        with np.errstate(divide="ignore", invalid="ignore"):
            weight = np.where(alpha != 0, -np.expm1(-alpha * dt) / alpha, dt)
        running += discount * problem.f_at(x, p) * weight
        discount *= np.exp(-alpha * dt)

        xi = stream.increments(k, paths)[:, 0]
        moved = x + problem.mu_at(x, p) * dt + problem.sigma_at(x, p) * sqrt_dt * xi
        hit_lo = moved <= a
        hit = hit_lo | (moved >= b)
        if np.any(hit):
            done = slots[hit]
            reward = np.where(hit_lo[hit], problem.g_lo, problem.g_hi)
            payoff[done] = running[hit] + discount[hit] * reward
            side[done] = np.where(hit_lo[hit], _LO, _HI)
            exit_time[done] = (k + 1) * dt
            keep = ~hit
            slots, paths = slots[keep], paths[keep]
            moved, discount, running = moved[keep], discount[keep], running[keep]
        x = moved

    payoff[slots] = running
    return _Batch(payoff=payoff, side=side, exit_time=exit_time)


def simulate_path(
    problem: ControlProblem,
    policy: Policy,
    x0: float,
    cfg: SimConfig,
    path_index: int,
) -> PathPayoff:
    batch = _simulate(problem, policy, x0, cfg, np.array([int(path_index)]))
    side = int(batch.side[0])
    return PathPayoff(
        payoff=float(batch.payoff[0]),
        exited=side != _NONE,
        exit_side=_SIDES[side],
        exit_time=float(batch.exit_time[0]),
    )


def estimate_payoff(
    problem: ControlProblem, policy: Policy, x0: float, cfg: SimConfig
) -> MonteCarloEstimate:
    """Mean and standard error over paths 0..n_paths-1, reduced in path order."""
    bias = truncation_bias_bound(problem, policy, cfg.t_max)
    if math.exp(-problem.epsilon0 * cfg.t_max) > TRUNCATION_WARNING:
        logger.warning(
            "Horizonte t_max=%s curto: vies de truncamento ate %s.", cfg.t_max, bias
        )
    batch = _simulate(problem, policy, x0, cfg, np.arange(cfg.n_paths))
    n = cfg.n_paths
    mean = math.fsum(batch.payoff) / n
    if n > 1:
        variance = math.fsum((batch.payoff - mean) ** 2) / (n - 1)
        std_error = math.sqrt(variance / n)
    else:
        std_error = 0.0
    estimate = MonteCarloEstimate(
        mean=mean,
        std_error=std_error,
        n_paths=n,
        exit_lo=float(np.count_nonzero(batch.side == _LO)) / n,
        exit_hi=float(np.count_nonzero(batch.side == _HI)) / n,
    )
    logger.info(
        "Monte Carlo x0=%s: media=%s erro padrao=%s (%s trajetorias, dt=%s).",
        x0,
        estimate.mean,
        estimate.std_error,
        n,
        cfg.dt,
    )
    return estimate
