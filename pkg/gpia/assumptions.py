"""Sampling checks of the standing assumptions on the coefficients.

Sampling can only refute an assumption: a passed report means no
counterexample was found on the sampled grid.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings

from .exceptions import ArgumentError
from .problems import ControlProblem

logger = logging.getLogger(__name__)

COEFFICIENTS: tuple[str, ...] = ("sigma", "mu", "alpha", "f")


@dataclass(frozen=True)
class Violation:
    x: float
    p: float
    description: str

    @property
    def location(self) -> tuple[float, float]:
        return (self.x, self.p)


@dataclass(frozen=True)
class AssumptionReport:
    estimated_lipschitz: dict[str, float]
    lipschitz_x: dict[str, float]
    lipschitz_p: dict[str, float]
    sup_abs: dict[str, float]
    estimated_lambda: float
    estimated_epsilon0: float
    n_x: int
    n_p: int
    violations: list[Violation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def default_sampling() -> tuple[int, int]:
    raw = str(getattr(settings, "GPIA_ASSUMPTION_GRID", "1001x101"))
    try:
        n_x, n_p = (int(part) for part in raw.lower().split("x", 1))
    except ValueError as exc:
        raise ArgumentError(f"GPIA_ASSUMPTION_GRID invalido: {raw}. Use NxM.") from exc
    return n_x, n_p


def _divided_differences(values: np.ndarray, nodes: np.ndarray, axis: int) -> float:
    steps = np.diff(nodes)
    diffs = np.abs(np.diff(values, axis=axis))
    if axis == 0:
        ratios = diffs / steps[:, None]
    else:
        ratios = diffs / steps[None, :]
    finite = ratios[np.isfinite(ratios)]
    return float(finite.max()) if finite.size else float("nan")


def check_assumption1(
    problem: ControlProblem, n_x: int | None = None, n_p: int | None = None
) -> AssumptionReport:
    if n_x is None or n_p is None:
        default_x, default_p = default_sampling()
        n_x = default_x if n_x is None else n_x
        n_p = default_p if n_p is None else n_p
    if int(n_x) != n_x or int(n_p) != n_p or n_x < 2 or n_p < 2:
        raise ArgumentError("Grade de amostragem exige n_x >= 2 e n_p >= 2.")
    n_x = int(n_x)
    n_p = int(n_p)

    xs = np.linspace(problem.domain_lo, problem.domain_hi, n_x)
    ps = np.linspace(problem.actions.lo, problem.actions.hi, n_p)
    grid_x, grid_p = np.meshgrid(xs, ps, indexing="ij")

    sampled = {
        "sigma": problem.sigma_at(grid_x, grid_p),
        "mu": problem.mu_at(grid_x, grid_p),
        "alpha": problem.alpha_at(grid_x, grid_p),
        "f": problem.f_at(grid_x, grid_p),
    }

    violations: list[Violation] = []
    for name, values in sampled.items():
        bad = ~np.isfinite(values)
        for i, j in zip(*np.nonzero(bad)):
            violations.append(Violation(float(xs[i]), float(ps[j]), f"{name} nao finito"))

    sigma_sq = sampled["sigma"] ** 2
    low_alpha = sampled["alpha"] < problem.epsilon0
    for i, j in zip(*np.nonzero(low_alpha)):
        violations.append(
            Violation(
                float(xs[i]),
                float(ps[j]),
                f"alpha={sampled['alpha'][i, j]} < epsilon0={problem.epsilon0}",
            )
        )
    low_sigma = sigma_sq < problem.lambda_
    for i, j in zip(*np.nonzero(low_sigma)):
        violations.append(
            Violation(
                float(xs[i]),
                float(ps[j]),
                f"sigma^2={sigma_sq[i, j]} < lambda={problem.lambda_}",
            )
        )

    lipschitz_x = {name: _divided_differences(values, xs, 0) for name, values in sampled.items()}
    lipschitz_p = {name: _divided_differences(values, ps, 1) for name, values in sampled.items()}
    report = AssumptionReport(
        estimated_lipschitz={
            name: max(lipschitz_x[name], lipschitz_p[name]) for name in COEFFICIENTS
        },
        lipschitz_x=lipschitz_x,
        lipschitz_p=lipschitz_p,
        sup_abs={name: float(np.nanmax(np.abs(values))) for name, values in sampled.items()},
        estimated_lambda=float(np.nanmin(sigma_sq)),
        estimated_epsilon0=float(np.nanmin(sampled["alpha"])),
        n_x=n_x,
        n_p=n_p,
        violations=violations,
    )
    _log_report(problem, report)
    return report


def _log_report(problem: ControlProblem, report: AssumptionReport) -> None:
    if report.passed:
        logger.info(
            "Hipoteses de %s sem contraexemplo em %sx%s pontos (lambda~%s, epsilon0~%s).",
            problem.name,
            report.n_x,
            report.n_p,
            report.estimated_lambda,
            report.estimated_epsilon0,
        )
        return
    limit = getattr(settings, "GPIA_MAX_VIOLATIONS_LOGGED", 20)
    logger.warning(
        "Hipoteses de %s violadas em %s pontos.", problem.name, len(report.violations)
    )
    for violation in report.violations[:limit]:
        logger.warning("  x=%s p=%s: %s", violation.x, violation.p, violation.description)


def estimate_policy_lipschitz(nodes: np.ndarray, p: np.ndarray) -> float:
    """Divided-difference Lipschitz estimate of a nodal policy."""
    if len(nodes) < 2:
        return 0.0
    return float(np.max(np.abs(np.diff(p)) / np.diff(nodes)))
