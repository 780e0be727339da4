from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .assumptions import check_assumption1
from .config import ExperimentConfig
from .coupling import (
    bessel_bound,
    check_ellipticity,
    coupling_radius,
    estimate_coupling_probability,
    separation_threshold,
)
from .exporters import (
    COUPLING_HEADER,
    MC_HEADER,
    export_assumptions,
    export_certificate,
    export_iterations,
    export_value_function,
    write_csv,
)
from .improvement import IterationReport, run_gpia
from .montecarlo import estimate_payoff

logger = logging.getLogger(__name__)

MC_STD_ERRORS = 3.0


@dataclass
class ExperimentResult:
    summary: str
    files: list[Path] = field(default_factory=list)
    ok: bool = True


def _iterate(config: ExperimentConfig) -> IterationReport:
    return run_gpia(
        config.problem,
        config.scaling,
        config.initial_policy(),
        config.rule,
        config.pia,
    )


def cmd_iterate(config: ExperimentConfig, out_dir: Path) -> ExperimentResult:
    report = _iterate(config)
    files = export_iterations(out_dir, report)
    files.append(export_value_function(Path(out_dir) / "final_value.csv", report.final_value))
    last = report.iterations[-1]
    status = "convergiu" if report.converged else "nao convergiu"
    return ExperimentResult(
        summary=(
            f"gPIA {status} em {len(report.iterations)} iteracoes "
            f"(sup|dV|={last.sup_dV}, sup|dPi|={last.sup_dPi}, "
            f"monotona={report.monotone})."
        ),
        files=files,
        ok=report.converged and report.monotone,
    )


def cmd_verify_mc(config: ExperimentConfig, out_dir: Path) -> ExperimentResult:
    report = _iterate(config)
    sim = config.simulation
    rows = []
    within_all = True
    for x0 in config.x0:
        estimate = estimate_payoff(config.problem, report.final_policy, x0, sim)
        pde_value = float(report.final_value.at(x0))
        abs_diff = abs(estimate.mean - pde_value)
        within = abs_diff <= MC_STD_ERRORS * estimate.std_error + config.mc_tolerance
        if not within:
            logger.warning(
                "x0=%s: |MC - PDE|=%s acima de %s erros padrao + %s.",
                x0,
                abs_diff,
                MC_STD_ERRORS,
                config.mc_tolerance,
            )
        within_all = within_all and within
        rows.append(
            (
                x0,
                estimate.mean,
                estimate.std_error,
                estimate.n_paths,
                sim.dt,
                pde_value,
                abs_diff,
                within,
            )
        )
    path = write_csv(Path(out_dir) / "mc.csv", MC_HEADER, rows)
    agreed = sum(1 for row in rows if row[-1])
    return ExperimentResult(
        summary=f"Monte Carlo concorda com a EDP em {agreed} de {len(rows)} pontos.",
        files=[path],
        ok=within_all,
    )


def cmd_coupling(config: ExperimentConfig, out_dir: Path) -> ExperimentResult:
    setup = config.coupling
    diff = setup.diffusion
    d = diff.d
    states = np.zeros((101, d))
    states[:, 0] = np.linspace(-2.0 * setup.phi, 2.0 * setup.phi, 101)
    check_ellipticity(diff, states)
    radius = (
        coupling_radius(setup.eps, diff.lambda_, setup.m_x)
        if setup.m_x is not None
        else None
    )
    if radius is None:
        logger.info("M_x nao informado: regime verificado apenas por ||x-x'|| < eps phi.")
    threshold = separation_threshold(setup.eps, setup.phi)

    rows = []
    within_bound = True
    for y0 in setup.distances:
        x = np.zeros(d)
        x_prime = x.copy()
        x_prime[0] = -y0
        bound = bessel_bound(y0, setup.phi, setup.eps)
        in_regime = y0 < threshold and (radius is None or setup.phi < radius)
        for factor in setup.delta_c_factors:
            delta_c = setup.delta_c_for(y0, factor)
            estimate = estimate_coupling_probability(
                diff,
                x,
                x_prime,
                setup.phi,
                delta_c,
                setup.dt,
                setup.t_max,
                setup.n_paths,
                setup.seed,
            )
            if in_regime and estimate.p_separated > bound + MC_STD_ERRORS * estimate.std_error:
                within_bound = False
                logger.warning(
                    "y0=%s delta_c=%s: P(separar)=%s excede o limite %s.",
                    y0,
                    delta_c,
                    estimate.p_separated,
                    bound,
                )
            rows.append(
                (
                    y0,
                    setup.phi,
                    delta_c,
                    setup.dt,
                    estimate.n_paths,
                    estimate.p_separated,
                    estimate.std_error,
                    estimate.p_censored,
                    bound,
                    in_regime,
                )
            )
    path = write_csv(Path(out_dir) / "coupling.csv", COUPLING_HEADER, rows)
    return ExperimentResult(
        summary=f"Acoplamento: {len(rows)} experimentos em dimensao {d}.",
        files=[path],
        ok=within_bound,
    )


def cmd_check(config: ExperimentConfig, out_dir: Path) -> ExperimentResult:
    n_x, n_p = config.check_sampling
    report = check_assumption1(config.problem, n_x, n_p)
    files = export_assumptions(out_dir, report)
    if config.certificate is not None:
        files.append(export_certificate(out_dir, config.certificate))
    logger.info(
        "Hipoteses de regularidade de Holder, crescimento e admissibilidade nao sao "
        "verificaveis por amostragem; apenas continuidade Lipschitz, elipticidade e "
        "desconto sao checados."
    )
    if report.passed:
        summary = f"Nenhuma violacao em {n_x}x{n_p} pontos."
    else:
        summary = f"{len(report.violations)} violacoes em {n_x}x{n_p} pontos."
    certificate = config.certificate
    if certificate is not None and not certificate.passed:
        summary += " Certificado da classe exemplo nao satisfeito."
    return ExperimentResult(
        summary=summary,
        files=files,
        ok=report.passed and (certificate is None or certificate.passed),
    )


COMMANDS = {
    "iterate": cmd_iterate,
    "verify-mc": cmd_verify_mc,
    "coupling": cmd_coupling,
    "check": cmd_check,
}
