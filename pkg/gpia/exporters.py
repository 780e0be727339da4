"""CSV writers of the experiment commands.

Floats are written with ``repr`` so reruns with the same configuration
produce byte-identical files.
"""
from __future__ import annotations

import csv
import logging
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .assumptions import COEFFICIENTS, AssumptionReport
from .improvement import IterationReport
from .poisson import ValueFunction
from .problems import DataClassCertificate

logger = logging.getLogger(__name__)

REPORT_HEADER = [
    "n",
    "sup_dV",
    "sup_dPi",
    "max_monotonicity_violation",
    "interior_residual_norm",
    "policy_lipschitz",
    "monotone",
]
MC_HEADER = [
    "x0",
    "mean",
    "std_error",
    "n_paths",
    "dt",
    "pde_value",
    "abs_diff",
    "within_tolerance",
]
COUPLING_HEADER = [
    "y0",
    "phi",
    "delta_c",
    "dt",
    "n_paths",
    "p_separated",
    "std_error",
    "p_censored",
    "bessel_bound",
    "in_regime",
]


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(value) for value in row])
    logger.info("Arquivo gravado: %s", path)
    return path


def _log10_gap(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log10(np.abs(a - b))


def export_value_function(path: Path, vf: ValueFunction) -> Path:
    return write_csv(
        path,
        ["x", "v", "dv", "d2v"],
        zip(vf.grid.nodes, vf.v, vf.dv, vf.d2v),
    )


def export_iterations(out_dir: Path, report: IterationReport) -> list[Path]:
    """value.csv, policy.csv, diffs.csv and report.csv of a gPIA run."""
    out_dir = Path(out_dir)
    nodes = report.final_value.grid.nodes
    values = [vf.v for vf in report.values]
    policies = [policy.p for policy in report.policies]

    written = [
        write_csv(
            out_dir / "value.csv",
            ["x"] + [f"V_{n}" for n in range(len(values))],
            zip(nodes, *values),
        ),
        write_csv(
            out_dir / "policy.csv",
            ["x"] + [f"pi_{n}" for n in range(len(policies))],
            zip(nodes, *policies),
        ),
    ]

    header = ["x"]
    columns = []
    for n in range(len(values) - 1):
        header.append(f"log10_dV_{n}")
        columns.append(_log10_gap(values[n + 1], values[n]))
    for n in range(len(policies) - 1):
        header.append(f"log10_dPi_{n}")
        columns.append(_log10_gap(policies[n + 1], policies[n]))
    written.append(write_csv(out_dir / "diffs.csv", header, zip(nodes, *columns)))

    written.append(
        write_csv(
            out_dir / "report.csv",
            REPORT_HEADER,
            (
                (
                    record.n,
                    record.sup_dV,
                    record.sup_dPi,
                    record.max_monotonicity_violation,
                    record.interior_residual_norm,
                    record.policy_lipschitz,
                    record.monotone,
                )
                for record in report.iterations
            ),
        )
    )
    return written


def export_assumptions(out_dir: Path, report: AssumptionReport) -> list[Path]:
    out_dir = Path(out_dir)
    rows: list[tuple] = [
        ("passed", report.passed),
        ("n_x", report.n_x),
        ("n_p", report.n_p),
        ("estimated_lambda", report.estimated_lambda),
        ("estimated_epsilon0", report.estimated_epsilon0),
        ("violations", len(report.violations)),
    ]
    for name in COEFFICIENTS:
        rows.append((f"lipschitz_x.{name}", report.lipschitz_x.get(name, math.nan)))
        rows.append((f"lipschitz_p.{name}", report.lipschitz_p.get(name, math.nan)))
        rows.append((f"estimated_lipschitz.{name}", report.estimated_lipschitz.get(name, math.nan)))
        rows.append((f"sup_abs.{name}", report.sup_abs.get(name, math.nan)))
    return [
        write_csv(out_dir / "assumptions.csv", ["field", "value"], rows),
        write_csv(
            out_dir / "violations.csv",
            ["x", "p", "description"],
            ((item.x, item.p, item.description) for item in report.violations),
        ),
    ]


def export_certificate(out_dir: Path, certificate: DataClassCertificate) -> Path:
    return write_csv(
        Path(out_dir) / "certificate.csv",
        ["field", "value"],
        [
            ("b1", certificate.b1),
            ("b2", certificate.b2),
            ("alpha_threshold", certificate.alpha_threshold),
            ("alpha_condition", certificate.alpha_condition),
            ("curvature_condition", certificate.curvature_condition),
            ("passed", certificate.passed),
        ],
    )
