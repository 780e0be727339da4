"""Experiment configuration files.

A configuration is a UTF-8 JSON object with the sections ``problem``,
``grid``, ``scaling``, ``argmin``, ``pia``, ``simulation``, ``coupling``,
``check`` and ``output_dir``. Missing sections take the defaults below;
every section is validated by the matching form in ``gpia.forms``.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from django.conf import settings

from .choices import ArgminVariant, ScalingChoice
from .assumptions import default_sampling
from .coupling import MarkovDiffusion, isotropic_diffusion
from .exceptions import ArgumentError, ConfigError
from .expressions import compile_expression
from .forms import (
    ArgminForm,
    CheckForm,
    CouplingForm,
    ExampleClassForm,
    ExperimentForm,
    GridForm,
    PiaForm,
    ProblemForm,
    SimulationForm,
)
from .improvement import ArgminRule, GpiaConfig, ScalingFunction
from .montecarlo import SimConfig
from .poisson import Grid, Policy
from .problems import (
    ActionSet,
    ControlProblem,
    DataClassCertificate,
    ExampleClassSpec,
    build_example_class,
    builtin_problem,
)

logger = logging.getLogger(__name__)

SECTION_DEFAULTS: dict[str, dict[str, Any]] = {
    "grid": {"n": 2001},
    "argmin": {"n_actions": 2001, "tolerance": 1e-10},
    "pia": {"max_iters": 50, "tol_v": 1e-8, "tol_pi": 1e-6},
    "simulation": {
        "dt": 1e-3,
        "t_max": 25.0,
        "n_paths": 100000,
        "x0": [0.0],
        "tolerance": 0.05,
    },
    "coupling": {
        "d": 1,
        "phi": 1.0,
        "distances": [0.1],
        "delta_c_factors": [1.0],
        "dt": 1e-4,
        "t_max": 5.0,
        "n_paths": 100000,
        "eps": 0.1,
        "sigma_tanh": 0.0,
    },
}

SECTION_FORMS = {
    "grid": GridForm,
    "argmin": ArgminForm,
    "pia": PiaForm,
    "simulation": SimulationForm,
    "coupling": CouplingForm,
    "check": CheckForm,
}

KNOWN_KEYS = frozenset(
    {"problem", "scaling", "output_dir"} | set(SECTION_FORMS)
)

# keys that are Python keywords on the form side
_RENAMED = {"lambda": "lambda_"}


@dataclass(frozen=True)
class CouplingSettings:
    diffusion: MarkovDiffusion
    phi: float
    distances: tuple[float, ...]
    delta_c: float | None
    delta_c_factors: tuple[float, ...]
    dt: float
    t_max: float
    n_paths: int
    seed: int
    eps: float
    m_x: float | None

    def delta_c_for(self, y0: float, factor: float = 1.0) -> float:
        base = self.delta_c if self.delta_c is not None else y0 / 100.0
        return base * factor


@dataclass(frozen=True)
class ExperimentConfig:
    problem: ControlProblem
    grid: Grid
    scaling: ScalingFunction
    rule: ArgminRule
    pia: GpiaConfig
    initial_action: float
    simulation: SimConfig
    x0: tuple[float, ...]
    mc_tolerance: float
    coupling: CouplingSettings
    check_sampling: tuple[int, int]
    output_dir: Path
    certificate: DataClassCertificate | None = field(default=None, compare=False)

    def initial_policy(self) -> Policy:
        return Policy.constant(self.grid, self.problem.actions, self.initial_action)


def _form_data(section: str, raw: Any) -> dict[str, Any]:
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{section}: esperado um objeto JSON.")
    data = dict(SECTION_DEFAULTS.get(section, {}))
    if section == "check":
        data.update(zip(("n_x", "n_p"), default_sampling()))
    for key, value in raw.items():
        data[_RENAMED.get(key, key)] = value
    return data


def _validated(section: str, form) -> dict[str, Any]:
    if form.is_valid():
        return form.cleaned_data
    entries = []
    for name, errors in form.errors.items():
        label = section if name == "__all__" else f"{section}.{name.rstrip('_')}"
        entries.extend(f"{label}: {error}" for error in errors)
    raise ConfigError("Configuracao invalida: " + "; ".join(entries))


def _scalar(expression: str, variable: str):
    coefficient = compile_expression(expression)
    if variable == "x":
        return lambda x: coefficient(x, 0.0)
    return lambda p: coefficient(0.0, p)


def _example_class_problem(
    raw: dict[str, Any], domain: dict[str, Any]
) -> tuple[ControlProblem, DataClassCertificate]:
    data = {_RENAMED.get(key, key): value for key, value in raw.items()}
    cleaned = _validated("problem.example_class", ExampleClassForm(data=data))
    inverse = cleaned.get("f2_prime_inverse")
    spec = ExampleClassSpec(
        sigma1=_scalar(cleaned["sigma1"], "x"),
        mu1=_scalar(cleaned["mu1"], "x"),
        f1=_scalar(cleaned["f1"], "x"),
        f2=_scalar(cleaned["f2"], "p"),
        f2_prime=_scalar(cleaned["f2_prime"], "p"),
        f2_prime_inverse=_scalar(inverse, "p") if inverse else None,
        mu2=cleaned["mu2"],
        alpha0=cleaned["alpha0"],
        a_action=cleaned["a_action"],
        c_mu1_prime=cleaned["c_mu1_prime"],
        c_f1_prime=cleaned["c_f1_prime"],
        c_f1=cleaned["c_f1"],
        c_f2=cleaned["c_f2"],
        c_mu1=cleaned["c_mu1"],
        l_f2=cleaned["l_f2"],
        lambda_=cleaned["lambda_"],
    )
    return build_example_class(
        spec,
        domain["domain_lo"],
        domain["domain_hi"],
        domain["g_lo"],
        domain["g_hi"],
        name="example-class",
        require_certificate=cleaned["require_certificate"],
    )


def build_problem(raw: Any) -> tuple[ControlProblem, DataClassCertificate | None]:
    if not isinstance(raw, dict):
        raise ConfigError("problem: esperado um objeto JSON.")
    example_class = raw.get("example_class")
    data = _form_data("problem", {k: v for k, v in raw.items() if k != "example_class"})
    data["has_example_class"] = example_class is not None
    cleaned = _validated("problem", ProblemForm(data=data))

    if cleaned["builtin"]:
        return builtin_problem(cleaned["builtin"])
    if example_class is not None:
        if not isinstance(example_class, dict):
            raise ConfigError("problem.example_class: esperado um objeto JSON.")
        return _example_class_problem(example_class, cleaned)

    problem = ControlProblem(
        sigma=compile_expression(cleaned["sigma"]),
        mu=compile_expression(cleaned["mu"]),
        alpha=compile_expression(cleaned["alpha"]),
        f=compile_expression(cleaned["f"]),
        actions=ActionSet(cleaned["action_lo"], cleaned["action_hi"]),
        domain_lo=cleaned["domain_lo"],
        domain_hi=cleaned["domain_hi"],
        g_lo=cleaned["g_lo"],
        g_hi=cleaned["g_hi"],
        epsilon0=cleaned["epsilon0"],
        lambda_=cleaned["lambda_"],
        name="inline",
    )
    return problem, None


def build_scaling(kind: str, problem: ControlProblem) -> ScalingFunction:
    if kind == ScalingChoice.UNIT:
        return ScalingFunction.unit()
    return ScalingFunction.inverse_sigma_squared(problem)


def build_rule(cleaned: dict[str, Any], problem: ControlProblem) -> ArgminRule:
    variant = cleaned.get("rule") or (
        ArgminVariant.CLOSED_FORM if problem.structure is not None else ArgminVariant.GRID_SEARCH
    )
    if variant == ArgminVariant.CLOSED_FORM and problem.structure is None:
        raise ConfigError(
            "argmin.rule: forma fechada exige problema da classe exemplo; "
            "use grid-search ou golden-section."
        )
    return ArgminRule(
        variant,
        n_actions=cleaned["n_actions"],
        tolerance=cleaned["tolerance"],
        spec=problem.structure,
    )


def _tanh_diffusion(d: int, amplitude: float) -> MarkovDiffusion:
    if amplitude == 0:
        return isotropic_diffusion(d)
    return isotropic_diffusion(
        d,
        scale=lambda states: 1.0 + amplitude * np.tanh(states[:, 0]),
        lambda_=(1.0 - abs(amplitude)) ** 2,
    )


def _seed(value: int | None, override: int | None) -> int:
    if override is not None:
        return int(override)
    if value is not None:
        return int(value)
    return int(getattr(settings, "GPIA_DEFAULT_SEED", 20240101))


def parse_experiment_config(
    raw: Any,
    *,
    seed: int | None = None,
    output_dir: str | Path | None = None,
    base_dir: Path | None = None,
) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("Configuracao deve ser um objeto JSON.")
    unknown = sorted(set(raw) - KNOWN_KEYS)
    if unknown:
        raise ConfigError("Secoes desconhecidas: " + ", ".join(unknown) + ".")
    if "problem" not in raw:
        raise ConfigError("problem: secao obrigatoria.")
    if seed is not None and not 0 <= int(seed) < 2**64:
        raise ConfigError("--seed deve ser um inteiro de 64 bits sem sinal.")

    try:
        problem, certificate = build_problem(raw["problem"])
        top = _validated(
            "config",
            ExperimentForm(
                data={
                    "scaling": raw.get("scaling", ScalingChoice.INVERSE_SIGMA_SQUARED),
                    "output_dir": raw.get("output_dir", ""),
                }
            ),
        )
        sections = {
            name: _validated(name, form_class(data=_form_data(name, raw.get(name))))
            for name, form_class in SECTION_FORMS.items()
        }
        check = sections["check"]
        check_sampling = (check["n_x"], check["n_p"])

        grid = Grid.for_problem(problem, sections["grid"]["n"])
        pia = sections["pia"]
        initial_action = pia.get("initial_policy")
        if initial_action is None:
            initial_action = problem.actions.hi
        if not problem.actions.contains(initial_action):
            raise ConfigError(
                f"pia.initial_policy: {initial_action} fora de "
                f"[{problem.actions.lo}, {problem.actions.hi}]."
            )

        sim = sections["simulation"]
        outside = [x0 for x0 in sim["x0"] if not problem.contains(x0)]
        if outside:
            raise ConfigError(
                f"simulation.x0: pontos fora de ({problem.domain_lo}, {problem.domain_hi}): "
                + ", ".join(repr(x0) for x0 in outside)
            )
        coupling = sections["coupling"]
        config = ExperimentConfig(
            problem=problem,
            grid=grid,
            scaling=build_scaling(top["scaling"], problem),
            rule=build_rule(sections["argmin"], problem),
            pia=GpiaConfig(pia["max_iters"], pia["tol_v"], pia["tol_pi"]),
            initial_action=float(initial_action),
            simulation=SimConfig(
                sim["dt"], sim["t_max"], sim["n_paths"], _seed(sim.get("seed"), seed)
            ),
            x0=tuple(sim["x0"]),
            mc_tolerance=sim["tolerance"],
            coupling=CouplingSettings(
                diffusion=_tanh_diffusion(coupling["d"], coupling["sigma_tanh"]),
                phi=coupling["phi"],
                distances=tuple(coupling["distances"]),
                delta_c=coupling.get("delta_c"),
                delta_c_factors=tuple(coupling["delta_c_factors"] or [1.0]),
                dt=coupling["dt"],
                t_max=coupling["t_max"],
                n_paths=coupling["n_paths"],
                seed=_seed(coupling.get("seed"), seed),
                eps=coupling["eps"],
                m_x=coupling.get("m_x"),
            ),
            check_sampling=check_sampling,
            output_dir=_output_dir(top["output_dir"], output_dir, base_dir),
            certificate=certificate,
        )
    except ArgumentError as exc:
        raise ConfigError(str(exc)) from exc

    logger.info(
        "Configuracao carregada: problema=%s grade=%s escala=%s regra=%s",
        problem.name,
        config.grid.n,
        config.scaling.kind,
        config.rule.variant,
    )
    return config


def _output_dir(configured: str, override: str | Path | None, base_dir: Path | None) -> Path:
    if override:
        return Path(override)
    if configured:
        path = Path(configured)
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        return path
    return Path(getattr(settings, "GPIA_OUTPUT_DIR", "output"))


def load_experiment_config(
    path: str | Path, *, seed: int | None = None, output_dir: str | Path | None = None
) -> ExperimentConfig:
    """Read and validate a JSON configuration. OSError propagates to the caller."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"JSON invalido em {path}: linha {exc.lineno}, coluna {exc.colno}: {exc.msg}."
        ) from exc
    return parse_experiment_config(raw, seed=seed, output_dir=output_dir, base_dir=path.parent)
