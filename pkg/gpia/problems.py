from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .exceptions import ArgumentError, CertificateError

logger = logging.getLogger(__name__)

Coefficient = Callable[[np.ndarray, np.ndarray], np.ndarray]
ScalarFunction = Callable[[np.ndarray], np.ndarray]

_SHAPE_SAMPLES = 201


def evaluate(fn: Coefficient, x, p) -> np.ndarray:
    """Evaluate a coefficient on broadcast (x, p) and return a float array."""
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    shape = np.broadcast_shapes(x.shape, p.shape)
    values = np.asarray(fn(x, p), dtype=float)
    return np.array(np.broadcast_to(values, shape), dtype=float)


def _require_finite(value: float, label: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ArgumentError(f"{label} deve ser finito.")
    return value


@dataclass(frozen=True)
class ActionSet:
    lo: float
    hi: float

    def __post_init__(self):
        lo = _require_finite(self.lo, "Limite inferior da acao")
        hi = _require_finite(self.hi, "Limite superior da acao")
        if not lo < hi:
            raise ArgumentError("Conjunto de acoes exige lo < hi.")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def clamp(self, p):
        return np.clip(p, self.lo, self.hi)

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(np.all((p >= self.lo) & (p <= self.hi)))


@dataclass(frozen=True)
class ControlProblem:
    """Coefficients, actions and Dirichlet data of a control problem on (a, b)."""

    sigma: Coefficient
    mu: Coefficient
    alpha: Coefficient
    f: Coefficient
    actions: ActionSet
    domain_lo: float
    domain_hi: float
    g_lo: float
    g_hi: float
    epsilon0: float
    lambda_: float
    name: str = "custom"
    structure: ExampleClassSpec | None = field(default=None, compare=False)

    def __post_init__(self):
        a = float(self.domain_lo)
        b = float(self.domain_hi)
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ArgumentError(
                "Dominio infinito nao suportado: trunque o intervalo e informe g nas fronteiras."
            )
        if not a < b:
            raise ArgumentError("Dominio exige a < b.")
        if not float(self.epsilon0) > 0:
            raise ArgumentError("epsilon0 deve ser positivo.")
        if not float(self.lambda_) > 0:
            raise ArgumentError("lambda deve ser positivo.")
        object.__setattr__(self, "domain_lo", a)
        object.__setattr__(self, "domain_hi", b)
        object.__setattr__(self, "g_lo", _require_finite(self.g_lo, "g(a)"))
        object.__setattr__(self, "g_hi", _require_finite(self.g_hi, "g(b)"))
        object.__setattr__(self, "epsilon0", float(self.epsilon0))
        object.__setattr__(self, "lambda_", float(self.lambda_))

    def sigma_at(self, x, p) -> np.ndarray:
        return evaluate(self.sigma, x, p)

    def mu_at(self, x, p) -> np.ndarray:
        return evaluate(self.mu, x, p)

    def alpha_at(self, x, p) -> np.ndarray:
        return evaluate(self.alpha, x, p)

    def f_at(self, x, p) -> np.ndarray:
        return evaluate(self.f, x, p)

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all((x > self.domain_lo) & (x < self.domain_hi)))

    def renamed(self, name: str) -> ControlProblem:
        return replace(self, name=name)


@dataclass(frozen=True)
class ExampleClassSpec:
    """Data of the separable model class sigma1(x), mu1(x) + p mu2, f1(x) + f2(p), alpha0.

    The ``c_*`` constants are trusted sup-norm bounds supplied by the caller;
    only the inequalities derived from them are validated.
    """

    sigma1: ScalarFunction
    mu1: ScalarFunction
    f1: ScalarFunction
    f2: ScalarFunction
    f2_prime: ScalarFunction
    mu2: float
    alpha0: float
    a_action: float
    c_mu1_prime: float
    c_f1_prime: float
    c_f1: float
    c_f2: float
    c_mu1: float
    l_f2: float
    lambda_: float
    c_f2_prime: float | None = None
    f2_prime_inverse: ScalarFunction | None = field(default=None, compare=False)

    def __post_init__(self):
        if not float(self.a_action) > 0:
            raise ArgumentError("Meia largura a do conjunto A=[-a,a] deve ser positiva.")
        if not float(self.alpha0) > 0:
            raise ArgumentError("alpha0 deve ser positivo.")
        if not float(self.lambda_) > 0:
            raise ArgumentError("lambda deve ser positivo.")
        for label in ("c_mu1_prime", "c_f1_prime", "c_f1", "c_f2", "c_mu1", "l_f2"):
            value = _require_finite(getattr(self, label), label)
            if value < 0:
                raise ArgumentError(f"{label} deve ser nao negativo.")
            object.__setattr__(self, label, value)
        object.__setattr__(self, "mu2", _require_finite(self.mu2, "mu2"))

        a = float(self.a_action)
        samples = np.linspace(-a, a, _SHAPE_SAMPLES)
        f2_values = np.asarray(self.f2(samples), dtype=float)
        if not np.allclose(f2_values, f2_values[::-1], rtol=1e-9, atol=1e-12):
            raise ArgumentError("f2 deve ser simetrica: f2(p) = f2(-p).")
        slopes = np.asarray(self.f2_prime(samples), dtype=float)
        if np.any(np.diff(slopes) < -1e-12 * max(1.0, float(np.max(np.abs(slopes))))):
            raise ArgumentError("f2' deve ser nao decrescente (f2 convexa).")

        edge_slope = float(self.f2_prime(a))
        if self.c_f2_prime is None:
            object.__setattr__(self, "c_f2_prime", edge_slope)
        elif not math.isclose(float(self.c_f2_prime), edge_slope, rel_tol=1e-9, abs_tol=1e-12):
            raise ArgumentError(
                f"C'_f2 deve ser f2'(a) = {edge_slope}, recebido {self.c_f2_prime}."
            )
        if not float(self.c_f2_prime) > 0:
            raise ArgumentError("C'_f2 = f2'(a) deve ser positivo.")

    @property
    def actions(self) -> ActionSet:
        return ActionSet(-float(self.a_action), float(self.a_action))

    def inverse_slope(self, y) -> np.ndarray:
        """(f2')^-1 on the action interval, saturating at -a and a."""
        y = np.asarray(y, dtype=float)
        a = float(self.a_action)
        if self.f2_prime_inverse is not None:
            return np.clip(np.asarray(self.f2_prime_inverse(y), dtype=float), -a, a)
        return _invert_nondecreasing(self.f2_prime, y, -a, a)


def _invert_nondecreasing(fn: ScalarFunction, y: np.ndarray, lo: float, hi: float) -> np.ndarray:
    flat = np.ravel(y)
    out = np.empty_like(flat)
    f_lo = float(fn(lo))
    f_hi = float(fn(hi))
    for i, target in enumerate(flat):
        if target <= f_lo:
            out[i] = lo
        elif target >= f_hi:
            out[i] = hi
        else:
            out[i] = brentq(lambda q: float(fn(q)) - target, lo, hi, xtol=1e-14)
    return out.reshape(np.shape(y))


@dataclass(frozen=True)
class DataClassCertificate:
    b1: float
    b2: float
    alpha_threshold: float
    alpha_condition: bool
    curvature_condition: bool

    @property
    def passed(self) -> bool:
        return self.alpha_condition and self.curvature_condition


def certify_example_class(spec: ExampleClassSpec) -> DataClassCertificate:
    mu2 = abs(spec.mu2)
    denominator = spec.alpha0 - spec.c_mu1_prime - mu2
    if denominator <= 0:
        raise CertificateError(
            "B1 indefinido: alpha0 deve exceder C'_mu1 + |mu2| "
            f"({spec.alpha0} <= {spec.c_mu1_prime + mu2})."
        )
    b1 = (spec.c_f1_prime + spec.c_f2_prime) / denominator
    b2 = (
        2.0 * (spec.c_f1 + spec.c_f2) + (spec.c_mu1 + spec.a_action * mu2) * b1
    ) / spec.lambda_
    alpha_threshold = spec.c_mu1_prime + mu2 * (2.0 + spec.c_f1_prime / spec.c_f2_prime)
    return DataClassCertificate(
        b1=b1,
        b2=b2,
        alpha_threshold=alpha_threshold,
        alpha_condition=spec.alpha0 > alpha_threshold,
        curvature_condition=mu2 * b2 < spec.l_f2,
    )


def build_example_class(
    spec: ExampleClassSpec,
    domain_lo: float,
    domain_hi: float,
    g_lo: float,
    g_hi: float,
    *,
    name: str = "example-class",
    require_certificate: bool = True,
) -> tuple[ControlProblem, DataClassCertificate]:
    try:
        certificate = certify_example_class(spec)
    except CertificateError:
        if require_certificate:
            raise
        logger.warning(
            "Problema %s fora das hipoteses da classe exemplo: B1 e B2 indefinidos.",
            name,
        )
        certificate = DataClassCertificate(
            b1=math.inf,
            b2=math.inf,
            alpha_threshold=spec.c_mu1_prime
            + abs(spec.mu2) * (2.0 + spec.c_f1_prime / spec.c_f2_prime),
            alpha_condition=False,
            curvature_condition=False,
        )

    mu2 = float(spec.mu2)
    alpha0 = float(spec.alpha0)

    def sigma(x, p):
        return spec.sigma1(x)

    def mu(x, p):
        return spec.mu1(x) + p * mu2

    def alpha(x, p):
        return np.full(np.broadcast_shapes(np.shape(x), np.shape(p)), alpha0)

    def f(x, p):
        return spec.f1(x) + spec.f2(p)

    problem = ControlProblem(
        sigma=sigma,
        mu=mu,
        alpha=alpha,
        f=f,
        actions=spec.actions,
        domain_lo=domain_lo,
        domain_hi=domain_hi,
        g_lo=g_lo,
        g_hi=g_hi,
        epsilon0=alpha0,
        lambda_=spec.lambda_,
        name=name,
        structure=spec,
    )
    if not certificate.passed:
        logger.info(
            "Certificado da classe exemplo %s: alpha=%s curvatura=%s (B1=%s, B2=%s).",
            name,
            certificate.alpha_condition,
            certificate.curvature_condition,
            certificate.b1,
            certificate.b2,
        )
    return problem, certificate


def _zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def _one(x):
    return np.ones_like(np.asarray(x, dtype=float))


def _quadratic_spec(sigma1: ScalarFunction, lambda_: float) -> ExampleClassSpec:
    return ExampleClassSpec(
        sigma1=sigma1,
        mu1=_zero,
        f1=lambda x: np.asarray(x, dtype=float) ** 2,
        f2=lambda p: np.asarray(p, dtype=float) ** 2,
        f2_prime=lambda p: 2.0 * np.asarray(p, dtype=float),
        f2_prime_inverse=lambda y: np.asarray(y, dtype=float) / 2.0,
        mu2=1.0,
        alpha0=1.0,
        a_action=1.0,
        c_mu1_prime=0.0,
        c_f1_prime=20.0,
        c_f1=100.0,
        c_f2=1.0,
        c_mu1=0.0,
        l_f2=2.0,
        lambda_=lambda_,
    )


def quadratic_drift() -> tuple[ControlProblem, DataClassCertificate]:
    """A=[-1,1] on (-10,10), sigma=1, mu=p, alpha=1, f=x^2+p^2, g(x)=x^2."""
    return build_example_class(
        _quadratic_spec(_one, 1.0),
        -10.0,
        10.0,
        100.0,
        100.0,
        name="quadratic-drift",
        require_certificate=False,
    )


def quadratic_drift_wavy() -> tuple[ControlProblem, DataClassCertificate]:
    """Same data with sigma(x) = 1 + 0.1 sin x."""
    return build_example_class(
        _quadratic_spec(lambda x: 1.0 + 0.1 * np.sin(np.asarray(x, dtype=float)), 0.81),
        -10.0,
        10.0,
        100.0,
        100.0,
        name="quadratic-drift-wavy",
        require_certificate=False,
    )


BUILTIN_PROBLEMS: dict[str, Callable[[], tuple[ControlProblem, DataClassCertificate]]] = {
    "quadratic-drift": quadratic_drift,
    "quadratic-drift-wavy": quadratic_drift_wavy,
    "paper-4.2": quadratic_drift,
}


def builtin_problem(name: str) -> tuple[ControlProblem, DataClassCertificate]:
    try:
        factory = BUILTIN_PROBLEMS[name]
    except KeyError as exc:
        available = ", ".join(sorted(BUILTIN_PROBLEMS))
        raise ArgumentError(f"Problema embutido desconhecido: {name}. Use: {available}.") from exc
    return factory()
