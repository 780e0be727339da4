from __future__ import annotations

import math

from django import forms
from django.core.exceptions import ValidationError

from .choices import ArgminVariant, ScalingChoice
from .problems import BUILTIN_PROBLEMS


def _validate_positive(value):
    if value is not None and not value > 0:
        raise ValidationError("Deve ser maior que zero.")


def _validate_finite(value):
    if value is not None and not math.isfinite(value):
        raise ValidationError("Deve ser finito.")


def _float(label: str, required: bool = False, positive: bool = False) -> forms.FloatField:
    validators = [_validate_finite]
    if positive:
        validators.append(_validate_positive)
    return forms.FloatField(label=label, required=required, validators=validators)


class FloatListField(forms.Field):
    """A JSON list of numbers."""

    def __init__(self, *args, min_length: int = 1, positive: bool = False, **kwargs):
        self.min_length = min_length
        self.positive = positive
        super().__init__(*args, **kwargs)

    def to_python(self, value):
        if value in self.empty_values:
            return []
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            value = [value]
        if not isinstance(value, (list, tuple)):
            raise ValidationError("Informe uma lista de numeros.")
        numbers = []
        for item in value:
            if isinstance(item, bool) or not isinstance(item, (int, float)):
                raise ValidationError(f"Valor nao numerico na lista: {item!r}.")
            if not math.isfinite(item):
                raise ValidationError("Lista com valor nao finito.")
            numbers.append(float(item))
        return numbers

    def validate(self, value):
        super().validate(value)
        if self.required and len(value) < self.min_length:
            raise ValidationError(f"Informe pelo menos {self.min_length} valor(es).")
        if self.positive and any(item <= 0 for item in value):
            raise ValidationError("Todos os valores devem ser positivos.")


INLINE_COEFFICIENTS: tuple[str, ...] = ("sigma", "mu", "alpha", "f")
INLINE_NUMBERS: tuple[str, ...] = (
    "action_lo",
    "action_hi",
    "epsilon0",
    "lambda_",
)
DOMAIN_NUMBERS: tuple[str, ...] = ("domain_lo", "domain_hi", "g_lo", "g_hi")


class ProblemForm(forms.Form):
    builtin = forms.ChoiceField(
        label="Problema embutido",
        required=False,
        choices=[("", "-")] + [(name, name) for name in sorted(BUILTIN_PROBLEMS)],
    )
    sigma = forms.CharField(label="sigma(x,p)", required=False)
    mu = forms.CharField(label="mu(x,p)", required=False)
    alpha = forms.CharField(label="alpha(x,p)", required=False)
    f = forms.CharField(label="f(x,p)", required=False)
    action_lo = _float("Acao minima")
    action_hi = _float("Acao maxima")
    domain_lo = _float("a")
    domain_hi = _float("b")
    g_lo = _float("g(a)")
    g_hi = _float("g(b)")
    epsilon0 = _float("epsilon0", positive=True)
    lambda_ = _float("lambda", positive=True)
    has_example_class = forms.BooleanField(required=False)

    def clean(self):
        cleaned_data = super().clean()
        builtin = cleaned_data.get("builtin")
        example_class = cleaned_data.get("has_example_class")
        inline_given = [
            name
            for name in INLINE_COEFFICIENTS + INLINE_NUMBERS
            if cleaned_data.get(name) not in (None, "")
        ]
        if builtin:
            if inline_given or example_class:
                self.add_error(
                    "builtin",
                    "Informe um problema embutido ou coeficientes, nao ambos.",
                )
            return cleaned_data
        required = DOMAIN_NUMBERS
        if not example_class:
            required = required + INLINE_COEFFICIENTS + INLINE_NUMBERS
        for name in required:
            if cleaned_data.get(name) in (None, "") and name not in self.errors:
                self.add_error(name, "Campo obrigatorio.")
        lo = cleaned_data.get("domain_lo")
        hi = cleaned_data.get("domain_hi")
        if lo is not None and hi is not None and not lo < hi:
            self.add_error("domain_hi", "Dominio exige a < b.")
        a_lo = cleaned_data.get("action_lo")
        a_hi = cleaned_data.get("action_hi")
        if a_lo is not None and a_hi is not None and not a_lo < a_hi:
            self.add_error("action_hi", "Conjunto de acoes exige lo < hi.")
        return cleaned_data


class ExampleClassForm(forms.Form):
    sigma1 = forms.CharField(label="sigma1(x)")
    mu1 = forms.CharField(label="mu1(x)")
    f1 = forms.CharField(label="f1(x)")
    f2 = forms.CharField(label="f2(p)")
    f2_prime = forms.CharField(label="f2'(p)")
    f2_prime_inverse = forms.CharField(label="(f2')^-1(p)", required=False)
    mu2 = _float("mu2", required=True)
    alpha0 = _float("alpha0", required=True, positive=True)
    a_action = _float("a", required=True, positive=True)
    c_mu1_prime = _float("C'_mu1", required=True)
    c_f1_prime = _float("C'_f1", required=True)
    c_f1 = _float("C_f1", required=True)
    c_f2 = _float("C_f2", required=True)
    c_mu1 = _float("C_mu1", required=True)
    l_f2 = _float("L_f2", required=True)
    lambda_ = _float("lambda", required=True, positive=True)
    require_certificate = forms.BooleanField(required=False)

    def clean(self):
        cleaned_data = super().clean()
        for name in ("c_mu1_prime", "c_f1_prime", "c_f1", "c_f2", "c_mu1", "l_f2"):
            value = cleaned_data.get(name)
            if value is not None and value < 0:
                self.add_error(name, "Constante deve ser nao negativa.")
        return cleaned_data


class GridForm(forms.Form):
    n = forms.IntegerField(label="Nos da grade", min_value=3)


class ArgminForm(forms.Form):
    rule = forms.ChoiceField(label="Regra", required=False, choices=[("", "-")] + ArgminVariant.choices)
    n_actions = forms.IntegerField(label="Acoes na busca", min_value=2)
    tolerance = _float("Tolerancia", required=True, positive=True)


class PiaForm(forms.Form):
    max_iters = forms.IntegerField(label="Iteracoes maximas", min_value=1)
    tol_v = _float("tol_v", required=True, positive=True)
    tol_pi = _float("tol_pi", required=True, positive=True)
    initial_policy = _float("Politica inicial constante")


class SimulationForm(forms.Form):
    dt = _float("dt", required=True, positive=True)
    t_max = _float("t_max", required=True, positive=True)
    n_paths = forms.IntegerField(label="Trajetorias", min_value=1)
    seed = forms.IntegerField(label="Semente", min_value=0, max_value=2**64 - 1, required=False)
    x0 = FloatListField(label="Pontos iniciais")
    tolerance = _float("Tolerancia de vies", required=True)

    def clean(self):
        cleaned_data = super().clean()
        dt = cleaned_data.get("dt")
        t_max = cleaned_data.get("t_max")
        if dt and t_max and dt > t_max:
            self.add_error("dt", "dt nao pode exceder t_max.")
        tolerance = cleaned_data.get("tolerance")
        if tolerance is not None and tolerance < 0:
            self.add_error("tolerance", "Tolerancia deve ser nao negativa.")
        return cleaned_data


class CouplingForm(forms.Form):
    d = forms.IntegerField(label="Dimensao", min_value=1, max_value=3)
    phi = _float("phi", required=True, positive=True)
    distances = FloatListField(label="Distancias iniciais", positive=True)
    delta_c = _float("delta_c", positive=True)
    delta_c_factors = FloatListField(label="Fatores de delta_c", positive=True)
    dt = _float("dt", required=True, positive=True)
    t_max = _float("t_max", required=True, positive=True)
    n_paths = forms.IntegerField(label="Trajetorias", min_value=1)
    seed = forms.IntegerField(label="Semente", min_value=0, max_value=2**64 - 1, required=False)
    eps = _float("eps", required=True)
    m_x = _float("M_x", positive=True)
    sigma_tanh = _float("Amplitude tanh de sigma", required=True)

    def clean(self):
        cleaned_data = super().clean()
        phi = cleaned_data.get("phi")
        distances = cleaned_data.get("distances") or []
        if phi and any(y0 >= phi for y0 in distances):
            self.add_error("distances", "Distancias devem ser menores que phi.")
        eps = cleaned_data.get("eps")
        if eps is not None and not 0 < eps < 1:
            self.add_error("eps", "eps deve estar em (0, 1).")
        amplitude = cleaned_data.get("sigma_tanh")
        if amplitude is not None and not abs(amplitude) < 1:
            self.add_error("sigma_tanh", "Amplitude deve ter modulo menor que 1.")
        delta_c = cleaned_data.get("delta_c")
        factors = cleaned_data.get("delta_c_factors") or [1.0]
        for y0 in distances:
            base = delta_c if delta_c is not None else y0 / 100.0
            if any(base * factor > y0 for factor in factors):
                self.add_error(
                    "delta_c_factors",
                    f"delta_c deve ser <= distancia inicial ({y0}).",
                )
                break
        dt = cleaned_data.get("dt")
        t_max = cleaned_data.get("t_max")
        if dt and t_max and dt > t_max:
            self.add_error("dt", "dt nao pode exceder t_max.")
        return cleaned_data


class CheckForm(forms.Form):
    n_x = forms.IntegerField(label="n_x", min_value=2)
    n_p = forms.IntegerField(label="n_p", min_value=2)


class ExperimentForm(forms.Form):
    scaling = forms.ChoiceField(
        label="Escala",
        choices=[
            (ScalingChoice.UNIT, ScalingChoice.UNIT.label),
            (ScalingChoice.INVERSE_SIGMA_SQUARED, ScalingChoice.INVERSE_SIGMA_SQUARED.label),
        ],
    )
    output_dir = forms.CharField(label="Diretorio de saida", required=False)
