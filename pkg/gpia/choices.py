from django.db import models


class ScalingChoice(models.TextChoices):
    UNIT = "unit", "S = 1"
    INVERSE_SIGMA_SQUARED = "inverse-sigma-squared", "S = 1/sigma^2"
    CUSTOM = "custom", "Personalizada"


class ArgminVariant(models.TextChoices):
    CLOSED_FORM = "closed-form", "Forma fechada (classe exemplo)"
    GRID_SEARCH = "grid-search", "Busca em grade"
    GOLDEN_SECTION = "golden-section", "Secao aurea"


class Interpolation(models.TextChoices):
    PIECEWISE_LINEAR = "piecewise-linear", "Linear por partes"


class ExitSide(models.TextChoices):
    LO = "lo", "Fronteira inferior"
    HI = "hi", "Fronteira superior"
    NONE = "none", "Sem saida"
