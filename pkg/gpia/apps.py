from django.apps import AppConfig


class GpiaConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "gpia"
    verbose_name = "Iteracao de politicas"
