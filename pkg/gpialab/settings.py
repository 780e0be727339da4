"""
Django settings for gpialab project.

Generated by 'django-admin startproject' using Django 5.2.6.

For more information on this file, see
https://docs.djangoproject.com/en/5.2/topics/settings/

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

import os
from pathlib import Path

from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Load .env file for local development
load_dotenv(BASE_DIR / ".env")

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get(
    "SECRET_KEY",
    "django-insecure-gpialab-local-experiments-only",
)

DEBUG = os.environ.get("DEBUG", "True") == "True"

ALLOWED_HOSTS = os.environ.get("ALLOWED_HOSTS", "localhost,127.0.0.1").split(",")


# Application definition

INSTALLED_APPS = [
    "gpia.apps.GpiaConfig",
]


# Database
# https://docs.djangoproject.com/en/5.2/ref/settings/#databases
# The experiments keep no state; SQLite only keeps manage.py happy.

DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": BASE_DIR / "db.sqlite3",
    }
}


# Internationalization
# https://docs.djangoproject.com/en/5.2/topics/i18n/

LANGUAGE_CODE = "pt-br"

TIME_ZONE = "America/Sao_Paulo"

USE_I18N = True

USE_TZ = True


# Experiments

GPIA_OUTPUT_DIR = Path(os.environ.get("GPIA_OUTPUT_DIR", str(BASE_DIR / "output")))
GPIA_DEFAULT_SEED = int(os.environ.get("GPIA_DEFAULT_SEED", "20240101"))
GPIA_LOG_LEVEL = os.environ.get("GPIA_LOG_LEVEL", "INFO").upper()
GPIA_ASSUMPTION_GRID = os.environ.get("GPIA_ASSUMPTION_GRID", "1001x101")
GPIA_MAX_VIOLATIONS_LOGGED = int(
    os.environ.get("GPIA_MAX_VIOLATIONS_LOGGED", "20")
)

# Logging Configuration
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {"format": "%(levelname)s %(name)s: %(message)s"},
    },
    "handlers": {
        "console": {"class": "logging.StreamHandler", "formatter": "plain"},
    },
    "loggers": {
        "gpia": {
            "handlers": ["console"],
            "level": GPIA_LOG_LEVEL,
            "propagate": False,
        },
    },
}

# Default primary key field type
# https://docs.djangoproject.com/en/5.2/ref/settings/#default-auto-field

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"
