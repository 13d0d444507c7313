"""
Django settings for the setclash project.

setclash has no web surface: the apps below are numerical libraries driven
through the ``setclash`` management command and the Celery probe workers.
Every tunable can be overridden from the environment (or a ``.env`` file
next to ``manage.py``).
"""

from pathlib import Path
import os

from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Load environment variables from .env file
load_dotenv(BASE_DIR / ".env")

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.getenv(
    "DJANGO_SECRET_KEY", "django-insecure-setclash-development-key"
)

DEBUG = os.getenv("DJANGO_DEBUG", "False") == "True"

ALLOWED_HOSTS = os.getenv("DJANGO_ALLOWED_HOSTS", "").split(",")


# Application definition

INSTALLED_APPS = [
    "django.contrib.contenttypes",
    # Local apps
    "common.apps.CommonConfig",
    "core.apps.CoreConfig",
    "sets.apps.SetsConfig",
    "varcalc.apps.VarcalcConfig",
    "conditions.apps.ConditionsConfig",
    "altproj.apps.AltprojConfig",
    "cli.apps.CliConfig",
]


# Database
# Nothing is persisted; the default alias only keeps the test runner and
# management commands happy.
DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": BASE_DIR / "db.sqlite3",
    }
}

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"


# Celery Configuration
# Eager mode runs probe tasks inline unless a broker is configured.
CELERY_BROKER_URL = os.getenv("CELERY_BROKER_URL", "memory://")
CELERY_RESULT_BACKEND = os.getenv("CELERY_RESULT_BACKEND", "cache+memory://")
CELERY_TASK_ALWAYS_EAGER = os.getenv("CELERY_TASK_ALWAYS_EAGER", "True") == "True"
CELERY_TASK_EAGER_PROPAGATES = True
CELERY_ACCEPT_CONTENT = ["json"]
CELERY_TASK_SERIALIZER = "json"
CELERY_RESULT_SERIALIZER = "json"
CELERY_TIMEZONE = TIME_ZONE
CELERY_TASK_TIME_LIMIT = 30 * 60  # 30 minutes


# Numerical settings
SETCLASH_OUT = os.getenv("SETCLASH_OUT", "reports")
SETCLASH_TOL = float(os.getenv("SETCLASH_TOL", "1e-9"))
SETCLASH_STRICT_MARGIN = float(os.getenv("SETCLASH_STRICT_MARGIN", "1e-12"))
SETCLASH_SLOPE_RADII = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
SETCLASH_SLOPE_DIRECTIONS = int(os.getenv("SETCLASH_SLOPE_DIRECTIONS", 512))
SETCLASH_EKELAND_BUDGET = int(os.getenv("SETCLASH_EKELAND_BUDGET", 10000))
SETCLASH_AP_MAX_ITER = int(os.getenv("SETCLASH_AP_MAX_ITER", 1000))
SETCLASH_PROBE_ASYNC = os.getenv("SETCLASH_PROBE_ASYNC", "False") == "True"


# Logging Configuration
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{asctime} {levelname} {name}: {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
        "file": {
            "class": "logging.FileHandler",
            "filename": BASE_DIR / "setclash.log",
            "formatter": "verbose",
        },
    },
    "loggers": {
        "": {  # root logger
            "handlers": ["console", "file"],
            "level": os.getenv("SETCLASH_LOG_LEVEL", "INFO"),
        },
    },
}
