"""
Django settings for the casimir backend project.

The project hosts a single numerical application, ``casimir``, driven through
management commands. Numerical defaults live in the CASIMIR_* block below.
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get(
    'DJANGO_SECRET_KEY',
    'django-insecure-casimir-local-only-key',
)

DEBUG = os.environ.get('DJANGO_DEBUG', 'false').lower() == 'true'

ALLOWED_HOSTS = []

# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'rest_framework',
    'casimir',
]


# Database
# The application keeps no state; sqlite satisfies Django's startup checks.

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Logging
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'diagnostic': {
            'format': '{levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'diagnostic',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'WARNING',
    },
    'loggers': {
        'casimir': {
            'handlers': ['console'],
            'level': os.environ.get('CASIMIR_LOG_LEVEL', 'INFO'),
            'propagate': False,
        },
    },
}


# Casimir numerical defaults
CASIMIR_L_MAX = 3
CASIMIR_QUADRATURE_NODES = 40
CASIMIR_MATSUBARA_L_MAX = 2
CASIMIR_CONVERGENCE_TOLERANCE = 0.05
CASIMIR_THREADS = max(1, int(os.environ.get('CASIMIR_THREADS', os.cpu_count() or 1)))
CASIMIR_CSV_DIGITS = 12
