"""
Django settings for the magic_primes project.

Everything tunable is read from the environment (optionally seeded from a
local .env file) so that long computations can be configured per machine.
"""

from pathlib import Path
import os
import logging
from dotenv import load_dotenv

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

try:
    env_file = BASE_DIR / '.env'
    if env_file.exists():
        logger.info(f"Loading environment variables from {env_file}")
        load_dotenv(env_file)
except Exception as e:
    logger.warning(f"Error loading .env file: {str(e)}")

SECRET_KEY = os.getenv('DJANGO_SECRET_KEY', 'django-insecure-magic-primes-local-only')

DEBUG = os.getenv('DJANGO_DEBUG', 'False') == 'True'

VERSION = os.getenv('VERSION', '0.1.0')

ALLOWED_HOSTS = ['localhost', '127.0.0.1']

INSTALLED_APPS = [
    "django.contrib.contenttypes",
    "django.contrib.auth",
    "rest_framework",
    "squares",
]

DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": BASE_DIR / "db.sqlite3",
    }
}

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

USE_TZ = True
TIME_ZONE = "UTC"

# Computation knobs
MAGIC_CACHE_DIR = os.getenv('MAGIC_CACHE_DIR', str(BASE_DIR / '.cache' / 'counts'))
MAGIC_JOBS = int(os.getenv('MAGIC_JOBS', '1'))
MAGIC_MAX_DIRECT_N = int(os.getenv('MAGIC_MAX_DIRECT_N', '40'))
MAGIC_P_MAX = int(os.getenv('MAGIC_P_MAX', '100000'))
MAGIC_PRECISION = int(os.getenv('MAGIC_PRECISION', '20'))
MAGIC_CENSUS_BUDGET_SECONDS = int(os.getenv('MAGIC_CENSUS_BUDGET_SECONDS', '0'))
MAGIC_OUTPUT_FORMAT = os.getenv('MAGIC_OUTPUT_FORMAT', 'pretty')

LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')

LOG_DIR = BASE_DIR / 'logs'
os.makedirs(LOG_DIR, exist_ok=True)

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {process:d} {thread:d} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {asctime} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'file': {
            'level': 'INFO',
            'class': 'logging.FileHandler',
            'filename': LOG_DIR / 'squares.log',
            'formatter': 'verbose',
        },
        'error_file': {
            'level': 'ERROR',
            'class': 'logging.FileHandler',
            'filename': LOG_DIR / 'error.log',
            'formatter': 'verbose',
        },
        'console': {
            'level': 'WARNING',
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'django': {
            'handlers': ['file', 'console'],
            'level': 'INFO',
            'propagate': True,
        },
        'squares': {
            'handlers': ['file', 'error_file', 'console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}

# Count tables are expensive (E_4(26) walks ~10^8 branches), so they live on disk
CACHES = {
    'default': {
        'BACKEND': 'django.core.cache.backends.locmem.LocMemCache',
        'LOCATION': 'magic-primes',
    },
    'counts': {
        'BACKEND': 'django.core.cache.backends.filebased.FileBasedCache',
        'LOCATION': MAGIC_CACHE_DIR,
        'TIMEOUT': None,
    },
}
