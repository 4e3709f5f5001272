from django.apps import AppConfig
import logging

logger = logging.getLogger(__name__)


class SquaresConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'squares'
    verbose_name = 'Magic squares of primes'

    def ready(self):
        """Make sure the on-disk count cache directory exists before any command runs."""
        from django.conf import settings
        import os

        try:
            os.makedirs(settings.MAGIC_CACHE_DIR, exist_ok=True)
        except OSError as e:
            logger.error(f"Could not create count cache directory {settings.MAGIC_CACHE_DIR}: {str(e)}")
