import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "magic_primes.settings")
django.setup()
