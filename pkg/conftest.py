import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "gpialab.settings")
django.setup()
