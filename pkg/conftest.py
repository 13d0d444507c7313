# Test collection wiring: configure Django before the app test modules
# (setclash/*/tests.py) are imported, mirroring setclash/manage.py.
import os
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent / "setclash"))
os.environ.setdefault("DJANGO_SETTINGS_MODULE", "setclash.settings")

import django  # noqa: E402

django.setup()
