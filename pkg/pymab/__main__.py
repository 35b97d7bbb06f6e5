"""Allow ``python -m pymab``."""

import sys

from .cli import main

sys.exit(main())
