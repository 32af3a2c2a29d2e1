"""Allow ``python -m stgsvd``."""

import sys

from .cli import main

sys.exit(main())
