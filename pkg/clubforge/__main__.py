"""Allow `python -m clubforge`."""

import sys

from .cli import main

sys.exit(main())
