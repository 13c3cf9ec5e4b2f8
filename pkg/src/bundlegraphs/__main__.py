from __future__ import annotations

import sys

from bundlegraphs.cli import main

sys.exit(main())
