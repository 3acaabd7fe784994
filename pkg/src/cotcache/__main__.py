from __future__ import annotations

import sys

from cotcache.harness.cli import main

sys.exit(main())
