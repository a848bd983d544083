#!/usr/bin/env python3
"""
Rough Path Accessibility Toolkit entry point

    python rough_toolkit.py sig --oscillating 5 --segments 20000 --depth 2
    python rough_toolkit.py verify --vf sig2.json --rough purearea_pi.json --tol 1e-9
"""

import os
import sys

# Make the `src` package importable when run from any directory
current_dir = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, current_dir)

from src.cli.commands import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
