"""Entry point for running Lead-Lag Engine as a module."""

import sys

from app.pipeline import main

if __name__ == "__main__":
    sys.exit(main())
