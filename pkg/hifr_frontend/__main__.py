#!/usr/bin/env python3
"""High-frame-rate front-end - Main entry point.

Run with: python -m hifr_frontend <command> [options]
"""

from hifr_frontend.cli.frontend_cli import main

if __name__ == "__main__":
    raise SystemExit(main())
