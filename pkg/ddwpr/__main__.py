"""Entry point for `python -m ddwpr`"""
from ddwpr.cli import main

if __name__ == "__main__":
    raise SystemExit(main())
