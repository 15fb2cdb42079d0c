"""Allow running as: python -m cuesync"""

from cuesync.cli import main

if __name__ == "__main__":
    raise SystemExit(main())
