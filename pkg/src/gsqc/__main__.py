"""Main entry point for running gsqc as a module."""

import sys
from pathlib import Path

# Add src directory to path so imports work
PROJECT_ROOT = Path(__file__).parent.parent.parent
sys.path.insert(0, str(PROJECT_ROOT / 'src'))

from gsqc.cli.commands import main

if __name__ == '__main__':
    main()
