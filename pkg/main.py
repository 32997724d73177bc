#!/usr/bin/env python3
"""
🧮 vem-adapt - Main Entry Point
Adaptive refinement and coarsening of virtual element meshes
"""

import sys
from pathlib import Path

# Add current directory to Python path
sys.path.insert(0, str(Path(__file__).parent))

from src.bench.cli import run_cli  # noqa: E402


def main():
    """Main entry point for vem-adapt"""
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
