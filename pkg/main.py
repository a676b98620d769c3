#!/usr/bin/env python3
"""
Loop Braid Integrability Toolkit
Command-line launcher; see src/main.py for the subcommands
"""

import sys
import os
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.main import main

if __name__ == "__main__":
    sys.exit(main())
