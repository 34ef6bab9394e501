#!/usr/bin/env python3
"""
Script to run the halfcav command line without installing the package
"""
import sys
import os

# Add the repository root to Python path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from halfcav.cli import main

if __name__ == "__main__":
    sys.exit(main())
