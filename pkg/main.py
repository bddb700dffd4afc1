#!/usr/bin/env python3
"""
nestprover - Main Entry Point
Proof search, proof translation and countermodels from the command line
"""

from cli import main

if __name__ == "__main__":
    main()
