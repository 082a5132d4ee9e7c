# File: run_satharm.py
# This is the main entry point for the application.
import sys

from satharm.main import run

if __name__ == "__main__":
    sys.exit(run())
