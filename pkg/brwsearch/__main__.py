"""
Main entry point for the brwsearch toolkit.

This module allows running the command-line interface as a module:
python -m brwsearch
"""
from brwsearch.interfaces.cli.main import main


if __name__ == "__main__":
    main()
