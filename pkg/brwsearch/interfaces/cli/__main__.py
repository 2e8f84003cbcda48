"""
Entry point for the brwsearch CLI interface.

This module allows running the CLI interface as a module:
python -m brwsearch.interfaces.cli
"""
from brwsearch.interfaces.cli.main import main


if __name__ == "__main__":
    main()
