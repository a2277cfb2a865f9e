"""Run the command line interface as ``python -m chordpred``."""

from chordpred.cli import main

if __name__ == "__main__":
    main()
