"""Entry point for python -m defiblocks."""

from defiblocks.cli import app

if __name__ == "__main__":
    app()
