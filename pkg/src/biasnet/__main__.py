"""Main entry point for biasnet package."""

from biasnet.cli import app

if __name__ == "__main__":
    app()
