"""
Console entry: ``python main.py <command> ...`` runs the mzkit CLI.
"""
from mzkit.cli.app import app

if __name__ == "__main__":
    app()
