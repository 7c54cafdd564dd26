"""Fragment distribution between fixed databases and communicating products."""

__version__ = "0.1.0"
