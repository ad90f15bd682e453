"""SZZ variants over commit-sets: tracing, evaluation, and linker filtering."""

__version__ = "0.1.0"
