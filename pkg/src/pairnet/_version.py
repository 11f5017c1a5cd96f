"""Single source for the package version (also stamped into model files)."""

__version__ = "0.1.0"
