"""Single source of the package version for runtime metadata stamps."""

__version__ = "0.1.0"
