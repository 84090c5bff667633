"""Figure rendering for pdsim experiment outputs."""

__version__ = "0.1.0"
