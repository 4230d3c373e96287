"""Early-warning toolkit: weekly click-series classification for MOOC learners."""

__version__ = "0.1.0"
