"""Campus backbone planning and hub/switch network simulation."""

__version__ = "0.1.0"
