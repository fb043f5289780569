"""Position and orientation error bounds for wearable RIS sensors in the near and far field."""

__version__ = "0.1.0"
