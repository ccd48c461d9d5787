"""Day-ahead load forecasting benchmark for households and energy communities."""

__version__ = "0.1.0"
