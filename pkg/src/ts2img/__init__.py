"""Encode time series as images and detect anomalies from auto-encoder residuals."""

__version__ = "0.1.0"
