"""Multilingual multi-speaker speech synthesis with few-shot voice cloning."""

__version__ = "0.1.0"
