"""Coarse curvature measurements for finite metric spaces."""

__version__ = "0.1.0"
