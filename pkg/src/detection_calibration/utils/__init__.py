"""
Utilities for the :mod:`detection_calibration` package.
"""
