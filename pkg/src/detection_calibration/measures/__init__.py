"""
Calibration-error measures of object detectors.
"""
