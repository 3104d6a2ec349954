"""
Joint accuracy and calibration evaluation of object detectors, with post-hoc
calibrators.
"""
__version__ = "0.1.0"
