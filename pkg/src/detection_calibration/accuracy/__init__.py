"""
Accuracy measures: LRP, average precision and LRP-optimal thresholds.
"""
