"""
Post-hoc calibrators and the threshold-calibrate-threshold pipeline.
"""
