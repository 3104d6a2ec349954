"""
Assignment of detections to ground-truth objects.
"""
