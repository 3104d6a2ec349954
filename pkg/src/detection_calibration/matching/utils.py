#: Overlap floor below which a detection cannot match when tau is 0
EPS_MATCH = 1e-10

#: Assignment of detections without a matched object (false positives)
UNMATCHED = -1
