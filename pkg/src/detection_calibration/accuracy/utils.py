import numpy as np

#: Recall grid of COCO-style interpolated AP
RECALL_THRESHOLDS = np.linspace(0.0, 1.0, 101)

#: LRP values closer than this are treated as equal when picking thresholds
LRP_TIE_TOLERANCE = 1e-12
