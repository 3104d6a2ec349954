import numpy as np

#: Measure names
D_ECE = "d_ece"
LA_ECE = "la_ece"
LA_ECE0 = "la_ece0"
LA_ACE0 = "la_ace0"
COCO_D_ECE = "coco_d_ece"
KERNEL_CE = "kernel_ce"

#: Binned measures whose bins support reliability diagrams
BINNED_MEASURES = (D_ECE, LA_ECE, LA_ECE0)

#: Default number of bins
DEFAULT_DECE_BINS = 10
DEFAULT_LAECE_BINS = 25

#: Kernel calibration error
DEFAULT_KERNEL_BANDWIDTH = 0.05
KERNEL_LINKS = ("iou", "tp")

#: Reliability-diagram table columns
RELIABILITY_COLUMNS = ["bin_low", "bin_high", "count", "mean_conf", "target"]


def bin_indices(scores: np.ndarray, bins: int) -> np.ndarray:
    """
    Equal-width bin of every confidence: ``floor(p * bins)``, with
    ``p == 1`` falling into the last bin.
    """
    scores = np.asarray(scores, dtype=np.float64)
    return np.minimum(np.floor(scores * bins).astype(np.int64), bins - 1)


def bin_edges(bins: int) -> np.ndarray:
    return np.arange(bins + 1, dtype=np.float64) / bins
