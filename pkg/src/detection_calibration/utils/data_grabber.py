"""
Definition of the :class:`DataGrabber` class.
"""
from pathlib import Path
from typing import Union

from detection_calibration.data.coco import load_detections, load_ground_truth
from detection_calibration.data.dataset import Dataset, top_k_per_image


class DataGrabber:
    """
    Locates a ground-truth file and, optionally, a detections file in COCO
    format and loads them into a :class:`Dataset`.

    Parameters
    ----------
    ground_truth : Union[str, Path]
        COCO annotation file
    detections : Union[str, Path], optional
        COCO results file, by default None
    top_k : int, optional
        Detections kept per image when loading, by default 100; None keeps
        every detection
    load : bool, optional
        Whether to load the files at instantiation, by default True
    """

    def __init__(
        self,
        ground_truth: Union[str, Path],
        detections: Union[str, Path] = None,
        top_k: int = 100,
        load: bool = True,
    ) -> None:
        self.ground_truth = Path(ground_truth)
        self.detections = Path(detections) if detections else None
        self.top_k = top_k
        self._dataset = None
        if load:
            self._dataset = self.load_dataset()

    def load_dataset(self) -> Dataset:
        """
        Read the ground truth, attach the detections (if any) and keep the
        *self.top_k* highest-scoring detections of every image.

        Returns
        -------
        Dataset
            The loaded dataset
        """
        dataset = load_ground_truth(self.ground_truth)
        if self.detections is None:
            return dataset
        dataset = load_detections(self.detections, dataset)
        if self.top_k is None:
            return dataset
        return top_k_per_image(dataset, self.top_k)

    @property
    def dataset(self) -> Dataset:
        if self._dataset is None:
            self._dataset = self.load_dataset()
        return self._dataset

    @property
    def has_detections(self) -> bool:
        return self.detections is not None
