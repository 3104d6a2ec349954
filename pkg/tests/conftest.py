import json

import numpy as np
import pytest
from synthetic import single_image_dataset, write_coco


@pytest.fixture
def rng():
    return np.random.default_rng(20231019)


@pytest.fixture
def lrp_example():
    """
    Two objects; one detection overlapping the first with IoU 0.6 and one
    false positive.
    """
    return single_image_dataset(
        gt_boxes=[[0, 0, 10, 10], [100, 100, 110, 110]],
        det_boxes=[[0, 0, 6, 10], [300, 300, 310, 310]],
        scores=[0.9, 0.5],
    )


@pytest.fixture
def lrp_example_files(tmp_path, lrp_example):
    return write_coco(lrp_example, tmp_path)


@pytest.fixture
def ground_truth_file(tmp_path):
    document = {
        "images": [{"id": 1}, {"id": 2}],
        "annotations": [
            {
                "id": 1,
                "image_id": 1,
                "category_id": 1,
                "bbox": [10, 10, 20, 20],
            },
            {"id": 2, "image_id": 2, "category_id": 2, "bbox": [0, 0, 4, 4]},
        ],
        "categories": [{"id": 1, "name": "car"}, {"id": 2, "name": "person"}],
    }
    path = tmp_path / "gt.json"
    path.write_text(json.dumps(document))
    return path


@pytest.fixture
def write_detections(tmp_path):
    def write(records, name="dets.json"):
        path = tmp_path / name
        path.write_text(json.dumps(records))
        return path

    return write
