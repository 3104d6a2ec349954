import json

import numpy as np
import pytest
from synthetic import random_dataset, single_image_dataset

from detection_calibration.matching.matching import (
    EvalConfig,
    match,
    match_many,
)
from detection_calibration.utils.exceptions import DatasetValidationError


def test_exact_detection_matches():
    dataset = single_image_dataset(
        gt_boxes=[[0, 0, 10, 10]], det_boxes=[[0, 0, 10, 10]], scores=[0.7]
    )
    matches = match(dataset, 0.5)
    assert matches.assignment.tolist() == [0]
    assert matches.iou.tolist() == [1.0]


def test_tau_decides_low_overlap():
    dataset = single_image_dataset(
        gt_boxes=[[0, 0, 10, 10]], det_boxes=[[0, 0, 10, 4.8]], scores=[0.7]
    )
    strict = match(dataset, 0.5)
    assert strict.assignment.tolist() == [-1]
    assert strict.iou.tolist() == [0.0]
    loose = match(dataset, 0.0)
    assert loose.assignment.tolist() == [0]
    assert loose.iou[0] == pytest.approx(0.48, abs=1e-12)


def test_zero_overlap_is_a_false_positive_at_tau_zero():
    dataset = single_image_dataset(
        gt_boxes=[[0, 0, 10, 10]], det_boxes=[[10, 0, 20, 10]], scores=[0.7]
    )
    assert match(dataset, 0.0).assignment.tolist() == [-1]


def test_higher_score_takes_the_object():
    dataset = single_image_dataset(
        gt_boxes=[[0, 0, 10, 10]],
        det_boxes=[[0, 0, 6, 10], [0, 0, 9, 10]],
        scores=[0.9, 0.8],
    )
    matches = match(dataset, 0.5)
    assert matches.assignment.tolist() == [0, -1]
    assert matches.iou[0] == pytest.approx(0.6, abs=1e-12)


def test_matching_is_class_aware():
    dataset = single_image_dataset(
        gt_boxes=[[0, 0, 10, 10]],
        det_boxes=[[0, 0, 10, 10]],
        scores=[0.9],
        det_classes=[2],
        n_classes=2,
    )
    assert match(dataset, 0.0).assignment.tolist() == [-1]


def test_best_overlap_wins():
    dataset = single_image_dataset(
        gt_boxes=[[0, 0, 10, 10], [2, 0, 12, 10]],
        det_boxes=[[2, 0, 12, 10]],
        scores=[0.9],
    )
    assert match(dataset, 0.1).assignment.tolist() == [1]


def test_invalid_tau():
    dataset = single_image_dataset(gt_boxes=[[0, 0, 1, 1]])
    for tau in (-0.1, 1.0):
        with pytest.raises(ValueError):
            match(dataset, tau)


def greedy_oracle(dataset, tau):
    """
    Plain-Python greedy matching over Detection and GroundTruthObject
    records.
    """
    from detection_calibration.data.geometry import iou

    threshold = tau if tau > 0 else 1e-10
    objects = dataset.ground_truth
    taken = set()
    assignment = []
    for detection in dataset.detections:
        best, best_iou = -1, -1.0
        for index, obj in enumerate(objects):
            if (
                index in taken
                or obj.image_id != detection.image_id
                or obj.category_id != detection.category_id
            ):
                continue
            value = iou(detection.box, obj.box)
            if value > best_iou:
                best, best_iou = index, value
        if best >= 0 and best_iou >= threshold:
            taken.add(best)
            assignment.append(best)
        else:
            assignment.append(-1)
    return assignment


def test_properties_on_random_datasets(rng):
    for _ in range(30):
        dataset = random_dataset(rng, max_detections=60)
        previous_tp = None
        for matches in match_many(dataset, [0.0, 0.3, 0.5, 0.75, 0.95]):
            matched = matches.assignment[matches.is_tp]
            assert len(np.unique(matched)) == len(matched)
            floor = max(matches.tau, 1e-10)
            assert (matches.iou[matches.is_tp] >= floor).all()
            assert (matches.iou[~matches.is_tp] == 0).all()
            n_tp = int(matches.is_tp.sum())
            if previous_tp is not None:
                assert n_tp <= previous_tp
            previous_tp = n_tp
            for category_id in dataset.category_ids.tolist():
                counts = matches.counts(category_id)
                n_detections = int(
                    (dataset.det_category_ids == category_id).sum()
                )
                n_objects = int(
                    (dataset.gt_category_ids == category_id).sum()
                )
                assert counts["tp"] + counts["fp"] == n_detections
                assert counts["tp"] + counts["fn"] == n_objects
        assert match(dataset, 0.5).assignment.tolist() == greedy_oracle(
            dataset, 0.5
        )


def test_matching_is_deterministic(rng):
    dataset = random_dataset(rng)
    first, second = match(dataset, 0.0), match(dataset, 0.0)
    assert np.array_equal(first.assignment, second.assignment)
    assert np.array_equal(first.iou, second.iou)


def test_select_keeps_a_score_prefix(rng):
    dataset = random_dataset(rng)
    matches = match(dataset, 0.5)
    keep = dataset.det_scores >= 0.5
    assert np.array_equal(
        matches.select(keep).assignment,
        match(dataset.filter_detections(keep), 0.5).assignment,
    )


def test_config_defaults():
    config = EvalConfig.from_file()
    assert config.tau == 0.0
    assert config.bins == 25
    assert config.top_k == 100
    assert config.dece_bins == 10


def test_config_file_and_overrides(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"bins": 10, "top_k": 50}))
    config = EvalConfig.from_file(path, top_k=None, tau=0.1)
    assert (config.bins, config.top_k, config.tau) == (10, 50, 0.1)


def test_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"binz": 10}))
    with pytest.raises(DatasetValidationError, match="binz"):
        EvalConfig.from_file(path)


def test_config_validation():
    with pytest.raises(ValueError):
        EvalConfig(tau=1.0)
    with pytest.raises(ValueError):
        EvalConfig(bins=0)
    with pytest.raises(ValueError):
        EvalConfig(top_k=0)
