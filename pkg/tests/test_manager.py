import math
import time

import numpy as np
import pytest
from synthetic import random_dataset, separated_dataset, write_coco

from detection_calibration.manager import EvaluationManager
from detection_calibration.matching.matching import EvalConfig
from detection_calibration.utils.data_grabber import DataGrabber


@pytest.fixture
def lrp_manager(lrp_example_files):
    return EvaluationManager(*lrp_example_files)


def manager_for(dataset, directory, **config):
    gt, dets = write_coco(dataset, directory)
    return EvaluationManager(gt, dets, EvalConfig(**config))


def test_instantiation_requires_inputs():
    with pytest.raises(ValueError):
        EvaluationManager()


def test_ground_truth_only(ground_truth_file):
    with pytest.warns(UserWarning):
        manager = EvaluationManager(ground_truth_file)
    report = manager.evaluate()
    assert report["lrp"]["value"] == 1
    assert report["ap"] == 0
    assert report["olrp"] == 1
    for measure in EvaluationManager.MEASURES:
        assert report[measure] is None
        assert "no detections" in report["reasons"][measure]


def test_evaluate_lrp_example(lrp_manager):
    report = lrp_manager.evaluate()
    assert report["lrp"]["value"] == pytest.approx(0.8, abs=1e-12)
    assert report["lrp"]["loc"] == pytest.approx(0.4, abs=1e-12)
    assert (report["lrp"]["n_tp"], report["lrp"]["n_fp"]) == (1, 1)
    assert report["ap"] == pytest.approx(51 / 101, abs=1e-12)
    # dropping the false positive is optimal
    assert report["olrp"] == pytest.approx(0.7, abs=1e-12)
    assert report["per_class"]["1"]["olrp"] == pytest.approx(0.7, abs=1e-12)
    assert report["d_ece"] == pytest.approx(0.3, abs=1e-12)
    assert report["la_ece"] == pytest.approx(0.4, abs=1e-12)
    assert report["la_ece0"] == pytest.approx(0.4, abs=1e-12)
    assert report["reasons"] == {}
    assert report["config"]["tau"] == 0.0
    assert set(report["per_class"]["1"]) >= {"lrp", "ap", "la_ece0"}


def test_evaluate_with_thresholds(lrp_manager):
    report = lrp_manager.evaluate(thresholds={1: 0.7})
    assert report["lrp"]["value"] == pytest.approx(0.7, abs=1e-12)
    assert report["lrp"]["n_fp"] == 0


def test_evaluate_kernel(lrp_manager):
    report = lrp_manager.evaluate(kernel=True)
    assert 0 <= report["kernel_ce"] <= 1
    assert "kernel_ce" in report["per_class"]["1"]


def test_evaluate_coco_style_d_ece(lrp_manager):
    # the IoU 0.6 detection is a TP for 3 of the 10 thresholds
    report = lrp_manager.evaluate(coco=True)
    assert report["coco_d_ece"] == pytest.approx(0.58, abs=1e-12)
    assert report["per_class"]["1"]["coco_d_ece"] == pytest.approx(
        0.58, abs=1e-12
    )


def test_perfect_detections(rng, tmp_path):
    dataset = separated_dataset(rng, exact=True, tp_scores=(1.0, 1.0))
    report = manager_for(dataset, tmp_path).evaluate()
    assert report["lrp"]["value"] == 0
    assert report["ap"] == 1
    for measure in EvaluationManager.MEASURES:
        assert report[measure] == 0


def test_per_class_table(lrp_manager):
    table = lrp_manager.per_class_table(lrp_manager.evaluate())
    assert table["category_id"].tolist() == ["1"]
    assert table.loc[0, "lrp"] == pytest.approx(0.8, abs=1e-12)


def test_optimal_thresholds(lrp_manager):
    # dropping the false positive lowers LRP from 0.8 to 0.7
    assert lrp_manager.optimal_thresholds() == {1: 0.9}


def test_sweep_lrp_example(lrp_manager):
    table = lrp_manager.sweep(0.5)
    assert table.columns.tolist() == EvaluationManager.SWEEP_COLUMNS
    assert table["threshold"].tolist() == [0.0, 0.5, 1.0]
    assert table["lrp"].tolist()[:2] == pytest.approx([0.8, 0.8], abs=1e-12)
    assert table["lrp"].tolist()[2] == 1
    assert table["ap"].tolist()[2] == 0
    assert math.isnan(table["la_ece0"].tolist()[2])


def test_sweep_step(lrp_manager):
    assert len(lrp_manager.sweep(0.05)) == 21
    assert len(lrp_manager.sweep(1.0)) == 2
    grid = lrp_manager.sweep(0.3)["threshold"].tolist()
    assert grid == pytest.approx([0.0, 0.3, 0.6, 0.9, 1.0], abs=1e-12)
    assert grid[-1] == 1.0
    for step in (0.0, 1.5):
        with pytest.raises(ValueError):
            lrp_manager.sweep(step)


def test_sweep_perfect_detector(rng, tmp_path):
    dataset = separated_dataset(
        rng, n_classes=1, exact=True, tp_scores=(0.2, 0.95)
    )
    table = manager_for(dataset, tmp_path).sweep(0.1)
    lrp = table["lrp"].to_numpy()
    assert lrp[0] == 0
    assert lrp[-1] == 1
    assert np.all(np.diff(lrp) >= 0)
    assert lrp[3] > 0


def test_sweep_shapes(rng, tmp_path):
    dataset = separated_dataset(
        rng,
        n_images=30,
        n_classes=2,
        fps_per_image=3,
        exact=True,
        tp_scores=(0.55, 0.95),
        fp_scores=(0.05, 0.45),
    )
    table = manager_for(dataset, tmp_path).sweep(0.05)
    lrp = table.set_index("threshold")["lrp"]
    assert lrp[0.5] == 0
    assert lrp[0.0] > lrp[0.5]
    assert lrp[1.0] > lrp[0.5]
    assert np.all(np.diff(table["ap"].to_numpy()) <= 1e-12)


def test_ap_nonincreasing_over_random_sweeps(rng, tmp_path):
    for index in range(10):
        dataset = random_dataset(rng, max_classes=5, max_detections=100)
        directory = tmp_path / str(index)
        directory.mkdir()
        ap = manager_for(dataset, directory).sweep(0.05)["ap"].to_numpy()
        # undefined throughout without objects
        ap = ap[~np.isnan(ap)]
        assert np.all(np.diff(ap) <= 1e-12)


def test_reliability(lrp_manager):
    rows = lrp_manager.reliability()
    assert rows["count"].tolist() == [1, 1]
    assert rows["target"].tolist() == pytest.approx([0.0, 0.6], abs=1e-12)
    assert len(lrp_manager.reliability("d_ece", category_id=1)) == 2
    with pytest.raises(ValueError):
        lrp_manager.reliability("la_ace0")


def test_fit_and_apply_pipeline(rng, tmp_path):
    dataset = separated_dataset(rng, n_images=20, fps_per_image=2)
    manager = manager_for(dataset, tmp_path)
    val, test = manager.split(0.5, seed=3)
    pipeline = manager.fit_pipeline(calibrator="ts", dataset=val)
    calibrated = manager.apply_pipeline(pipeline, test)
    assert calibrated.num_detections <= test.num_detections
    assert set(calibrated.det_category_ids.tolist()) <= set(
        pipeline.classes
    )


def test_shared_data_grabber(lrp_example_files):
    data_grabber = DataGrabber(*lrp_example_files)
    manager = EvaluationManager(data_grabber=data_grabber)
    assert manager.dataset is data_grabber.dataset


@pytest.mark.performance
def test_full_evaluation_runtime(rng, tmp_path):
    dataset = separated_dataset(
        rng,
        n_images=1000,
        objects_per_image=8,
        n_classes=20,
        fps_per_image=2,
    )
    assert dataset.num_detections == 10_000
    manager = manager_for(dataset, tmp_path)
    timings = []
    for _ in range(3):
        start = time.perf_counter()
        manager.evaluate()
        timings.append(time.perf_counter() - start)
    assert min(timings) < 1.0
