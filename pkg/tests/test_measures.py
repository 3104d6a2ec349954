import numpy as np
import pytest
from synthetic import (
    categories,
    random_dataset,
    separated_dataset,
    single_image_dataset,
)

from detection_calibration.data.dataset import Dataset
from detection_calibration.matching.matching import match
from detection_calibration.measures.adaptive import la_ace0
from detection_calibration.measures.binned import (
    coco_style_d_ece,
    d_ece,
    la_ece,
    la_ece0,
)
from detection_calibration.measures.kernel import (
    kernel_ce,
    kernel_ce_per_class,
)
from detection_calibration.measures.reliability import (
    reliability_data,
    save_reliability_data,
)

GT = [[0, 0, 10, 10]]
FAR = [[300, 300, 310, 310]]


def evaluate(measure, dataset, tau, **kwargs):
    return measure(dataset, match(dataset, tau), **kwargs).value


def rescored(dataset, tau, rule):
    """
    Replace every score by ``rule(matches)`` and re-match the dataset.
    """
    scores = rule(match(dataset, tau))
    dataset = dataset.with_scores(scores)
    return dataset, match(dataset, tau)


def test_d_ece_examples():
    tp = single_image_dataset(GT, det_boxes=GT, scores=[1.0])
    fp = single_image_dataset(GT, det_boxes=FAR, scores=[0.7])
    both = single_image_dataset(GT, det_boxes=GT + FAR, scores=[0.9, 0.7])
    assert evaluate(d_ece, tp, 0.5) == 0
    assert evaluate(d_ece, fp, 0.5, bins=10) == pytest.approx(0.7, abs=1e-12)
    assert evaluate(d_ece, both, 0.5, bins=2) == pytest.approx(0.3, abs=1e-12)


def test_la_ece_examples():
    tp = single_image_dataset(GT, det_boxes=[[0, 0, 8, 10]], scores=[0.8])
    fp = single_image_dataset(GT, det_boxes=FAR, scores=[0.6])
    both = single_image_dataset(
        GT, det_boxes=[[0, 0, 5, 10]] + FAR, scores=[1.0, 1.0]
    )
    assert evaluate(la_ece, tp, 0.5) == pytest.approx(0, abs=1e-12)
    assert evaluate(la_ece, fp, 0.5) == pytest.approx(0.6, abs=1e-12)
    assert evaluate(la_ece, both, 0.5) == pytest.approx(0.75, abs=1e-12)


@pytest.fixture
def cancelling_pair():
    """
    Confidences 0.8 and 0.6 on detections with IoUs 0.6 and 0.8.
    """
    return single_image_dataset(
        [[0, 0, 10, 10], [100, 0, 110, 10]],
        det_boxes=[[0, 0, 6, 10], [100, 0, 108, 10]],
        scores=[0.8, 0.6],
    )


def test_la_ece0_examples(cancelling_pair):
    single = single_image_dataset(
        GT, det_boxes=[[0, 0, 6, 10]], scores=[0.9]
    )
    assert evaluate(la_ece0, single, 0.0) == pytest.approx(0.3, abs=1e-12)
    assert evaluate(la_ece0, cancelling_pair, 0.0, bins=1) == pytest.approx(
        0, abs=1e-12
    )


def test_la_ace0_examples(cancelling_pair):
    fp = single_image_dataset(GT, det_boxes=FAR, scores=[0.4])
    assert evaluate(la_ace0, fp, 0.0) == pytest.approx(0.4, abs=1e-12)
    assert evaluate(la_ace0, cancelling_pair, 0.0) == pytest.approx(
        0.2, abs=1e-12
    )


def test_tau_requirements(lrp_example):
    with pytest.raises(ValueError):
        d_ece(lrp_example, match(lrp_example, 0.0))
    with pytest.raises(ValueError):
        la_ece(lrp_example, match(lrp_example, 0.0))
    with pytest.raises(ValueError):
        la_ece0(lrp_example, match(lrp_example, 0.5))
    with pytest.raises(ValueError):
        la_ace0(lrp_example, match(lrp_example, 0.5))


def test_no_detections():
    dataset = single_image_dataset(GT)
    with pytest.raises(ValueError, match="no detections"):
        d_ece(dataset, match(dataset, 0.5))
    with pytest.raises(ValueError, match="no detections"):
        la_ece0(dataset, match(dataset, 0.0))


def test_per_class_covers_classes_with_detections(rng):
    dataset = separated_dataset(rng, n_classes=4, n_images=2)
    report = la_ece0(dataset, match(dataset, 0.0))
    assert sorted(report.per_class) == sorted(
        np.unique(dataset.det_category_ids).tolist()
    )
    assert report.value == pytest.approx(
        np.mean(list(report.per_class.values())), abs=1e-12
    )


def test_coco_style_d_ece_ignores_confidence():
    for step in range(11):
        dataset = single_image_dataset(
            GT, det_boxes=[[0, 0, 6, 10]], scores=[step / 10]
        )
        value = coco_style_d_ece(dataset, [0.5, 0.75]).value
        assert value == pytest.approx(0.5, abs=1e-12)


def test_coco_style_d_ece_with_a_tp_under_every_tau():
    dataset = single_image_dataset(
        GT, det_boxes=[[0, 0, 9, 10]], scores=[1.0]
    )
    assert coco_style_d_ece(dataset, [0.5, 0.75]).value == 0


def test_coco_style_d_ece_rejects_empty_tau_set(lrp_example):
    with pytest.raises(ValueError):
        coco_style_d_ece(lrp_example, [])


def test_lone_detection_error_curves():
    for step in range(11):
        confidence = step / 10
        tp = single_image_dataset(
            GT, det_boxes=[[0, 0, 7, 10]], scores=[confidence]
        )
        fp = single_image_dataset(GT, det_boxes=FAR, scores=[confidence])
        assert evaluate(la_ece0, tp, 0.0) == pytest.approx(
            abs(confidence - 0.7), abs=1e-12
        )
        assert evaluate(la_ece0, fp, 0.0) == pytest.approx(
            confidence, abs=1e-12
        )


def test_la_ace0_bounds_la_ece0(rng):
    for _ in range(1000):
        dataset = random_dataset(rng)
        matches = match(dataset, 0.0)
        binned = la_ece0(dataset, matches).value
        assert la_ace0(dataset, matches).value >= binned - 1e-12


def test_one_detection_per_bin_equals_la_ace0(rng):
    for _ in range(20):
        dataset = separated_dataset(
            rng,
            n_images=int(rng.integers(2, 20)),
            fps_per_image=int(rng.integers(0, 3)),
            missed=0.2,
        )
        grid = rng.permutation(1024)[: dataset.num_detections] / 1024
        dataset = dataset.with_scores(grid)
        matches = match(dataset, 0.0)
        binned = la_ece0(dataset, matches, bins=1024).value
        assert binned == pytest.approx(
            la_ace0(dataset, matches).value, abs=1e-12
        )


def test_iou_confidences_minimize_localisation_aware_errors(rng):
    for _ in range(100):
        dataset = separated_dataset(
            rng,
            n_images=int(rng.integers(1, 10)),
            n_classes=int(rng.integers(1, 5)),
            fps_per_image=int(rng.integers(0, 3)),
            missed=float(rng.uniform(0, 0.5)),
        )
        if not dataset.num_detections:
            continue
        dataset, matches = rescored(
            dataset, 0.0, lambda m: np.where(m.is_tp, m.iou, 0.0)
        )
        assert la_ece0(dataset, matches).value == 0
        assert la_ace0(dataset, matches).value == 0


def test_binary_confidences_minimize_d_ece(rng):
    for _ in range(100):
        dataset = separated_dataset(
            rng,
            n_images=int(rng.integers(1, 10)),
            fps_per_image=int(rng.integers(0, 3)),
            missed=float(rng.uniform(0, 0.5)),
        )
        if not dataset.num_detections:
            continue
        tau = float(rng.choice([0.1, 0.5, 0.75]))
        dataset, matches = rescored(
            dataset, tau, lambda m: m.is_tp.astype(float)
        )
        for bins in (1, 10, 25):
            assert d_ece(dataset, matches, bins).value == 0


def test_bin_targets_minimize_la_ece(rng):
    dataset = separated_dataset(rng, fps_per_image=2, n_classes=3)

    def class_target(matches):
        scores = np.zeros(len(matches.iou))
        for category_id in np.unique(matches.det_category_ids):
            mask = matches.det_category_ids == category_id
            ious = np.where(matches.is_tp, matches.iou, 0.0)[mask]
            scores[mask] = ious.mean()
        return scores

    dataset, matches = rescored(dataset, 0.5, class_target)
    assert la_ece(dataset, matches).value == pytest.approx(0, abs=1e-12)


def test_d_ece_weighted_gaps_equal_the_bin_reduction(rng):
    for _ in range(500):
        dataset = random_dataset(rng, max_detections=100, max_images=4)
        matches = match(dataset, 0.5)
        report = d_ece(dataset, matches, bins=10)
        n = dataset.num_detections
        weighted = sum(
            b.count / n * abs(b.mean_confidence - b.precision)
            for b in report.bins
        )
        index = np.minimum((dataset.det_scores * 10).astype(int), 9)
        reduced = 0.0
        for j in range(10):
            in_bin = index == j
            tp = in_bin & matches.is_tp
            fp = in_bin & ~matches.is_tp
            reduced += abs(
                (dataset.det_scores[tp] - 1).sum()
                + dataset.det_scores[fp].sum()
            )
        assert report.value == pytest.approx(weighted, abs=1e-12)
        assert report.value == pytest.approx(reduced / n, abs=1e-12)


def test_measures_ignore_input_order(rng):
    dataset = random_dataset(rng)
    order = rng.permutation(dataset.num_detections)
    shuffled = Dataset(
        dataset.categories,
        dataset.image_ids,
        dataset.gt_image_ids,
        dataset.gt_category_ids,
        dataset.gt_boxes,
        dataset.det_image_ids[order],
        dataset.det_category_ids[order],
        dataset.det_boxes[order],
        dataset.det_scores[order],
    )
    for measure, tau in ((d_ece, 0.5), (la_ece, 0.5), (la_ece0, 0.0)):
        assert evaluate(measure, dataset, tau) == evaluate(
            measure, shuffled, tau
        )
    assert evaluate(la_ace0, dataset, 0.0) == evaluate(la_ace0, shuffled, 0.0)


def test_kernel_ce_constant_confidences():
    dataset = single_image_dataset(
        [[0, 0, 10, 10], [100, 0, 110, 10], [200, 0, 210, 10]],
        det_boxes=[[0, 0, 6, 10], [100, 0, 106, 10], [200, 0, 206, 10]],
        scores=[0.6, 0.6, 0.6],
    )
    assert kernel_ce(dataset, match(dataset, 0.0)) == pytest.approx(
        0, abs=1e-12
    )


def test_kernel_ce_two_detections():
    dataset = single_image_dataset(
        [[0, 0, 10, 10], [100, 0, 110, 10]],
        det_boxes=[[0, 0, 4, 10], [100, 0, 106, 10]],
        scores=[0.5, 0.5],
    )
    assert kernel_ce(dataset, match(dataset, 0.0)) == pytest.approx(
        0.1, abs=1e-12
    )


def test_kernel_ce_wide_bandwidth_pools_all_detections(rng):
    dataset = separated_dataset(rng, fps_per_image=1, n_classes=2)
    matches = match(dataset, 0.0)
    per_class = kernel_ce_per_class(dataset, matches, bandwidth=1e6)
    ious = np.where(matches.is_tp, matches.iou, 0.0)
    for category_id, value in per_class.items():
        mask = dataset.det_category_ids == category_id
        scores, targets = dataset.det_scores[mask], ious[mask]
        others = (targets.sum() - targets) / (len(targets) - 1)
        expected = np.abs(scores - others).mean()
        assert value == pytest.approx(expected, abs=1e-9)


def test_kernel_ce_skips_single_detection_classes():
    dataset = Dataset(
        categories(2),
        [1],
        gt_image_ids=[1],
        gt_category_ids=[1],
        gt_boxes=np.array(GT, dtype=float),
        det_image_ids=[1, 1, 1],
        det_category_ids=[1, 1, 2],
        det_boxes=np.array(
            [[0, 0, 4, 10], [100, 0, 106, 10], [0, 0, 10, 10]]
        ),
        det_scores=[0.5, 0.5, 0.9],
    )
    with pytest.warns(UserWarning, match="single detection"):
        per_class = kernel_ce_per_class(dataset, match(dataset, 0.0))
    assert list(per_class) == [1]


def test_kernel_ce_arguments(lrp_example):
    matches = match(lrp_example, 0.0)
    with pytest.raises(ValueError):
        kernel_ce(lrp_example, matches, link="precision")
    with pytest.raises(ValueError):
        kernel_ce(lrp_example, matches, bandwidth=0)


def test_reliability_rows(rng):
    dataset = separated_dataset(rng, fps_per_image=1)
    matches = match(dataset, 0.0)
    report = la_ece0(dataset, matches, bins=25)
    table = reliability_data(report)
    assert list(table.columns) == [
        "bin_low",
        "bin_high",
        "count",
        "mean_conf",
        "target",
    ]
    index = np.minimum((dataset.det_scores * 25).astype(int), 24)
    ious = np.where(matches.is_tp, matches.iou, 0.0)
    assert len(table) == len(np.unique(index))
    for row in table.to_dict("records"):
        in_bin = index == round(row["bin_low"] * 25)
        assert row["count"] == in_bin.sum()
        assert row["target"] == pytest.approx(ious[in_bin].mean(), abs=1e-12)
        assert row["mean_conf"] == pytest.approx(
            dataset.det_scores[in_bin].mean(), abs=1e-12
        )


def test_reliability_single_bin(tmp_path):
    dataset = single_image_dataset(
        GT, det_boxes=[[0, 0, 6, 10]] + FAR, scores=[0.51, 0.55]
    )
    report = la_ece0(dataset, match(dataset, 0.0), bins=10)
    table = reliability_data(report)
    assert len(table) == 1
    assert table["target"].iloc[0] == pytest.approx(0.3, abs=1e-12)
    path = save_reliability_data(report, tmp_path / "reliability.csv")
    assert path.read_text().splitlines()[0] == (
        "bin_low,bin_high,count,mean_conf,target"
    )
    with pytest.raises(ValueError):
        reliability_data(report, category_id=7)
