"""Metric correctness against brute-force per-pixel oracles."""

from fractions import Fraction

import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from ftseg.metrics import (
    ConfusionCounts,
    MetricReport,
    confusion,
    dice,
    evaluate,
    miou,
    per_class_iou,
    pixel_accuracy,
)


# ------------------------------------------------------------- oracles

def brute_force_metrics(pred, gt):
    """Exact rational PA/Dice/mIoU by per-pixel enumeration."""
    tp = fp_ = fn = tn = 0
    for p, g in zip(np.asarray(pred).flat, np.asarray(gt).flat):
        if p and g:
            tp += 1
        elif p and not g:
            fp_ += 1
        elif not p and g:
            fn += 1
        else:
            tn += 1
    total = tp + fp_ + fn + tn
    pa = Fraction(tp + tn, total)
    d = Fraction(1) if 2 * tp + fp_ + fn == 0 else Fraction(2 * tp, 2 * tp + fp_ + fn)
    fg = Fraction(1) if tp + fp_ + fn == 0 else Fraction(tp, tp + fp_ + fn)
    bg = Fraction(1) if tn + fp_ + fn == 0 else Fraction(tn, tn + fp_ + fn)
    return pa, d, (fg + bg) / 2


# ------------------------------------------------------------- examples

def test_confusion_identity():
    c = confusion(np.ones((2, 2), int), np.ones((2, 2), int))
    assert (c.tp, c.fp, c.fn, c.tn) == (4, 0, 0, 0)


def test_confusion_hand_enumerated():
    pred = np.array([[1, 1], [0, 0]])
    gt = np.array([[1, 0], [0, 0]])
    c = confusion(pred, gt)
    assert (c.tp, c.fp, c.fn, c.tn) == (1, 1, 0, 2)


def test_confusion_all_background():
    c = confusion(np.zeros((3, 3), int), np.zeros((3, 3), int))
    assert c.tn == 9 and c.total == 9


def test_confusion_rejects_shape_mismatch():
    with pytest.raises(ValueError):
        confusion(np.zeros((2, 2), int), np.zeros((2, 3), int))


def test_confusion_rejects_nonbinary():
    with pytest.raises(ValueError):
        confusion(np.full((2, 2), 2), np.zeros((2, 2), int))


def test_pixel_accuracy_values():
    assert pixel_accuracy(ConfusionCounts(1, 1, 0, 2)) == 0.75
    assert pixel_accuracy(ConfusionCounts(4, 0, 0, 0)) == 1.0
    assert pixel_accuracy(ConfusionCounts(0, 2, 2, 0)) == 0.0
    with pytest.raises(ValueError):
        pixel_accuracy(ConfusionCounts())


def test_dice_values():
    assert dice(ConfusionCounts(1, 1, 0, 2)) == pytest.approx(2 / 3)
    assert dice(ConfusionCounts(5, 0, 0, 0)) == 1.0
    assert dice(ConfusionCounts(0, 0, 0, 9)) == 1.0  # both empty


def test_miou_values():
    assert miou(ConfusionCounts(1, 1, 0, 2)) == pytest.approx(7 / 12)
    assert miou(ConfusionCounts(3, 0, 0, 5)) == 1.0
    # complement prediction on half/half raster: zero overlap for both classes
    assert miou(ConfusionCounts(0, 2, 2, 0)) == 0.0


def test_dice_symmetry_via_counts():
    c = ConfusionCounts(3, 5, 2, 7)
    swapped = ConfusionCounts(3, 2, 5, 7)  # fp <-> fn, i.e. pred <-> gt
    assert dice(c) == dice(swapped)


# ------------------------------------------------------------ properties

@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**64 - 1))
def test_metrics_match_brute_force(seed):
    rng = np.random.default_rng(seed)
    pred = rng.integers(0, 2, (16, 16))
    gt = rng.integers(0, 2, (16, 16))
    c = confusion(pred, gt)
    pa, d, m = brute_force_metrics(pred, gt)
    assert Fraction(c.tp + c.tn, c.total) == pa
    assert dice(c) == pytest.approx(float(d), abs=1e-12)
    assert miou(c) == pytest.approx(float(m), abs=1e-12)
    for value in (pixel_accuracy(c), dice(c), miou(c)):
        assert 0.0 <= value <= 1.0


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_dice_dominates_foreground_iou(seed):
    rng = np.random.default_rng(seed)
    c = confusion(rng.integers(0, 2, (8, 8)), rng.integers(0, 2, (8, 8)))
    if c.tp + c.fp + c.fn > 0:
        assert dice(c) >= per_class_iou(c)["foreground"]


# ------------------------------------------------------------ evaluate

class _FixedNet(torch.nn.Module):
    """Emits huge logits reproducing a preset mask per image."""

    def __init__(self, masks):
        super().__init__()
        self.masks = masks
        self.calls = 0

    def forward(self, x):
        n = x.shape[0]
        out = []
        for i in range(n):
            m = torch.from_numpy(self.masks[self.calls + i].astype(np.float32))
            out.append(20.0 * (2 * m - 1))
        self.calls += n
        return torch.stack(out).unsqueeze(1)

    def eval(self):
        return self

    def to(self, device):
        return self


def _samples(masks, images=None):
    from ftseg.data_pipeline import Sample
    return [Sample(f"s{i}", (images[i] if images else np.zeros_like(m, np.uint8)), m)
            for i, m in enumerate(masks)]


def test_evaluate_perfect_prediction():
    masks = [np.eye(4, dtype=np.uint8), np.ones((4, 4), np.uint8)]
    report = evaluate(_FixedNet(masks), _samples(masks))
    assert report.pixel_accuracy == 1.0
    assert report.dice == 1.0
    assert report.miou == 1.0
    assert report.n_images == 2


def test_evaluate_single_image_counts():
    gt = np.array([[1, 0], [0, 0]], np.uint8)
    pred = np.array([[1, 1], [0, 0]], np.uint8)
    report = evaluate(_FixedNet([pred]), _samples([gt]))
    assert report.pixel_accuracy == pytest.approx(0.75)
    assert report.dice == pytest.approx(2 / 3)
    assert report.miou == pytest.approx(7 / 12)


def test_micro_vs_macro_differ_on_crafted_pair():
    # image A: tiny foreground predicted perfectly; image B: large miss.
    gt_a = np.zeros((4, 4), np.uint8); gt_a[0, 0] = 1
    pred_a = gt_a.copy()
    gt_b = np.ones((4, 4), np.uint8)
    pred_b = np.zeros((4, 4), np.uint8); pred_b[0, 0] = 1
    micro = evaluate(_FixedNet([pred_a, pred_b]), _samples([gt_a, gt_b]))
    macro = evaluate(_FixedNet([pred_a, pred_b]), _samples([gt_a, gt_b]),
                     averaging="macro")
    # brute-force both conventions
    c_pool = confusion(pred_a, gt_a) + confusion(pred_b, gt_b)
    assert micro.dice == pytest.approx(dice(c_pool))
    expected_macro = (dice(confusion(pred_a, gt_a)) + dice(confusion(pred_b, gt_b))) / 2
    assert macro.dice == pytest.approx(expected_macro)
    assert micro.dice != pytest.approx(macro.dice)
    assert micro.averaging == "micro" and macro.averaging == "macro"


def test_evaluate_empty_dataset_rejected():
    with pytest.raises(ValueError):
        evaluate(_FixedNet([]), [])


def test_report_json_roundtrip():
    report = MetricReport(0.75, 2 / 3, 7 / 12, {"foreground": 0.5, "background": 2 / 3}, 1)
    assert MetricReport.from_json(report.to_json()) == report
    assert set(report.to_json()) == {"pa", "dice", "miou", "per_class_iou",
                                     "n_images", "averaging"}
