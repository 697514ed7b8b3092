"""Pixel accuracy, Dice, and mean IoU over binary segmentations.

All three reduce to one ConfusionCounts. Default evaluation pools counts
over the whole test set (micro-averaging); per-image macro-averaging is
also available and the report records which mode produced it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import torch

from .data_pipeline import NormalizationMode, normalize


@dataclass
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp,
                               self.fn + other.fn, self.tn + other.tn)


@dataclass
class MetricReport:
    pixel_accuracy: float
    dice: float
    miou: float
    per_class_iou: dict
    n_images: int
    averaging: str = "micro"

    def to_json(self) -> dict:
        return {
            "pa": self.pixel_accuracy,
            "dice": self.dice,
            "miou": self.miou,
            "per_class_iou": self.per_class_iou,
            "n_images": self.n_images,
            "averaging": self.averaging,
        }

    @classmethod
    def from_json(cls, data: dict) -> "MetricReport":
        return cls(data["pa"], data["dice"], data["miou"], data["per_class_iou"],
                   data["n_images"], data.get("averaging", "micro"))


def confusion(pred: np.ndarray, gt: np.ndarray) -> ConfusionCounts:
    pred = np.asarray(pred)
    gt = np.asarray(gt)
    if pred.shape != gt.shape:
        raise ValueError(f"shape mismatch: pred {pred.shape}, gt {gt.shape}")
    for name, arr in (("pred", pred), ("gt", gt)):
        if not np.isin(arr, (0, 1)).all():
            raise ValueError(f"{name} raster is not binary")
    pred = pred.astype(bool)
    gt = gt.astype(bool)
    return ConfusionCounts(
        tp=int((pred & gt).sum()),
        fp=int((pred & ~gt).sum()),
        fn=int((~pred & gt).sum()),
        tn=int((~pred & ~gt).sum()),
    )


def pixel_accuracy(c: ConfusionCounts) -> float:
    if c.total == 0:
        raise ValueError("empty confusion counts")
    return (c.tp + c.tn) / c.total


def dice(c: ConfusionCounts) -> float:
    denom = 2 * c.tp + c.fp + c.fn
    if denom == 0:
        return 1.0  # both masks empty: perfect agreement
    return 2 * c.tp / denom


def miou(c: ConfusionCounts) -> float:
    return float(np.mean(list(per_class_iou(c).values())))


def per_class_iou(c: ConfusionCounts) -> dict:
    fg_denom = c.tp + c.fp + c.fn
    bg_denom = c.tn + c.fp + c.fn
    return {
        "foreground": c.tp / fg_denom if fg_denom else 1.0,
        "background": c.tn / bg_denom if bg_denom else 1.0,
    }


def _report_from_counts(c: ConfusionCounts, n_images: int) -> MetricReport:
    return MetricReport(pixel_accuracy(c), dice(c), miou(c), per_class_iou(c),
                        n_images, averaging="micro")


def predict_masks(net, samples, threshold: float = 0.5,
                  normalization: NormalizationMode = NormalizationMode.UNIT_RANGE,
                  batch_size: int = 10, device: str = "cpu"):
    """Binarized sigmoid predictions for a list of samples."""
    net = net.to(device).eval()
    masks = []
    with torch.no_grad():
        for start in range(0, len(samples), batch_size):
            chunk = samples[start:start + batch_size]
            batch = torch.from_numpy(
                np.stack([normalize(s.image, normalization) for s in chunk])
            ).to(device)
            probs = torch.sigmoid(net(batch))[:, 0]
            masks.extend((probs > threshold).cpu().numpy().astype(np.uint8))
    return masks


def evaluate(net, samples, threshold: float = 0.5,
             normalization: NormalizationMode = NormalizationMode.UNIT_RANGE,
             batch_size: int = 10, device: str = "cpu",
             averaging: str = "micro") -> MetricReport:
    if not samples:
        raise ValueError("cannot evaluate on an empty dataset")
    preds = predict_masks(net, samples, threshold, normalization, batch_size, device)
    counts = [confusion(p, s.mask) for p, s in zip(preds, samples)]
    if averaging == "micro":
        pooled = ConfusionCounts()
        for c in counts:
            pooled = pooled + c
        return _report_from_counts(pooled, len(samples))
    if averaging == "macro":
        reports = [_report_from_counts(c, 1) for c in counts]
        return MetricReport(
            float(np.mean([r.pixel_accuracy for r in reports])),
            float(np.mean([r.dice for r in reports])),
            float(np.mean([r.miou for r in reports])),
            {
                key: float(np.mean([r.per_class_iou[key] for r in reports]))
                for key in ("foreground", "background")
            },
            len(samples),
            averaging="macro",
        )
    raise ValueError(f"unknown averaging mode {averaging!r}")


def save_report(report: MetricReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_json(), fh, indent=2)
