"""HC18-layout dataset ingestion.

Directory layout: `<root>/training_set/<id>.png` plus
`<root>/training_set/<id>_Annotation.png`. Annotations are closed head
contours (1-pixel ellipse traces); they are converted to filled region
masks on load. Phantom datasets persist to the same layout, so everything
downstream is source-agnostic.
"""

from __future__ import annotations

import os

import cv2
import numpy as np
from scipy import ndimage

from .sample import Sample

ANNOTATION_SUFFIX = "_Annotation"

# 4-connected exterior fill: an 8-connected 1-pixel contour is watertight.
_CROSS = ndimage.generate_binary_structure(2, 1)


class IngestError(ValueError):
    pass


class FillError(ValueError):
    pass


def fill_annotation(contour: np.ndarray) -> np.ndarray:
    """Fill a closed contour: exterior flood fill from the border, complemented.

    Retries once after a 3x3 dilation when the fill leaks through a gap;
    still-open contours raise FillError. Idempotent on already-filled regions.
    """
    contour = (np.asarray(contour) > 0).astype(np.uint8)
    if contour.sum() == 0:
        raise FillError("annotation raster is empty; nothing to fill")
    already_solid = _is_solid(contour)
    for attempt in range(2):
        mask = _exterior_fill(contour)
        interior = mask & ~contour.astype(bool)
        if interior.any() or (attempt == 0 and already_solid):
            return mask.astype(np.uint8)
        contour = ndimage.binary_dilation(contour, structure=_CROSS).astype(np.uint8)
    raise FillError("open contour: exterior flood fill leaked into the interior")


def _exterior_fill(contour: np.ndarray) -> np.ndarray:
    background = contour == 0
    labels, _ = ndimage.label(background, structure=_CROSS)
    border_labels = np.unique(
        np.concatenate([labels[0], labels[-1], labels[:, 0], labels[:, -1]])
    )
    exterior = np.isin(labels, border_labels[border_labels != 0])
    return ~exterior


def _is_solid(contour: np.ndarray) -> bool:
    # A filled disk has no enclosed background, yet is already a valid mask.
    eroded = ndimage.binary_erosion(contour, structure=_CROSS)
    return bool(eroded.any())


def load_hc18(root_dir) -> list:
    """Load all image/annotation pairs under `<root>/training_set/`."""
    directory = os.path.join(root_dir, "training_set")
    if not os.path.isdir(directory):
        raise IngestError(f"no training_set directory under {root_dir}")
    names = sorted(os.listdir(directory))
    images = [n for n in names if n.endswith(".png") and ANNOTATION_SUFFIX not in n]
    annotations = {n for n in names if n.endswith(f"{ANNOTATION_SUFFIX}.png")}
    if not images:
        raise IngestError(f"no images found in {directory}")
    orphans = []
    samples = []
    for name in images:
        sample_id = name[: -len(".png")]
        ann_name = f"{sample_id}{ANNOTATION_SUFFIX}.png"
        if ann_name not in annotations:
            orphans.append(sample_id)
            continue
        image = cv2.imread(os.path.join(directory, name), cv2.IMREAD_GRAYSCALE)
        contour = cv2.imread(os.path.join(directory, ann_name), cv2.IMREAD_GRAYSCALE)
        if image is None or contour is None:
            raise IngestError(f"unreadable image pair for id {sample_id}")
        samples.append(Sample(sample_id, image, fill_annotation(contour)).validate())
    if orphans:
        raise IngestError(f"missing annotations for ids: {', '.join(orphans)}")
    return samples


def save_dataset(samples, root_dir, annotation="mask") -> None:
    """Persist samples in the HC18 layout.

    `annotation="mask"` stores filled masks (fill is idempotent on them);
    `annotation="contour"` stores 1-pixel outlines as HC18 itself does.
    """
    directory = os.path.join(root_dir, "training_set")
    os.makedirs(directory, exist_ok=True)
    for sample in samples:
        cv2.imwrite(os.path.join(directory, f"{sample.id}.png"), sample.image)
        if annotation == "contour":
            contours, _ = cv2.findContours(
                sample.mask.astype(np.uint8), cv2.RETR_EXTERNAL, cv2.CHAIN_APPROX_NONE
            )
            ann = np.zeros_like(sample.mask)
            cv2.drawContours(ann, contours, -1, 1, thickness=1)
        else:
            ann = sample.mask
        cv2.imwrite(
            os.path.join(directory, f"{sample.id}{ANNOTATION_SUFFIX}.png"),
            (ann * 255).astype(np.uint8),
        )
