"""Split, resize, augmentation, and normalization.

Every geometric transform is applied identically to image (bilinear) and
mask (nearest-neighbor), so masks stay binary. Augmentation randomness is
keyed by (seed, sample id, epoch), never by execution order.
"""

from __future__ import annotations

import dataclasses
import hashlib

import cv2
import numpy as np

from .sample import (
    IMAGENET_MEAN,
    IMAGENET_STD,
    AugmentationConfig,
    NormalizationMode,
    Sample,
    SplitConfig,
    SplitTag,
)


def split(samples, cfg: SplitConfig):
    """Seeded uniform shuffle; first train_count samples train, rest test."""
    if len(samples) != cfg.total:
        raise ValueError(f"expected {cfg.total} samples, got {len(samples)}")
    order = np.random.default_rng(cfg.seed).permutation(len(samples))
    train = [dataclasses.replace(samples[i], split_tag=SplitTag.TRAIN)
             for i in order[: cfg.train_count]]
    test = [dataclasses.replace(samples[i], split_tag=SplitTag.TEST)
            for i in order[cfg.train_count:]]
    return train, test


def resize(sample: Sample, target: int = 512) -> Sample:
    if target % 32 != 0:
        raise ValueError(f"target size {target} not divisible by 32")
    image = cv2.resize(sample.image, (target, target), interpolation=cv2.INTER_LINEAR)
    mask = cv2.resize(sample.mask, (target, target), interpolation=cv2.INTER_NEAREST)
    return dataclasses.replace(sample, image=image, mask=mask)


def apply_geometric(sample: Sample, angle: float, hflip: bool, vflip: bool) -> Sample:
    """Deterministic core of augmentation: rotate then flip, mask-consistent."""
    image, mask = sample.image, sample.mask
    if angle != 0.0:
        h, w = image.shape
        rot = cv2.getRotationMatrix2D((w / 2 - 0.5, h / 2 - 0.5), angle, 1.0)
        # Exposed corners become background; ultrasound background is black.
        image = cv2.warpAffine(image, rot, (w, h), flags=cv2.INTER_LINEAR,
                               borderMode=cv2.BORDER_CONSTANT, borderValue=0)
        mask = cv2.warpAffine(mask, rot, (w, h), flags=cv2.INTER_NEAREST,
                              borderMode=cv2.BORDER_CONSTANT, borderValue=0)
    if hflip:
        image = image[:, ::-1]
        mask = mask[:, ::-1]
    if vflip:
        image = image[::-1, :]
        mask = mask[::-1, :]
    return dataclasses.replace(sample, image=np.ascontiguousarray(image),
                               mask=np.ascontiguousarray(mask))


def draw_augmentation(cfg: AugmentationConfig, rng: np.random.Generator):
    lo, hi = cfg.rotation_degrees
    angle = float(rng.uniform(lo, hi))
    hflip = bool(rng.random() < cfg.hflip_prob)
    vflip = bool(rng.random() < cfg.vflip_prob)
    return angle, hflip, vflip


def augment(sample: Sample, cfg: AugmentationConfig, rng: np.random.Generator) -> Sample:
    if not cfg.enabled:
        return sample
    angle, hflip, vflip = draw_augmentation(cfg, rng)
    return apply_geometric(sample, angle, hflip, vflip)


def augmentation_rng(seed: int, sample_id: str, epoch: int) -> np.random.Generator:
    """Per-(sample, epoch) generator; independent of iteration order."""
    digest = hashlib.sha256(sample_id.encode("utf-8")).digest()
    key = int.from_bytes(digest[:8], "little")
    return np.random.default_rng(np.random.SeedSequence([seed, epoch, key]))


def normalize(image: np.ndarray, mode: NormalizationMode) -> np.ndarray:
    """uint8 grayscale H x W -> float32 3 x H x W, ready for the network."""
    image = np.asarray(image)
    if image.min() < 0 or image.max() > 255:
        raise ValueError(f"pixel values outside [0, 255]: min {image.min()}, "
                         f"max {image.max()}")
    scaled = image.astype(np.float32) / 255.0
    stacked = np.repeat(scaled[None, :, :], 3, axis=0)
    if mode is NormalizationMode.IMAGENET_STATS:
        mean = np.asarray(IMAGENET_MEAN, dtype=np.float32)[:, None, None]
        std = np.asarray(IMAGENET_STD, dtype=np.float32)[:, None, None]
        stacked = (stacked - mean) / std
    return stacked
