"""Sample and pipeline configuration types."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

ROTATION_RANGE = (-25.0, 25.0)
IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)


class SplitTag(enum.Enum):
    TRAIN = "train"
    TEST = "test"


class NormalizationMode(enum.Enum):
    UNIT_RANGE = "unit_range"
    IMAGENET_STATS = "imagenet_stats"


@dataclass
class Sample:
    id: str
    image: np.ndarray  # uint8 grayscale H x W
    mask: np.ndarray   # uint8 H x W, values in {0, 1}
    split_tag: Optional[SplitTag] = None

    def validate(self) -> "Sample":
        if self.image.shape != self.mask.shape:
            raise ValueError(
                f"sample {self.id}: image {self.image.shape} vs mask {self.mask.shape}"
            )
        values = np.unique(self.mask)
        if not np.isin(values, (0, 1)).all():
            raise ValueError(f"sample {self.id}: mask is not binary (values {values[:8]})")
        return self


@dataclass
class SplitConfig:
    total: int = 999
    train_count: int = 799
    test_count: int = 200
    seed: int = 42

    def __post_init__(self):
        if self.train_count + self.test_count != self.total:
            raise ValueError(
                f"train_count + test_count must equal total "
                f"({self.train_count} + {self.test_count} != {self.total})"
            )


@dataclass
class AugmentationConfig:
    rotation_degrees: tuple = ROTATION_RANGE
    hflip_prob: float = 0.5
    vflip_prob: float = 0.5
    normalization: NormalizationMode = NormalizationMode.UNIT_RANGE
    enabled: bool = True

    def __post_init__(self):
        if isinstance(self.normalization, str):
            self.normalization = NormalizationMode(self.normalization)
        if tuple(self.rotation_degrees) != ROTATION_RANGE:
            raise ValueError(f"rotation interval is fixed at {ROTATION_RANGE}")
        for p in (self.hflip_prob, self.vflip_prob):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"flip probability {p} outside [0, 1]")
