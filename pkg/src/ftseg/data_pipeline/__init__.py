from .hc18 import FillError, IngestError, fill_annotation, load_hc18, save_dataset
from .phantom import synthesize_phantoms
from .sample import (
    IMAGENET_MEAN,
    IMAGENET_STD,
    ROTATION_RANGE,
    AugmentationConfig,
    NormalizationMode,
    Sample,
    SplitConfig,
    SplitTag,
)
from .transforms import (
    apply_geometric,
    augment,
    augmentation_rng,
    draw_augmentation,
    normalize,
    resize,
    split,
)

__all__ = [
    "AugmentationConfig",
    "FillError",
    "IMAGENET_MEAN",
    "IMAGENET_STD",
    "IngestError",
    "NormalizationMode",
    "ROTATION_RANGE",
    "Sample",
    "SplitConfig",
    "SplitTag",
    "apply_geometric",
    "augment",
    "augmentation_rng",
    "draw_augmentation",
    "fill_annotation",
    "load_hc18",
    "normalize",
    "resize",
    "save_dataset",
    "split",
    "synthesize_phantoms",
]
