"""Experiment configuration: YAML in, validated ExperimentSpec out."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

import yaml

from ..data_pipeline import AugmentationConfig, NormalizationMode, SplitConfig
from ..freeze_policy import IncompatibleStrategyError, Strategy
from ..net_core import EncoderKind, SegmentationModelSpec
from ..training import TrainConfig

SCHEMA_VERSION = 1

OUTPUT_DIR_ENV = "FTSEG_OUTPUT_DIR"


class SpecError(ValueError):
    """Invalid experiment config; message names the offending field."""


@dataclass
class DatasetSpec:
    kind: str = "phantom"  # "hc18" or "phantom"
    root: Optional[str] = None
    image_size: int = 512
    phantom_n: int = 200
    phantom_seed: int = 7

    def __post_init__(self):
        if self.kind not in ("hc18", "phantom"):
            raise SpecError(f"dataset.kind: unknown dataset {self.kind!r}")
        if self.kind == "hc18" and not self.root:
            raise SpecError("dataset.root: required for hc18")
        if self.image_size % 32 != 0:
            raise SpecError(f"dataset.image_size: {self.image_size} not divisible by 32")


@dataclass
class ModelSpec:
    encoder: str = "mobilenet_v2"
    pretrained: bool = True
    weights_path: Optional[str] = None
    allow_random_encoder: bool = False

    def __post_init__(self):
        EncoderKind(self.encoder)
        if self.pretrained and self.encoder != "mobilenet_v2":
            raise SpecError("model.pretrained: only mobilenet_v2 can be pretrained")
        if self.pretrained and not self.weights_path:
            raise SpecError("model.weights_path: required when model.pretrained")

    def build_spec(self) -> SegmentationModelSpec:
        if self.encoder == "baseline_unet":
            return SegmentationModelSpec.baseline()
        return SegmentationModelSpec.mobilenet(pretrained=self.pretrained)

    @property
    def decoder_indices(self) -> set:
        return {0, 1, 2, 3} if self.encoder == "baseline_unet" else {0, 1, 2, 3, 4}


@dataclass
class ExperimentSpec:
    dataset: DatasetSpec = field(default_factory=DatasetSpec)
    model: ModelSpec = field(default_factory=ModelSpec)
    strategies: list = field(default_factory=lambda: list(Strategy))
    repeats: int = 4
    train: TrainConfig = field(default_factory=TrainConfig)
    augmentation: AugmentationConfig = field(default_factory=AugmentationConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    output_dir: Optional[str] = None
    base_seed: int = 42
    resplit_per_repeat: bool = False
    schema_version: int = SCHEMA_VERSION

    def run_seed(self, strategy: Strategy, repeat: int) -> int:
        return self.base_seed + strategy.ordinal * 1000 + repeat

    @property
    def planned_runs(self) -> list:
        return [(s, r) for s in self.strategies for r in range(self.repeats)]


_DECODER_STRATEGIES = {
    Strategy.DECODER_0: {0},
    Strategy.DECODER_0_1: {0, 1},
    Strategy.DECODER_0_1_2: {0, 1, 2},
    Strategy.DECODER_2_3_4: {2, 3, 4},
    Strategy.DECODER_4: {4},
}


def validate_spec(spec: ExperimentSpec) -> ExperimentSpec:
    """Check invariants and cross-field compatibility; fill the output dir."""
    if spec.schema_version != SCHEMA_VERSION:
        raise SpecError(f"schema_version: expected {SCHEMA_VERSION}, "
                        f"got {spec.schema_version}")
    if spec.repeats < 1:
        raise SpecError("repeats: must be >= 1")
    if not spec.strategies:
        raise SpecError("strategies: must be non-empty")
    for strategy in spec.strategies:
        needed = _DECODER_STRATEGIES.get(strategy, set())
        missing = needed - spec.model.decoder_indices
        if missing:
            raise IncompatibleStrategyError(
                f"strategies: {strategy.value} needs decoder blocks "
                f"{sorted(missing)} absent from the {spec.model.encoder} model"
            )
        if (strategy.requires_pretrained_encoder and not spec.model.pretrained
                and not spec.model.allow_random_encoder):
            raise SpecError(
                f"strategies: {strategy.value} requires a pretrained encoder; "
                "set model.pretrained or model.allow_random_encoder"
            )
    if spec.output_dir is None:
        spec.output_dir = os.environ.get(OUTPUT_DIR_ENV)
    if spec.output_dir is None:
        raise SpecError(f"output_dir: not set and {OUTPUT_DIR_ENV} is empty")
    return spec


def spec_from_dict(raw: dict) -> ExperimentSpec:
    raw = dict(raw)
    try:
        dataset = DatasetSpec(**raw.pop("dataset", {}))
        model = ModelSpec(**raw.pop("model", {}))
        strategies = [Strategy(s) for s in raw.pop("strategies", [s.value for s in Strategy])]
        train = TrainConfig(**raw.pop("train", {}))
        augmentation = AugmentationConfig(**_tupled(raw.pop("augmentation", {})))
        split = SplitConfig(**raw.pop("split", _default_split(dataset)))
        spec = ExperimentSpec(dataset=dataset, model=model, strategies=strategies,
                              train=train, augmentation=augmentation, split=split,
                              **raw)
    except TypeError as exc:
        raise SpecError(str(exc)) from exc
    return validate_spec(spec)


def _tupled(aug: dict) -> dict:
    if "rotation_degrees" in aug:
        aug = dict(aug, rotation_degrees=tuple(aug["rotation_degrees"]))
    return aug


def _default_split(dataset: DatasetSpec) -> dict:
    if dataset.kind == "phantom":
        train_count = int(round(dataset.phantom_n * 0.8))
        return {"total": dataset.phantom_n, "train_count": train_count,
                "test_count": dataset.phantom_n - train_count, "seed": 42}
    return {}


def load_spec(path) -> ExperimentSpec:
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise SpecError(f"config {path} did not parse to a mapping")
    return spec_from_dict(raw)
