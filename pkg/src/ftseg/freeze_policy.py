"""The eight fine-tuning strategies as trainability masks over layer groups.

The head stays trainable in every strategy; a frozen randomly-initialized
output layer would make the encoder-only and partial-decoder schemes
degenerate. Frozen decoder blocks keep their random initialization
("frozen-at-random"), since no pretrained decoder exists.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

from .net_core import (
    CountFilter,
    GroupKind,
    LayerGroupId,
    SegmentationModelSpec,
    build_baseline_unet,
    count_parameters,
    enumerate_layer_groups,
)


class IncompatibleStrategyError(ValueError):
    pass


class StrategyConfigError(ValueError):
    pass


class Strategy(enum.Enum):
    BASELINE_SCRATCH = "baseline_scratch"
    DECODER_ALL = "decoder_all"
    ENCODER_ALL = "encoder_all"
    DECODER_0 = "decoder_0"
    DECODER_0_1 = "decoder_0_1"
    DECODER_0_1_2 = "decoder_0_1_2"
    DECODER_2_3_4 = "decoder_2_3_4"
    DECODER_4 = "decoder_4"

    @property
    def requires_pretrained_encoder(self) -> bool:
        return self is not Strategy.BASELINE_SCRATCH

    @property
    def ordinal(self) -> int:
        return list(Strategy).index(self)


# Unfrozen decoder-block index sets for the partial-decoder schemes.
_DECODER_SETS = {
    Strategy.DECODER_0: {0},
    Strategy.DECODER_0_1: {0, 1},
    Strategy.DECODER_0_1_2: {0, 1, 2},
    Strategy.DECODER_2_3_4: {2, 3, 4},
    Strategy.DECODER_4: {4},
}


@dataclass(frozen=True)
class TrainabilityMask:
    entries: dict

    def __post_init__(self):
        if not any(self.entries.values()):
            raise ValueError("mask must leave at least one group trainable")

    def __getitem__(self, group: LayerGroupId) -> bool:
        return self.entries[group]


def trainable_mask(strategy: Strategy, groups) -> TrainabilityMask:
    """Trainability per layer group; `groups` is the network's group listing."""
    groups = list(groups)
    decoder_indices = {g.index for g in groups if g.kind is GroupKind.DECODER}
    if strategy is Strategy.BASELINE_SCRATCH:
        return TrainabilityMask({g: True for g in groups})
    if strategy is Strategy.DECODER_ALL:
        wanted = decoder_indices
    elif strategy is Strategy.ENCODER_ALL:
        wanted = set()
    else:
        wanted = _DECODER_SETS[strategy]
        missing = wanted - decoder_indices
        if missing:
            raise IncompatibleStrategyError(
                f"{strategy.value} needs decoder blocks {sorted(missing)} "
                f"absent from this network (has {sorted(decoder_indices)})"
            )
    entries = {}
    for g in groups:
        if g.kind is GroupKind.HEAD:
            entries[g] = True
        elif g.kind is GroupKind.DECODER:
            entries[g] = g.index in wanted
        elif g.kind in (GroupKind.ENCODER, GroupKind.BOTTLENECK):
            entries[g] = strategy is Strategy.ENCODER_ALL
    return TrainabilityMask(entries)


def apply(net, strategy: Strategy, allow_random_encoder: bool = False):
    """Set per-parameter trainable flags according to the strategy.

    Parameter values are never touched. Strategies that presume a pretrained
    encoder are rejected on randomly-initialized encoders unless
    `allow_random_encoder` is set (the random-weights ablation).
    """
    spec = getattr(net, "model_spec", None)
    if strategy.requires_pretrained_encoder and not allow_random_encoder:
        if spec is None or not spec.encoder_pretrained:
            raise StrategyConfigError(
                f"{strategy.value} expects a pretrained encoder; pass "
                "allow_random_encoder=True to run the random-weights ablation"
            )
    mask = trainable_mask(strategy, [g for g, _ in enumerate_layer_groups(net)])
    for name, param in net.named_parameters():
        param.requires_grad = mask[net.group_of(name)]
    return net


@lru_cache(maxsize=1)
def baseline_reference_total() -> int:
    """All-trainable parameter total of the default baseline U-Net."""
    return count_parameters(build_baseline_unet(SegmentationModelSpec.baseline()))


def summarize(net, strategy: Strategy, baseline_total: int | None = None) -> dict:
    """Trainable/frozen totals and reduction vs the all-trainable baseline."""
    if baseline_total is None:
        baseline_total = baseline_reference_total()
    if baseline_total <= 0:
        raise ValueError("baseline_total must be positive")
    mask = trainable_mask(strategy, [g for g, _ in enumerate_layer_groups(net)])
    per_group = count_parameters(net, CountFilter.BY_GROUP)
    trainable = sum(n for g, n in per_group.items() if mask[g])
    frozen = sum(n for g, n in per_group.items() if not mask[g])
    return {
        "trainable": trainable,
        "frozen": frozen,
        "reduction_vs_baseline": round(100.0 * (1.0 - trainable / baseline_total), 1),
        "head_trainable": True,
    }
