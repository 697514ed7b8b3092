"""Layer-group bookkeeping: every network parameter belongs to exactly one group."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional


class GroupKind(enum.Enum):
    ENCODER = "encoder"
    BOTTLENECK = "bottleneck"
    DECODER = "decoder"
    HEAD = "head"


_KIND_ORDER = {
    GroupKind.ENCODER: 0,
    GroupKind.BOTTLENECK: 1,
    GroupKind.DECODER: 2,
    GroupKind.HEAD: 3,
}


@dataclass(frozen=True)
class LayerGroupId:
    """Identifies one freezable unit of a segmentation network.

    Decoder index 0 is the deepest block (adjacent to the encoder's final
    feature map); the highest index produces output resolution.
    """

    kind: GroupKind
    index: Optional[int] = None

    def __post_init__(self):
        if self.kind in (GroupKind.ENCODER, GroupKind.DECODER):
            if self.index is None or self.index < 0:
                raise ValueError(f"{self.kind.value} group requires a non-negative index")
        elif self.index is not None:
            raise ValueError(f"{self.kind.value} group takes no index")

    @property
    def sort_key(self):
        return (_KIND_ORDER[self.kind], -1 if self.index is None else self.index)

    def __str__(self):
        if self.index is None:
            return self.kind.value
        return f"{self.kind.value}{self.index}"

    @classmethod
    def parse(cls, text: str) -> "LayerGroupId":
        for kind in GroupKind:
            if text == kind.value:
                return cls(kind)
            if text.startswith(kind.value) and text[len(kind.value):].isdigit():
                return cls(kind, int(text[len(kind.value):]))
        raise ValueError(f"unrecognized layer group: {text!r}")


@dataclass(frozen=True)
class ParameterRecord:
    name: str
    group: LayerGroupId
    shape: tuple
    count: int
    trainable: bool


class CountFilter(enum.Enum):
    ALL = "all"
    TRAINABLE_ONLY = "trainable_only"
    BY_GROUP = "by_group"


def parameter_records(net) -> list:
    """One record per parameter tensor, with its group assignment."""
    records = []
    for name, param in net.named_parameters():
        group = net.group_of(name)
        shape = tuple(param.shape)
        count = 1
        for s in shape:
            count *= s
        records.append(ParameterRecord(name, group, shape, count, param.requires_grad))
    return records


def count_parameters(net, count_filter: CountFilter = CountFilter.ALL):
    """Total parameter count, trainable-only count, or a per-group map."""
    records = parameter_records(net)
    if count_filter is CountFilter.ALL:
        return sum(r.count for r in records)
    if count_filter is CountFilter.TRAINABLE_ONLY:
        return sum(r.count for r in records if r.trainable)
    by_group: dict = {}
    for r in records:
        by_group[r.group] = by_group.get(r.group, 0) + r.count
    return dict(sorted(by_group.items(), key=lambda kv: kv[0].sort_key))


def enumerate_layer_groups(net) -> list:
    """Ordered (group, parameter names) partition of the network."""
    grouped: dict = {}
    for name, _ in net.named_parameters():
        grouped.setdefault(net.group_of(name), []).append(name)
    return sorted(grouped.items(), key=lambda kv: kv[0].sort_key)
