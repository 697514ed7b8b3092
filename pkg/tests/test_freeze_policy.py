"""Trainability masks and their application."""

import pytest
import torch

from ftseg import freeze_policy as fp
from ftseg.net_core import (
    CountFilter,
    GroupKind,
    count_parameters,
    enumerate_layer_groups,
)
from tests.test_net_core import MOBILENET_DECODER_HEAD_TOTAL


def groups_of(net):
    return [g for g, _ in enumerate_layer_groups(net)]


def test_exactly_eight_strategies():
    assert len(fp.Strategy) == 8
    assert {s.value for s in fp.Strategy} == {
        "baseline_scratch", "decoder_all", "encoder_all", "decoder_0",
        "decoder_0_1", "decoder_0_1_2", "decoder_2_3_4", "decoder_4",
    }


def test_pretrained_requirement_flags():
    assert not fp.Strategy.BASELINE_SCRATCH.requires_pretrained_encoder
    for s in fp.Strategy:
        if s is not fp.Strategy.BASELINE_SCRATCH:
            assert s.requires_pretrained_encoder


def test_baseline_scratch_all_true(baseline_net):
    mask = fp.trainable_mask(fp.Strategy.BASELINE_SCRATCH, groups_of(baseline_net))
    assert all(mask.entries.values())


def test_decoder_all_mask(mobilenet_random):
    mask = fp.trainable_mask(fp.Strategy.DECODER_ALL, groups_of(mobilenet_random))
    for g, trainable in mask.entries.items():
        expected = g.kind in (GroupKind.DECODER, GroupKind.HEAD)
        assert trainable == expected


def test_encoder_all_mask(mobilenet_random):
    mask = fp.trainable_mask(fp.Strategy.ENCODER_ALL, groups_of(mobilenet_random))
    for g, trainable in mask.entries.items():
        expected = g.kind in (GroupKind.ENCODER, GroupKind.HEAD)
        assert trainable == expected


def test_decoder_4_mask(mobilenet_random):
    mask = fp.trainable_mask(fp.Strategy.DECODER_4, groups_of(mobilenet_random))
    trainable = {g for g, v in mask.entries.items() if v}
    assert {str(g) for g in trainable} == {"decoder4", "head"}


def test_mask_totality(mobilenet_random, baseline_net):
    for net in (mobilenet_random, baseline_net):
        groups = groups_of(net)
        for strategy in fp.Strategy:
            try:
                mask = fp.trainable_mask(strategy, groups)
            except fp.IncompatibleStrategyError:
                continue
            assert set(mask.entries) == set(groups)


def test_incompatible_decoder_index(baseline_net):
    with pytest.raises(fp.IncompatibleStrategyError):
        fp.trainable_mask(fp.Strategy.DECODER_4, groups_of(baseline_net))
    with pytest.raises(fp.IncompatibleStrategyError):
        fp.trainable_mask(fp.Strategy.DECODER_2_3_4, groups_of(baseline_net))


def test_monotone_trainable_counts(mobilenet_random):
    ladder = [fp.Strategy.DECODER_0, fp.Strategy.DECODER_0_1,
              fp.Strategy.DECODER_0_1_2, fp.Strategy.DECODER_ALL]
    counts = []
    for strategy in ladder:
        fp.apply(mobilenet_random, strategy, allow_random_encoder=True)
        counts.append(count_parameters(mobilenet_random, CountFilter.TRAINABLE_ONLY))
    assert counts == sorted(counts)


def test_apply_decoder_all_trainable_count(mobilenet_pretrained):
    fp.apply(mobilenet_pretrained, fp.Strategy.DECODER_ALL)
    trainable = count_parameters(mobilenet_pretrained, CountFilter.TRAINABLE_ONLY)
    assert trainable == MOBILENET_DECODER_HEAD_TOTAL
    assert 4.2e6 <= trainable <= 4.6e6


def test_apply_does_not_change_values(mobilenet_pretrained):
    before = {n: p.detach().clone() for n, p in mobilenet_pretrained.named_parameters()}
    fp.apply(mobilenet_pretrained, fp.Strategy.DECODER_0)
    for n, p in mobilenet_pretrained.named_parameters():
        assert torch.equal(p, before[n])


def test_apply_idempotent(mobilenet_pretrained):
    fp.apply(mobilenet_pretrained, fp.Strategy.DECODER_0_1)
    flags = {n: p.requires_grad for n, p in mobilenet_pretrained.named_parameters()}
    fp.apply(mobilenet_pretrained, fp.Strategy.DECODER_0_1)
    assert flags == {n: p.requires_grad for n, p in mobilenet_pretrained.named_parameters()}


def test_apply_requires_pretrained(mobilenet_random):
    with pytest.raises(fp.StrategyConfigError):
        fp.apply(mobilenet_random, fp.Strategy.DECODER_ALL)
    fp.apply(mobilenet_random, fp.Strategy.DECODER_ALL, allow_random_encoder=True)


def test_summarize_reduction(mobilenet_pretrained):
    summary = fp.summarize(mobilenet_pretrained, fp.Strategy.DECODER_ALL)
    assert summary["trainable"] == MOBILENET_DECODER_HEAD_TOTAL
    assert abs(summary["reduction_vs_baseline"] - 85.8) <= 1.0


def test_summarize_baseline_scratch_zero_reduction(baseline_net):
    summary = fp.summarize(baseline_net, fp.Strategy.BASELINE_SCRATCH)
    assert summary["reduction_vs_baseline"] == 0.0
    assert summary["frozen"] == 0


def test_summarize_encoder_all(mobilenet_pretrained):
    from ftseg.net_core import GroupKind, count_parameters as cp
    by_group = cp(mobilenet_pretrained, CountFilter.BY_GROUP)
    encoder_total = sum(v for g, v in by_group.items() if g.kind is GroupKind.ENCODER)
    head_total = sum(v for g, v in by_group.items() if g.kind is GroupKind.HEAD)
    summary = fp.summarize(mobilenet_pretrained, fp.Strategy.ENCODER_ALL)
    assert summary["trainable"] == encoder_total + head_total


def test_summarize_rejects_zero_baseline(mobilenet_pretrained):
    with pytest.raises(ValueError):
        fp.summarize(mobilenet_pretrained, fp.Strategy.DECODER_ALL, baseline_total=0)


def test_all_frozen_mask_rejected():
    from ftseg.net_core import GroupKind, LayerGroupId
    with pytest.raises(ValueError):
        fp.TrainabilityMask({LayerGroupId(GroupKind.HEAD): False})
