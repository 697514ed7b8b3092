import pytest

from ftseg.net_core import (
    MobileNetUNet,
    SegmentationModelSpec,
    build_baseline_unet,
    build_mobilenet_unet,
    export_encoder_archive,
)
from ftseg.net_core.unet import init_weights


@pytest.fixture(scope="session")
def baseline_net():
    return build_baseline_unet(SegmentationModelSpec.baseline(), seed=0)


@pytest.fixture(scope="session")
def mobilenet_random():
    return build_mobilenet_unet(SegmentationModelSpec.mobilenet(pretrained=False), seed=0)


@pytest.fixture(scope="session")
def encoder_archive():
    """Stand-in pretrained-encoder archive: a seeded random encoder snapshot."""
    donor = MobileNetUNet()
    init_weights(donor, 12345)
    return export_encoder_archive(donor, meta={"source_checkpoint": "random:12345"})


@pytest.fixture()
def mobilenet_pretrained(encoder_archive):
    return build_mobilenet_unet(
        SegmentationModelSpec.mobilenet(pretrained=True),
        weights=encoder_archive, seed=3,
    )
