"""Declarative description of a segmentation network build."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class EncoderKind(enum.Enum):
    BASELINE_UNET = "baseline_unet"
    MOBILENET_V2 = "mobilenet_v2"


BASELINE_FEATURES = [64, 128, 256, 512]
BASELINE_BOTTLENECK = 1024
MOBILENET_TAP_CHANNELS = [16, 24, 32, 96, 1280]
MOBILENET_DECODER_FEATURES = [256, 128, 64, 32, 16]


@dataclass
class SegmentationModelSpec:
    encoder_kind: EncoderKind = EncoderKind.BASELINE_UNET
    encoder_pretrained: bool = False
    input_channels: int = 3
    input_size: int = 512
    encoder_features: list = field(default_factory=lambda: list(BASELINE_FEATURES))
    decoder_features: list = field(default_factory=list)
    num_classes: int = 1
    # Baseline decoder upsampling; the alternative is "bilinear".
    upsample: str = "transposed"

    def __post_init__(self):
        if isinstance(self.encoder_kind, str):
            self.encoder_kind = EncoderKind(self.encoder_kind)
        if self.encoder_kind is EncoderKind.BASELINE_UNET:
            if not self.encoder_features:
                self.encoder_features = list(BASELINE_FEATURES)
            if not self.decoder_features:
                self.decoder_features = list(reversed(self.encoder_features))
        else:
            self.encoder_features = list(MOBILENET_TAP_CHANNELS)
            if not self.decoder_features:
                self.decoder_features = list(MOBILENET_DECODER_FEATURES)

    def validate(self) -> "SegmentationModelSpec":
        if self.encoder_pretrained and self.encoder_kind is not EncoderKind.MOBILENET_V2:
            raise ValueError("encoder_pretrained is only available for the mobilenet_v2 encoder")
        if self.encoder_kind is EncoderKind.BASELINE_UNET:
            if self.encoder_features != BASELINE_FEATURES:
                raise ValueError(
                    f"baseline encoder features must be {BASELINE_FEATURES}, "
                    f"got {self.encoder_features}"
                )
        else:
            if len(self.decoder_features) != 5:
                raise ValueError("mobilenet_v2 decoder requires exactly 5 block widths")
        if self.input_channels != 3:
            raise ValueError("input is replicated grayscale; input_channels must be 3")
        if self.input_size % 32 != 0:
            raise ValueError("input_size must be divisible by 32")
        if self.num_classes != 1:
            raise ValueError("only the single foreground-logit head is supported")
        if self.upsample not in ("transposed", "bilinear"):
            raise ValueError(f"unknown upsample mode {self.upsample!r}")
        return self

    @classmethod
    def baseline(cls, **kwargs) -> "SegmentationModelSpec":
        return cls(encoder_kind=EncoderKind.BASELINE_UNET, **kwargs).validate()

    @classmethod
    def mobilenet(cls, pretrained: bool = True, **kwargs) -> "SegmentationModelSpec":
        return cls(
            encoder_kind=EncoderKind.MOBILENET_V2, encoder_pretrained=pretrained, **kwargs
        ).validate()
