"""Baseline U-Net: 4 encoder stages, bottleneck, 4 decoder blocks, 1x1 head.

Decoder blocks are indexed 0 (deepest, fed by the bottleneck) upward.
"""

from __future__ import annotations

import torch
import torch.nn as nn

from .groups import GroupKind, LayerGroupId
from .model_spec import EncoderKind, SegmentationModelSpec


class ShapeError(ValueError):
    pass


def check_input(x: torch.Tensor, channels: int, multiple: int) -> None:
    if x.dim() != 4 or x.shape[1] != channels:
        raise ShapeError(f"expected B x {channels} x H x W input, got {tuple(x.shape)}")
    h, w = x.shape[-2:]
    if h % multiple or w % multiple:
        raise ShapeError(f"spatial size {h}x{w} not divisible by {multiple}")


def init_weights(module: nn.Module, seed: int) -> None:
    """He-uniform conv weights, zero biases, unit/zero normalization affine."""
    with torch.random.fork_rng():
        torch.manual_seed(seed)
        for m in module.modules():
            if isinstance(m, (nn.Conv2d, nn.ConvTranspose2d)):
                nn.init.kaiming_uniform_(m.weight, nonlinearity="relu")
                if m.bias is not None:
                    nn.init.zeros_(m.bias)
            elif isinstance(m, nn.BatchNorm2d):
                nn.init.ones_(m.weight)
                nn.init.zeros_(m.bias)
                m.running_mean.zero_()
                m.running_var.fill_(1.0)


class DoubleConv(nn.Sequential):
    def __init__(self, in_ch, out_ch):
        super().__init__(
            nn.Conv2d(in_ch, out_ch, 3, padding=1, bias=False),
            nn.BatchNorm2d(out_ch),
            nn.ReLU(inplace=True),
            nn.Conv2d(out_ch, out_ch, 3, padding=1, bias=False),
            nn.BatchNorm2d(out_ch),
            nn.ReLU(inplace=True),
        )


class UpBlock(nn.Module):
    """Upsample, concatenate the skip, refine with two 3x3 convs."""

    def __init__(self, in_ch, out_ch, upsample="transposed"):
        super().__init__()
        if upsample == "transposed":
            self.up = nn.ConvTranspose2d(in_ch, out_ch, 2, stride=2)
        else:
            self.up = nn.Sequential(
                nn.Upsample(scale_factor=2, mode="bilinear", align_corners=False),
                nn.Conv2d(in_ch, out_ch, 1),
            )
        self.conv = DoubleConv(out_ch * 2, out_ch)

    def forward(self, x, skip):
        x = self.up(x)
        return self.conv(torch.cat([skip, x], dim=1))


class UNet(nn.Module):
    """Generic symmetric U-Net over a feature-width ladder."""

    def __init__(self, in_channels=3, num_classes=1, features=(64, 128, 256, 512),
                 upsample="transposed", required_multiple=None):
        super().__init__()
        features = list(features)
        self.in_channels = in_channels
        self.required_multiple = required_multiple or 2 ** len(features)
        self.encoder = nn.ModuleList()
        prev = in_channels
        for width in features:
            self.encoder.append(DoubleConv(prev, width))
            prev = width
        self.pool = nn.MaxPool2d(2)
        self.bottleneck = DoubleConv(prev, prev * 2)
        self.decoder = nn.ModuleList()
        up_in = prev * 2
        for width in reversed(features):
            self.decoder.append(UpBlock(up_in, width, upsample))
            up_in = width
        self.head = nn.Conv2d(features[0], num_classes, 1)
        self.model_spec = None

    def forward(self, x):
        check_input(x, self.in_channels, self.required_multiple)
        skips = []
        for stage in self.encoder:
            x = stage(x)
            skips.append(x)
            x = self.pool(x)
        x = self.bottleneck(x)
        for block, skip in zip(self.decoder, reversed(skips)):
            x = block(x, skip)
        return self.head(x)

    def group_of(self, name: str) -> LayerGroupId:
        part = name.split(".", 2)
        if part[0] == "encoder":
            return LayerGroupId(GroupKind.ENCODER, int(part[1]))
        if part[0] == "bottleneck":
            return LayerGroupId(GroupKind.BOTTLENECK)
        if part[0] == "decoder":
            return LayerGroupId(GroupKind.DECODER, int(part[1]))
        if part[0] == "head":
            return LayerGroupId(GroupKind.HEAD)
        raise KeyError(f"parameter {name!r} has no layer group")


def build_baseline_unet(spec: SegmentationModelSpec, seed: int = 0) -> UNet:
    spec.validate()
    if spec.encoder_kind is not EncoderKind.BASELINE_UNET:
        raise ValueError("spec does not describe the baseline U-Net")
    if spec.encoder_pretrained:
        raise ValueError("no pretrained baseline U-Net exists")
    net = UNet(
        in_channels=spec.input_channels,
        num_classes=spec.num_classes,
        features=spec.encoder_features,
        upsample=spec.upsample,
        required_multiple=32,
    )
    init_weights(net, seed)
    net.model_spec = spec
    return net
