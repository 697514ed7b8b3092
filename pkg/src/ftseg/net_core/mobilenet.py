"""MobileNetV2 encoder U-Net.

The encoder is the standard inverted-residual stack grouped into 5 stages,
one per feature tap (strides 2, 4, 8, 16, 32; channels 16, 24, 32, 96, 1280).
The decoder has 5 interpolate-and-refine blocks, index 0 deepest.
"""

from __future__ import annotations

import torch
import torch.nn as nn
import torch.nn.functional as F

from .groups import GroupKind, LayerGroupId
from .model_spec import EncoderKind, SegmentationModelSpec
from .unet import check_input, init_weights
from .weights import WeightArchive


class WeightLoadError(ValueError):
    pass


class ConvBNReLU(nn.Sequential):
    def __init__(self, in_ch, out_ch, kernel=3, stride=1, groups=1):
        super().__init__(
            nn.Conv2d(in_ch, out_ch, kernel, stride, (kernel - 1) // 2,
                      groups=groups, bias=False),
            nn.BatchNorm2d(out_ch),
            nn.ReLU6(inplace=True),
        )


class InvertedResidual(nn.Module):
    def __init__(self, in_ch, out_ch, stride, expand_ratio):
        super().__init__()
        hidden = round(in_ch * expand_ratio)
        self.use_res_connect = stride == 1 and in_ch == out_ch
        layers = []
        if expand_ratio != 1:
            layers.append(ConvBNReLU(in_ch, hidden, kernel=1))
        layers.extend([
            ConvBNReLU(hidden, hidden, stride=stride, groups=hidden),
            nn.Conv2d(hidden, out_ch, 1, bias=False),
            nn.BatchNorm2d(out_ch),
        ])
        self.conv = nn.Sequential(*layers)

    def forward(self, x):
        out = self.conv(x)
        return x + out if self.use_res_connect else out


# (expand_ratio, out_channels, repeats, first_stride)
INVERTED_RESIDUAL_SETTINGS = [
    (1, 16, 1, 1),
    (6, 24, 2, 2),
    (6, 32, 3, 2),
    (6, 64, 4, 2),
    (6, 96, 3, 1),
    (6, 160, 3, 2),
    (6, 320, 1, 1),
]

# Slices of the flat 19-layer feature list, one per tap.
STAGE_SLICES = [(0, 2), (2, 4), (4, 7), (7, 14), (14, 19)]


def _feature_layers():
    layers = [ConvBNReLU(3, 32, stride=2)]
    in_ch = 32
    for t, c, n, s in INVERTED_RESIDUAL_SETTINGS:
        for i in range(n):
            layers.append(InvertedResidual(in_ch, c, s if i == 0 else 1, t))
            in_ch = c
    layers.append(ConvBNReLU(in_ch, 1280, kernel=1))
    return layers


class MobileNetV2Encoder(nn.Module):
    tap_channels = [16, 24, 32, 96, 1280]
    tap_strides = [2, 4, 8, 16, 32]

    def __init__(self):
        super().__init__()
        layers = _feature_layers()
        self.stages = nn.ModuleList(
            nn.Sequential(*layers[a:b]) for a, b in STAGE_SLICES
        )

    def forward(self, x):
        taps = []
        for stage in self.stages:
            x = stage(x)
            taps.append(x)
        return taps


class DecoderBlock(nn.Module):
    """2x nearest upsample, optional skip concat, two 3x3 conv/BN/ReLU."""

    def __init__(self, in_ch, skip_ch, out_ch):
        super().__init__()
        self.conv1 = nn.Conv2d(in_ch + skip_ch, out_ch, 3, padding=1, bias=False)
        self.bn1 = nn.BatchNorm2d(out_ch)
        self.conv2 = nn.Conv2d(out_ch, out_ch, 3, padding=1, bias=False)
        self.bn2 = nn.BatchNorm2d(out_ch)

    def forward(self, x, skip=None):
        x = F.interpolate(x, scale_factor=2, mode="nearest")
        if skip is not None:
            x = torch.cat([x, skip], dim=1)
        x = F.relu(self.bn1(self.conv1(x)), inplace=True)
        return F.relu(self.bn2(self.conv2(x)), inplace=True)


class MobileNetUNet(nn.Module):
    def __init__(self, decoder_features=(256, 128, 64, 32, 16), num_classes=1):
        super().__init__()
        self.in_channels = 3
        self.required_multiple = 32
        self.encoder = MobileNetV2Encoder()
        taps = self.encoder.tap_channels
        skip_channels = [taps[3], taps[2], taps[1], taps[0], 0]
        self.decoder = nn.ModuleList()
        in_ch = taps[-1]
        for skip_ch, out_ch in zip(skip_channels, decoder_features):
            self.decoder.append(DecoderBlock(in_ch, skip_ch, out_ch))
            in_ch = out_ch
        self.head = nn.Conv2d(decoder_features[-1], num_classes, 1)
        self.model_spec = None

    def forward(self, x):
        check_input(x, self.in_channels, self.required_multiple)
        taps = self.encoder(x)
        x = taps[-1]
        skips = [taps[3], taps[2], taps[1], taps[0], None]
        for block, skip in zip(self.decoder, skips):
            x = block(x, skip)
        return self.head(x)

    def group_of(self, name: str) -> LayerGroupId:
        part = name.split(".")
        if part[0] == "encoder":
            return LayerGroupId(GroupKind.ENCODER, int(part[2]))
        if part[0] == "decoder":
            return LayerGroupId(GroupKind.DECODER, int(part[1]))
        if part[0] == "head":
            return LayerGroupId(GroupKind.HEAD)
        raise KeyError(f"parameter {name!r} has no layer group")


def load_encoder_weights(net: MobileNetUNet, archive: WeightArchive) -> None:
    """Copy encoder tensors from the archive, bit-exactly; decoder untouched."""
    state = dict(net.encoder.named_parameters())
    buffers = {n: b for n, b in net.encoder.named_buffers()
               if not n.endswith("num_batches_tracked")}
    with torch.no_grad():
        for name, tensor in state.items():
            full = f"encoder.{name}"
            if full not in archive:
                raise WeightLoadError(f"archive missing tensor {full!r}")
            arr = archive[full]
            if tuple(arr.shape) != tuple(tensor.shape):
                raise WeightLoadError(
                    f"shape mismatch for {full!r}: archive {tuple(arr.shape)}, "
                    f"model {tuple(tensor.shape)}"
                )
            tensor.copy_(torch.from_numpy(arr).to(tensor.dtype))
        for name, buf in buffers.items():
            full = f"encoder.{name}"
            if full in archive:
                arr = archive[full]
                if tuple(arr.shape) != tuple(buf.shape):
                    raise WeightLoadError(
                        f"shape mismatch for {full!r}: archive {tuple(arr.shape)}, "
                        f"model {tuple(buf.shape)}"
                    )
                buf.copy_(torch.from_numpy(arr).to(buf.dtype))


def export_encoder_archive(net: MobileNetUNet, meta=None) -> WeightArchive:
    """Snapshot encoder parameters and normalization statistics as an archive."""
    tensors = {}
    for name, p in net.encoder.named_parameters():
        tensors[f"encoder.{name}"] = p.detach().cpu().numpy().copy()
    for name, b in net.encoder.named_buffers():
        if not name.endswith("num_batches_tracked"):
            tensors[f"encoder.{name}"] = b.detach().cpu().numpy().copy()
    return WeightArchive(tensors=tensors, meta=dict(meta or {}))


def build_mobilenet_unet(spec: SegmentationModelSpec, weights: WeightArchive | None = None,
                         seed: int = 0) -> MobileNetUNet:
    spec.validate()
    if spec.encoder_kind is not EncoderKind.MOBILENET_V2:
        raise ValueError("spec does not describe the MobileNetV2 U-Net")
    if spec.encoder_pretrained and weights is None:
        raise ValueError("pretrained encoder requested but no weight archive given")
    net = MobileNetUNet(decoder_features=spec.decoder_features,
                        num_classes=spec.num_classes)
    init_weights(net, seed)
    if spec.encoder_pretrained:
        load_encoder_weights(net, weights)
    net.model_spec = spec
    return net
