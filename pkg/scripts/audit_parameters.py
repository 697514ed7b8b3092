#!/usr/bin/env python3
"""Print the per-strategy trainable-parameter audit for the MobileNetV2 U-Net.

Usage: python scripts/audit_parameters.py
"""

from ftseg import freeze_policy as fp
from ftseg.net_core import SegmentationModelSpec, build_mobilenet_unet


def main():
    net = build_mobilenet_unet(SegmentationModelSpec.mobilenet(pretrained=False),
                               seed=0)
    baseline_total = fp.baseline_reference_total()
    print(f"baseline U-Net all-trainable total: {baseline_total:,}")
    for strategy in fp.Strategy:
        if strategy is fp.Strategy.BASELINE_SCRATCH:
            continue
        summary = fp.summarize(net, strategy, baseline_total)
        print(f"{strategy.value:>16}: trainable {summary['trainable']:>11,}  "
              f"reduction {summary['reduction_vs_baseline']:5.1f}%")


if __name__ == "__main__":
    main()
