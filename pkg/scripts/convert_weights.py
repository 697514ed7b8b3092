#!/usr/bin/env python3
"""Convert a torchvision-layout MobileNetV2 checkpoint to a .wts archive.

Usage: python scripts/convert_weights.py mobilenet_v2.pth encoder.wts
"""

import sys

from ftseg.net_core import convert_checkpoint_file


def main():
    if len(sys.argv) != 3:
        print(__doc__.strip(), file=sys.stderr)
        return 2
    archive = convert_checkpoint_file(sys.argv[1], sys.argv[2])
    print(f"wrote {len(archive.tensors)} tensors to {sys.argv[2]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
