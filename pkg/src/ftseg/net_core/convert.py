"""Convert an upstream MobileNetV2 ImageNet checkpoint into a `.wts` archive.

Upstream checkpoints (torchvision layout) name layers `features.<i>.<rest>`
over a flat 19-entry list; the encoder here groups the same layers into 5
stages, so the canonical archive names are
`encoder.stages.<stage>.<block>.<rest>`.
"""

from __future__ import annotations

import datetime

from .mobilenet import STAGE_SLICES
from .weights import WeightArchive


def _stage_local(i: int):
    for stage, (a, b) in enumerate(STAGE_SLICES):
        if a <= i < b:
            return stage, i - a
    raise KeyError(f"feature index {i} outside the encoder")


def convert_torchvision_state_dict(state_dict, source: str = "") -> WeightArchive:
    tensors = {}
    for name, value in state_dict.items():
        if not name.startswith("features."):
            continue  # classifier weights are not part of the encoder
        if name.endswith("num_batches_tracked"):
            continue
        _, idx, rest = name.split(".", 2)
        stage, local = _stage_local(int(idx))
        arr = value.detach().cpu().numpy() if hasattr(value, "detach") else value
        tensors[f"encoder.stages.{stage}.{local}.{rest}"] = arr
    meta = {
        "source_checkpoint": source,
        "conversion_date": datetime.date.today().isoformat(),
        "layout": "mobilenet_v2 encoder, 5 stages",
    }
    return WeightArchive(tensors=tensors, meta=meta)


def convert_checkpoint_file(src_path, dst_path) -> WeightArchive:
    import torch

    from .weights import save_weight_archive

    state = torch.load(src_path, map_location="cpu", weights_only=True)
    if hasattr(state, "state_dict"):
        state = state.state_dict()
    archive = convert_torchvision_state_dict(state, source=str(src_path))
    save_weight_archive(archive, dst_path)
    return archive
