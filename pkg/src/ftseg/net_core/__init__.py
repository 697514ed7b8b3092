from .groups import (
    CountFilter,
    GroupKind,
    LayerGroupId,
    ParameterRecord,
    count_parameters,
    enumerate_layer_groups,
    parameter_records,
)
from .mobilenet import (
    MobileNetUNet,
    MobileNetV2Encoder,
    WeightLoadError,
    build_mobilenet_unet,
    export_encoder_archive,
    load_encoder_weights,
)
from .model_spec import (
    BASELINE_FEATURES,
    MOBILENET_DECODER_FEATURES,
    MOBILENET_TAP_CHANNELS,
    EncoderKind,
    SegmentationModelSpec,
)
from .unet import ShapeError, UNet, build_baseline_unet
from .weights import (
    WeightArchive,
    WeightArchiveError,
    load_weight_archive,
    save_weight_archive,
)
from .convert import convert_checkpoint_file, convert_torchvision_state_dict

__all__ = [
    "BASELINE_FEATURES",
    "CountFilter",
    "EncoderKind",
    "GroupKind",
    "LayerGroupId",
    "MOBILENET_DECODER_FEATURES",
    "MOBILENET_TAP_CHANNELS",
    "MobileNetUNet",
    "MobileNetV2Encoder",
    "ParameterRecord",
    "SegmentationModelSpec",
    "ShapeError",
    "UNet",
    "WeightArchive",
    "WeightArchiveError",
    "WeightLoadError",
    "build_baseline_unet",
    "build_mobilenet_unet",
    "convert_checkpoint_file",
    "convert_torchvision_state_dict",
    "count_parameters",
    "enumerate_layer_groups",
    "export_encoder_archive",
    "load_encoder_weights",
    "load_weight_archive",
    "parameter_records",
    "save_weight_archive",
]
