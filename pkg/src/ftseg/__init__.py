"""Fine-tuning strategy benchmark for U-Net fetal head ultrasound segmentation."""

from . import data_pipeline, freeze_policy, harness, metrics, net_core, training

__version__ = "0.1.0"

__all__ = ["data_pipeline", "freeze_policy", "harness", "metrics", "net_core",
           "training", "__version__"]
