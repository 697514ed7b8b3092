"""Training protocol: loss, Adam with per-epoch exponential LR decay,
mini-batch loop with frozen-parameter enforcement, checkpointing.

The loss defaults to Dice+BCE, the conventional choice for binary
ultrasound segmentation; plain Dice and BCE are selectable for
sensitivity checks.
"""

from __future__ import annotations

import dataclasses
import enum
import hashlib
import json
import time
from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn.functional as F

from . import metrics as metrics_mod
from .data_pipeline import (
    AugmentationConfig,
    NormalizationMode,
    augment,
    augmentation_rng,
    normalize,
)
from .freeze_policy import Strategy, trainable_mask
from .net_core import enumerate_layer_groups
from .net_core.weights import WeightArchive, load_weight_archive, save_weight_archive

DICE_SMOOTH = 1.0
ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8


class LossKind(enum.Enum):
    DICE = "dice"
    BCE = "bce"
    DICE_BCE = "dice_bce"


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch, batch_index, value):
        super().__init__(
            f"non-finite loss {value} at epoch {epoch}, batch {batch_index}"
        )
        self.epoch = epoch
        self.batch_index = batch_index
        self.value = value


class CheckpointError(ValueError):
    pass


@dataclass
class TrainConfig:
    epochs: int = 20
    batch_size: int = 10
    lr_initial: float = 1e-4
    lr_decay_per_epoch: float = 0.95
    optimizer: str = "adam"
    loss: LossKind = LossKind.DICE_BCE
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.loss, str):
            self.loss = LossKind(self.loss)
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not 0.0 < self.lr_decay_per_epoch <= 1.0:
            raise ValueError("lr_decay_per_epoch must be in (0, 1]")
        if self.optimizer != "adam":
            raise ValueError(f"unsupported optimizer {self.optimizer!r}")

    def hash(self) -> str:
        payload = dataclasses.asdict(self)
        payload["loss"] = self.loss.value
        return hashlib.sha256(
            json.dumps(payload, sort_keys=True).encode()
        ).hexdigest()[:16]


@dataclass
class EpochLog:
    epoch: int
    mean_train_loss: float
    lr: float
    val_dice: float
    wall_seconds: float

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class Checkpoint:
    parameters: dict
    trainability: dict  # str(group) -> bool
    config_hash: str
    epoch: int
    val_dice: float = 0.0
    buffers: dict = field(default_factory=dict)


def segmentation_loss(logits: torch.Tensor, target: torch.Tensor,
                      kind: LossKind = LossKind.DICE_BCE) -> torch.Tensor:
    if logits.shape != target.shape:
        raise ValueError(f"shape mismatch: logits {tuple(logits.shape)}, "
                         f"target {tuple(target.shape)}")
    target = target.to(logits.dtype)
    if kind is LossKind.BCE:
        return F.binary_cross_entropy_with_logits(logits, target)
    probs = torch.sigmoid(logits)
    intersection = (probs * target).sum()
    soft_dice = (2 * intersection + DICE_SMOOTH) / (probs.sum() + target.sum() + DICE_SMOOTH)
    dice_loss = 1.0 - soft_dice
    if kind is LossKind.DICE:
        return dice_loss
    return dice_loss + F.binary_cross_entropy_with_logits(logits, target)


def lr_schedule(cfg: TrainConfig, epoch: int) -> float:
    if not 0 <= epoch < cfg.epochs:
        raise ValueError(f"epoch {epoch} outside [0, {cfg.epochs})")
    return cfg.lr_initial * cfg.lr_decay_per_epoch ** epoch


def _batch_tensors(samples, aug_cfg, epoch, seed, device):
    images, masks = [], []
    for s in samples:
        if aug_cfg is not None and aug_cfg.enabled:
            s = augment(s, aug_cfg, augmentation_rng(seed, s.id, epoch))
        mode = aug_cfg.normalization if aug_cfg is not None else NormalizationMode.UNIT_RANGE
        images.append(normalize(s.image, mode))
        masks.append(s.mask.astype(np.float32))
    x = torch.from_numpy(np.stack(images)).to(device)
    y = torch.from_numpy(np.stack(masks)).unsqueeze(1).to(device)
    return x, y


def snapshot(net, strategy: Strategy, config_hash: str, epoch: int,
             val_dice: float) -> Checkpoint:
    mask = trainable_mask(strategy, [g for g, _ in enumerate_layer_groups(net)])
    return Checkpoint(
        parameters={n: p.detach().cpu().numpy().copy()
                    for n, p in net.named_parameters()},
        buffers={n: b.detach().cpu().numpy().copy()
                 for n, b in net.named_buffers()
                 if not n.endswith("num_batches_tracked")},
        trainability={str(g): bool(v) for g, v in mask.entries.items()},
        config_hash=config_hash,
        epoch=epoch,
        val_dice=val_dice,
    )


def train(net, strategy: Strategy, train_samples, val_samples, cfg: TrainConfig,
          aug_cfg: AugmentationConfig | None = None, device: str = "cpu",
          log_path=None):
    """Run the full schedule; returns (net, epoch logs, best checkpoint).

    The strategy must already be applied to `net`; only parameters with
    requires_grad=True are handed to the optimizer, so frozen tensors are
    untouched by construction. Model selection is by best validation Dice.
    """
    if not train_samples or not val_samples:
        raise ValueError("train and validation datasets must be non-empty")
    net = net.to(device)
    params = [p for p in net.parameters() if p.requires_grad]
    if not params:
        raise ValueError("no trainable parameters; was a strategy applied?")
    optimizer = torch.optim.Adam(params, lr=cfg.lr_initial,
                                 betas=ADAM_BETAS, eps=ADAM_EPS)
    norm_mode = aug_cfg.normalization if aug_cfg is not None else NormalizationMode.UNIT_RANGE
    config_hash = cfg.hash()
    logs = []
    best = None
    log_fh = open(log_path, "w") if log_path else None
    try:
        for epoch in range(cfg.epochs):
            start = time.time()
            lr = lr_schedule(cfg, epoch)
            for group in optimizer.param_groups:
                group["lr"] = lr
            order = np.random.default_rng(
                np.random.SeedSequence([cfg.seed, epoch])
            ).permutation(len(train_samples))
            net.train()
            losses = []
            for batch_index, lo in enumerate(range(0, len(order), cfg.batch_size)):
                chunk = [train_samples[i] for i in order[lo:lo + cfg.batch_size]]
                x, y = _batch_tensors(chunk, aug_cfg, epoch, cfg.seed, device)
                optimizer.zero_grad()
                loss = segmentation_loss(net(x), y, cfg.loss)
                value = float(loss.detach())
                if not np.isfinite(value):
                    raise TrainingDiverged(epoch, batch_index, value)
                loss.backward()
                optimizer.step()
                losses.append(value)
            report = metrics_mod.evaluate(net, val_samples, normalization=norm_mode,
                                          batch_size=cfg.batch_size, device=device)
            entry = EpochLog(epoch, float(np.mean(losses)), lr, report.dice,
                             time.time() - start)
            logs.append(entry)
            if log_fh:
                log_fh.write(json.dumps(entry.to_json()) + "\n")
                log_fh.flush()
            if best is None or report.dice > best.val_dice:
                best = snapshot(net, strategy, config_hash, epoch, report.dice)
    finally:
        if log_fh:
            log_fh.close()
    return net, logs, best


def save_checkpoint(ckpt: Checkpoint, path) -> None:
    tensors = dict(ckpt.parameters)
    tensors.update({f"__buffer__.{n}": v for n, v in ckpt.buffers.items()})
    digest = _payload_digest(tensors)
    archive = WeightArchive(tensors=tensors, meta={
        "config_hash": ckpt.config_hash,
        "epoch": ckpt.epoch,
        "val_dice": ckpt.val_dice,
        "trainability": ckpt.trainability,
        "payload_sha256": digest,
    })
    save_weight_archive(archive, path)


def load_checkpoint(path) -> Checkpoint:
    archive = load_weight_archive(path)
    meta = archive.meta
    digest = _payload_digest(archive.tensors)
    if digest != meta.get("payload_sha256"):
        raise CheckpointError(f"checkpoint {path} is corrupt: payload hash mismatch")
    parameters = {n: v for n, v in archive.tensors.items()
                  if not n.startswith("__buffer__.")}
    buffers = {n[len("__buffer__."):]: v for n, v in archive.tensors.items()
               if n.startswith("__buffer__.")}
    return Checkpoint(parameters, meta["trainability"], meta["config_hash"],
                      meta["epoch"], meta.get("val_dice", 0.0), buffers)


def restore_checkpoint(net, ckpt: Checkpoint):
    """Load checkpoint tensors into an architecture-compatible network."""
    with torch.no_grad():
        for name, param in net.named_parameters():
            if name not in ckpt.parameters:
                raise CheckpointError(f"checkpoint missing parameter {name!r}")
            arr = ckpt.parameters[name]
            if tuple(arr.shape) != tuple(param.shape):
                raise CheckpointError(
                    f"shape mismatch for {name!r}: checkpoint {tuple(arr.shape)}, "
                    f"model {tuple(param.shape)}"
                )
            param.copy_(torch.from_numpy(arr).to(param.dtype))
        for name, buf in net.named_buffers():
            if name.endswith("num_batches_tracked"):
                continue
            if name in ckpt.buffers:
                buf.copy_(torch.from_numpy(ckpt.buffers[name]).to(buf.dtype))
    return net


def _payload_digest(tensors: dict) -> str:
    h = hashlib.sha256()
    for name in sorted(tensors):
        h.update(name.encode())
        h.update(np.ascontiguousarray(tensors[name]).tobytes())
    return h.hexdigest()
