"""Experiment runner: the strategy x repeat grid, with resumable runs,
aggregation, and report emission."""

from __future__ import annotations

import dataclasses
import json
import os
import statistics
import tempfile
from dataclasses import dataclass, field

import torch

from .. import freeze_policy, metrics as metrics_mod, training
from ..data_pipeline import SplitConfig, load_hc18, resize, split, synthesize_phantoms
from ..freeze_policy import Strategy
from ..metrics import MetricReport
from ..net_core import (
    EncoderKind,
    MobileNetUNet,
    build_baseline_unet,
    build_mobilenet_unet,
    export_encoder_archive,
    load_weight_archive,
)
from ..net_core.unet import init_weights
from .config import ExperimentSpec
from .literature import LITERATURE_RESULTS

RESULT_FILE = "result.json"
EPOCH_LOG_FILE = "epochs.jsonl"
CHECKPOINT_FILE = "best.ckpt"


class ExperimentError(RuntimeError):
    pass


class AggregationError(ValueError):
    pass


@dataclass
class RunResult:
    strategy: Strategy
    repeat_index: int
    metrics: MetricReport
    trainable_params: int
    reduction_pct: float
    epoch_logs: list
    seed: int

    def to_json(self) -> dict:
        return {
            "strategy": self.strategy.value,
            "repeat_index": self.repeat_index,
            "metrics": self.metrics.to_json(),
            "trainable_params": self.trainable_params,
            "reduction_pct": self.reduction_pct,
            "epoch_logs": [log.to_json() for log in self.epoch_logs],
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, data: dict) -> "RunResult":
        return cls(
            strategy=Strategy(data["strategy"]),
            repeat_index=data["repeat_index"],
            metrics=MetricReport.from_json(data["metrics"]),
            trainable_params=data["trainable_params"],
            reduction_pct=data["reduction_pct"],
            epoch_logs=[training.EpochLog(**log) for log in data["epoch_logs"]],
            seed=data["seed"],
        )


@dataclass
class AggregateTable:
    rows: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"rows": self.rows}


def _write_json_atomic(payload: dict, path) -> None:
    directory = os.path.dirname(path)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(payload, fh, indent=2)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_encoder_archive(model_spec) -> "object":
    """Resolve the pretrained-encoder archive for a model config.

    `weights_path` is either a `.wts` file or `random:<seed>`, which
    snapshots a seeded randomly-initialized encoder. The latter exercises
    the full ingestion path when no converted ImageNet checkpoint is at
    hand (phantom experiments, tests).
    """
    path = model_spec.weights_path
    if path.startswith("random:"):
        seed = int(path.split(":", 1)[1])
        donor = MobileNetUNet()
        init_weights(donor, seed)
        return export_encoder_archive(donor, meta={"source_checkpoint": path})
    return load_weight_archive(path)


def prepare_data(spec: ExperimentSpec, repeat: int = 0):
    """Dataset load/synthesis plus the train/test split for one repeat."""
    if spec.dataset.kind == "phantom":
        samples = synthesize_phantoms(spec.dataset.phantom_n,
                                      spec.dataset.phantom_seed,
                                      spec.dataset.image_size)
    else:
        samples = [resize(s, spec.dataset.image_size)
                   for s in load_hc18(spec.dataset.root)]
    split_cfg = spec.split
    if spec.resplit_per_repeat:
        split_cfg = SplitConfig(split_cfg.total, split_cfg.train_count,
                                split_cfg.test_count, split_cfg.seed + repeat)
    return split(samples, split_cfg)


def build_model(spec: ExperimentSpec, seed: int, archive=None):
    model_spec = spec.model.build_spec()
    if model_spec.encoder_kind is EncoderKind.BASELINE_UNET:
        return build_baseline_unet(model_spec, seed=seed)
    return build_mobilenet_unet(model_spec, weights=archive, seed=seed)


def run_dir(spec: ExperimentSpec, strategy: Strategy, repeat: int) -> str:
    return os.path.join(spec.output_dir, strategy.value, str(repeat))


def execute_run(spec: ExperimentSpec, strategy: Strategy, repeat: int,
                data=None, archive=None, device: str = "cpu") -> RunResult:
    seed = spec.run_seed(strategy, repeat)
    torch.manual_seed(seed)
    if data is None:
        data = prepare_data(spec, repeat)
    train_samples, test_samples = data
    if archive is None and spec.model.pretrained:
        archive = load_encoder_archive(spec.model)
    net = build_model(spec, seed, archive)
    freeze_policy.apply(net, strategy,
                        allow_random_encoder=spec.model.allow_random_encoder)
    summary = freeze_policy.summarize(net, strategy)
    cfg = dataclasses.replace(spec.train, seed=seed)
    directory = run_dir(spec, strategy, repeat)
    os.makedirs(directory, exist_ok=True)
    net, logs, best = training.train(
        net, strategy, train_samples, test_samples, cfg,
        aug_cfg=spec.augmentation, device=device,
        log_path=os.path.join(directory, EPOCH_LOG_FILE),
    )
    training.restore_checkpoint(net, best)
    report = metrics_mod.evaluate(net, test_samples,
                                  normalization=spec.augmentation.normalization,
                                  batch_size=cfg.batch_size, device=device)
    result = RunResult(strategy, repeat, report, summary["trainable"],
                       summary["reduction_vs_baseline"], logs, seed)
    training.save_checkpoint(best, os.path.join(directory, CHECKPOINT_FILE))
    _write_json_atomic(result.to_json(), os.path.join(directory, RESULT_FILE))
    return result


def run_experiment(spec: ExperimentSpec, device: str = "cpu") -> list:
    """Run the full grid; completed runs (result.json on disk) are skipped."""
    os.makedirs(spec.output_dir, exist_ok=True)
    archive = load_encoder_archive(spec.model) if spec.model.pretrained else None
    shared_data = None if spec.resplit_per_repeat else prepare_data(spec)
    results = []
    failures = []
    for strategy, repeat in spec.planned_runs:
        result_path = os.path.join(run_dir(spec, strategy, repeat), RESULT_FILE)
        if os.path.exists(result_path):
            with open(result_path) as fh:
                results.append(RunResult.from_json(json.load(fh)))
            continue
        data = shared_data if shared_data is not None else prepare_data(spec, repeat)
        try:
            results.append(execute_run(spec, strategy, repeat, data=data,
                                       archive=archive, device=device))
        except Exception as exc:  # noqa: BLE001 - keep the grid going
            failures.append((strategy, repeat, exc))
            directory = run_dir(spec, strategy, repeat)
            os.makedirs(directory, exist_ok=True)
            _write_json_atomic({"strategy": strategy.value, "repeat": repeat,
                                "error": str(exc)},
                               os.path.join(directory, "error.json"))
    if failures:
        detail = "; ".join(f"{s.value}/{r}: {e}" for s, r, e in failures)
        raise ExperimentError(f"{len(failures)} run(s) failed: {detail}")
    return results


def load_results(results_dir) -> list:
    results = []
    for strategy_name in sorted(os.listdir(results_dir)):
        strategy_dir = os.path.join(results_dir, strategy_name)
        if not os.path.isdir(strategy_dir):
            continue
        for repeat_name in sorted(os.listdir(strategy_dir), key=_numeric_key):
            path = os.path.join(strategy_dir, repeat_name, RESULT_FILE)
            if os.path.exists(path):
                with open(path) as fh:
                    results.append(RunResult.from_json(json.load(fh)))
    return results


def _numeric_key(name):
    return (0, int(name)) if name.isdigit() else (1, name)


def aggregate(results, repeats: int | None = None) -> AggregateTable:
    """Per-strategy mean and sample std of each metric, in first-seen order."""
    if not results:
        raise AggregationError("no results to aggregate")
    grouped: dict = {}
    for result in results:
        grouped.setdefault(result.strategy, []).append(result)
    expected = repeats or max(len(v) for v in grouped.values())
    missing = []
    for strategy, group in grouped.items():
        have = {r.repeat_index for r in group}
        missing.extend((strategy.value, i) for i in range(expected) if i not in have)
    if missing:
        raise AggregationError(f"incomplete groups; missing runs: {missing}")
    rows = []
    for strategy, group in grouped.items():
        row = {"strategy": strategy.value, "n": len(group)}
        for key, getter in (("pa", lambda r: r.metrics.pixel_accuracy),
                            ("dice", lambda r: r.metrics.dice),
                            ("miou", lambda r: r.metrics.miou)):
            values = [getter(r) for r in group]
            row[f"{key}_mean"] = statistics.fmean(values)
            row[f"{key}_std"] = statistics.stdev(values) if len(values) > 1 else 0.0
        row["trainable_params"] = group[0].trainable_params
        row["reduction_pct"] = group[0].reduction_pct
        rows.append(row)
    return AggregateTable(rows)


_CSV_COLUMNS = ["strategy", "n", "pa_mean", "pa_std", "dice_mean", "dice_std",
                "miou_mean", "miou_std", "trainable_params", "reduction_pct"]


def emit_report(table: AggregateTable, out_dir, formats=("csv", "json"),
                include_literature: bool = False) -> list:
    """Write aggregate.{csv,json} plus optional markdown table and PNG chart."""
    if not table.rows:
        raise ValueError("empty aggregate table")
    os.makedirs(out_dir, exist_ok=True)
    written = []

    csv_path = os.path.join(out_dir, "aggregate.csv")
    with open(csv_path, "w") as fh:
        fh.write(",".join(_CSV_COLUMNS) + "\n")
        for row in table.rows:
            fh.write(",".join(str(row[c]) for c in _CSV_COLUMNS) + "\n")
    written.append(csv_path)

    json_path = os.path.join(out_dir, "aggregate.json")
    payload = table.to_json()
    if include_literature:
        payload["literature"] = LITERATURE_RESULTS
    _write_json_atomic(payload, json_path)
    written.append(json_path)

    if "md" in formats:
        written.append(_emit_markdown(table, out_dir, include_literature))
    if "png" in formats:
        written.append(_emit_chart(table, out_dir))
    return written


def _emit_markdown(table, out_dir, include_literature):
    path = os.path.join(out_dir, "aggregate.md")
    with open(path, "w") as fh:
        fh.write("| strategy | PA | Dice | mIoU | trainable | reduction % |\n")
        fh.write("|---|---|---|---|---|---|\n")
        for row in table.rows:
            fh.write(
                f"| {row['strategy']} "
                f"| {row['pa_mean']:.4f} ± {row['pa_std']:.4f} "
                f"| {row['dice_mean']:.4f} ± {row['dice_std']:.4f} "
                f"| {row['miou_mean']:.4f} ± {row['miou_std']:.4f} "
                f"| {row['trainable_params']:,} | {row['reduction_pct']} |\n"
            )
        if include_literature:
            fh.write("\nLiterature reference values (reported, not recomputed):\n\n")
            fh.write("| method | PA % | Dice % | mIoU % | trainable |\n")
            fh.write("|---|---|---|---|---|\n")
            for ref in LITERATURE_RESULTS:
                params = ref["trainable_params"]
                fh.write(
                    f"| {ref['method']} | {ref['pa'] or '-'} | {ref['dice'] or '-'} "
                    f"| {ref['miou'] or '-'} | {params or '-'} |\n"
                )
    return path


def _emit_chart(table, out_dir):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    path = os.path.join(out_dir, "aggregate.png")
    strategies = [row["strategy"] for row in table.rows]
    x = np.arange(len(strategies))
    width = 0.25
    fig, ax = plt.subplots(figsize=(max(8, len(strategies) * 1.4), 5))
    for offset, key, label in ((-width, "pa", "Pixel accuracy"),
                               (0.0, "dice", "Dice"),
                               (width, "miou", "mIoU")):
        means = [row[f"{key}_mean"] for row in table.rows]
        stds = [row[f"{key}_std"] for row in table.rows]
        ax.bar(x + offset, means, width, yerr=stds, capsize=3, label=label)
    ax.set_xticks(x)
    ax.set_xticklabels(strategies, rotation=30, ha="right")
    ax.set_ylabel("score")
    ax.set_ylim(0, 1.05)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def audit(spec: ExperimentSpec) -> list:
    """Parameter accounting per strategy; builds the architecture only,
    no weight loading and no training."""
    from ..net_core import SegmentationModelSpec

    arch = spec.model.build_spec()
    if arch.encoder_kind is EncoderKind.BASELINE_UNET:
        net = build_baseline_unet(arch, seed=0)
    else:
        net = build_mobilenet_unet(SegmentationModelSpec.mobilenet(pretrained=False),
                                   seed=0)
    baseline_total = freeze_policy.baseline_reference_total()
    rows = []
    for strategy in spec.strategies:
        summary = freeze_policy.summarize(net, strategy, baseline_total)
        rows.append({"strategy": strategy.value, **summary})
    return rows
