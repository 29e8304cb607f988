"""Classification metrics: confusion matrix, per-class precision/recall/F1,
accuracy, plus training-curve export.

Confusion matrices use rows for the actual class and columns for the
predicted class, in the fixed order green, light, medium, dark (the order
conventions vary between libraries, so this one is stated explicitly).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .dataset import LabeledSample, RoastClass
from .errors import DataError, ShapeError

TABLE_ORDER = (RoastClass.GREEN, RoastClass.LIGHT, RoastClass.MEDIUM, RoastClass.DARK)
TABLE_LABELS = tuple(c.label for c in TABLE_ORDER)


@dataclass(frozen=True)
class ConfusionMatrix:
    """4x4 count grid; counts[actual][predicted] in TABLE_ORDER."""

    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.shape != (4, 4):
            raise ShapeError(f"confusion matrix must be 4x4, got {c.shape}")
        if not np.issubdtype(c.dtype, np.integer) or (c < 0).any():
            raise DataError("confusion counts must be non-negative integers")
        object.__setattr__(self, "counts", c.astype(np.int64))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def trace(self) -> int:
        return int(np.trace(self.counts))


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class EvaluationReport:
    confusion: ConfusionMatrix
    per_class: dict  # label -> ClassMetrics, in TABLE_LABELS order
    accuracy: float
    dataset_tag: str = ""
    zero_division_classes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "dataset_tag": self.dataset_tag,
            "class_order": list(TABLE_LABELS),
            "confusion": self.confusion.counts.tolist(),
            "per_class": {
                label: {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                }
                for label, m in self.per_class.items()
            },
            "accuracy": self.accuracy,
            "zero_division_classes": list(self.zero_division_classes),
        }

    def format_table(self) -> str:
        """Human-readable per-class table (precision/recall/F1/support + accuracy)."""
        lines = [f"{'class':>10} {'precision':>10} {'recall':>10} {'f1':>10} {'support':>10}"]
        for label, m in self.per_class.items():
            lines.append(
                f"{label:>10} {m.precision:>10.4f} {m.recall:>10.4f} {m.f1:>10.4f} {m.support:>10d}"
            )
        lines.append("")
        lines.append(f"{'accuracy':>10} {self.accuracy:>10.4f} (n={self.confusion.total})")
        return "\n".join(lines)


def confusion_matrix(actuals: list[RoastClass], predictions: list[RoastClass]) -> ConfusionMatrix:
    """Count actual/predicted pairs into the 4x4 grid."""
    if len(actuals) != len(predictions):
        raise ShapeError(f"got {len(actuals)} actuals but {len(predictions)} predictions")
    if not actuals:
        raise DataError("cannot build a confusion matrix from zero samples")
    pos = {cls: i for i, cls in enumerate(TABLE_ORDER)}
    counts = np.zeros((4, 4), dtype=np.int64)
    for a, p in zip(actuals, predictions):
        counts[pos[a], pos[p]] += 1
    return ConfusionMatrix(counts)


def metrics_from_confusion(m: ConfusionMatrix, dataset_tag: str = "") -> EvaluationReport:
    """Per-class precision/recall/F1/support and overall accuracy.

    A class that was never predicted gets precision 0 and is listed in
    ``zero_division_classes`` rather than raising, so batch evaluation
    always completes.
    """
    counts = m.counts
    total = counts.sum()
    if total == 0:
        raise DataError("confusion matrix is empty")

    row_sums = counts.sum(axis=1)
    col_sums = counts.sum(axis=0)
    diag = np.diag(counts)

    per_class = {}
    zero_division = []
    for i, label in enumerate(TABLE_LABELS):
        if col_sums[i] == 0:
            precision = 0.0
            zero_division.append(label)
        else:
            precision = float(diag[i] / col_sums[i])
        recall = float(diag[i] / row_sums[i]) if row_sums[i] > 0 else 0.0
        f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
        per_class[label] = ClassMetrics(
            precision=precision, recall=recall, f1=f1, support=int(row_sums[i])
        )

    return EvaluationReport(
        confusion=m,
        per_class=per_class,
        accuracy=float(np.trace(counts) / total),
        dataset_tag=dataset_tag,
        zero_division_classes=tuple(zero_division),
    )


def evaluate(
    artifact,
    samples: list[LabeledSample],
    preprocess_config,
    dataset_tag: str = "",
    allow_preprocess_mismatch: bool = False,
) -> EvaluationReport:
    """Run the model over every sample and assemble a report."""
    from .model import predict  # local import to avoid a cycle

    if not samples:
        raise DataError("cannot evaluate on zero samples")
    actuals, predicted = [], []
    for sample in samples:
        try:
            pred = predict(
                artifact, sample.image_ref, preprocess_config,
                allow_preprocess_mismatch=allow_preprocess_mismatch,
            )
        except Exception as e:
            raise type(e)(f"prediction failed for sample {sample.image_ref}: {e}") from e
        actuals.append(sample.roast_class)
        predicted.append(pred.predicted_class)
    return metrics_from_confusion(confusion_matrix(actuals, predicted), dataset_tag=dataset_tag)


def export_curves(histories: list, output_path: str | Path) -> dict:
    """Plot accuracy and loss vs epoch, one panel per fold, plus a JSON table.

    Writes a PNG figure at ``output_path`` and the same numbers as JSON next
    to it (same stem, .json suffix). Returns the paths and the panel count.
    """
    if not histories:
        raise DataError("no training histories to export")
    for h in histories:
        if not h.train_accuracy:
            raise DataError("history with zero epochs cannot be exported")

    out_png = Path(output_path)
    out_json = out_png.with_suffix(".json")

    n = len(histories)
    ncols = min(3, n)
    nrows = (n + ncols - 1) // ncols
    fig, axes = plt.subplots(nrows, ncols, figsize=(5 * ncols, 3.5 * nrows), squeeze=False)
    sections = []
    for i, h in enumerate(histories):
        ax = axes[i // ncols][i % ncols]
        epochs = list(range(1, len(h.train_accuracy) + 1))
        ax.plot(epochs, h.train_accuracy, label="train acc", color="tab:blue")
        ax.plot(epochs, h.val_accuracy, label="val acc", color="tab:orange")
        ax.set_ylabel("accuracy")
        ax.set_xlabel("epoch")
        ax2 = ax.twinx()
        ax2.plot(epochs, h.train_loss, label="train loss", color="tab:blue", linestyle="--", alpha=0.6)
        ax2.plot(epochs, h.val_loss, label="val loss", color="tab:orange", linestyle="--", alpha=0.6)
        ax2.set_ylabel("loss")
        title = "training" if h.fold_index is None else f"fold {h.fold_index}"
        ax.set_title(title)
        ax.legend(loc="lower right", fontsize=8)
        sections.append(
            {
                "fold_index": h.fold_index,
                "epoch": epochs,
                "train_accuracy": list(h.train_accuracy),
                "train_loss": list(h.train_loss),
                "val_accuracy": list(h.val_accuracy),
                "val_loss": list(h.val_loss),
            }
        )
    for j in range(n, nrows * ncols):
        axes[j // ncols][j % ncols].axis("off")
    fig.tight_layout()
    fig.savefig(out_png, dpi=110)
    plt.close(fig)

    out_json.write_text(json.dumps(sections, indent=2) + "\n", encoding="utf-8")
    return {"figure": str(out_png), "table": str(out_json), "panels": n}
