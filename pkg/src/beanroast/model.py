"""Roast classifier: pretrained feature backbone (or a from-scratch fallback
CNN) with a batch-norm + dropout head, training, k-fold cross-validation,
prediction, and single-file HDF5 persistence.

The classifier head is: global average pooling -> batch normalization ->
dropout -> dense ReLU layer -> dense 4-way output. When the pretrained
backbone cannot be fetched (offline environments) the model falls back to a
small CNN (three conv blocks of 16/32/64 3x3 filters with ReLU and 2x2 max
pooling) trained from scratch; the artifact records that this happened.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import h5py
import numpy as np
import torch
from torch import nn

from .dataset import FoldPlan, LabeledSample, RoastClass, make_folds
from .errors import (
    ArtifactError,
    CompatibilityError,
    ColorSpaceError,
    ConfigError,
    DataError,
    TrainingError,
)
from .imaging import (
    FLOAT01,
    RGB8,
    AugmentConfig,
    PreprocessConfig,
    RasterImage,
    augment,
    preprocess,
    read_image,
)

logger = logging.getLogger(__name__)

BACKBONE_CHOICES = ("auto", "mobilenet_v2", "fallback_cnn")
FALLBACK_BACKBONE_ID = "fallback_cnn"
ARTIFACT_FORMAT_VERSION = 1

_PREDICT_CHUNK = 32


@dataclass(frozen=True)
class TrainingConfig:
    """Training hyperparameters for the roast classifier."""

    split_ratios: tuple[float, float, float] = (0.6, 0.2, 0.2)
    target_size: tuple[int, int] = (224, 224)
    batch_size: int = 32
    hidden_activation: str = "relu"
    output_activation: str = "softmax"
    optimizer: str = "adam"
    learning_rate: float = 1e-5
    k_folds: int = 5
    epochs: int = 20
    dropout_rate: float = 0.3
    seed: int = 0
    hidden_units: int = 64
    backbone: str = "auto"
    freeze_backbone: bool | None = None  # None: freeze only when pretrained

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if not (0 <= self.dropout_rate < 1):
            raise ConfigError(f"dropout_rate must lie in [0, 1), got {self.dropout_rate}")
        if self.k_folds < 2:
            raise ConfigError(f"k_folds must be >= 2, got {self.k_folds}")
        if self.hidden_units < 1:
            raise ConfigError(f"hidden_units must be >= 1, got {self.hidden_units}")
        if self.hidden_activation != "relu":
            raise ConfigError(f"unsupported hidden activation {self.hidden_activation!r}")
        if self.output_activation != "softmax":
            raise ConfigError(f"unsupported output activation {self.output_activation!r}")
        if self.optimizer != "adam":
            raise ConfigError(f"unsupported optimizer {self.optimizer!r}")
        if self.backbone not in BACKBONE_CHOICES:
            raise ConfigError(f"backbone must be one of {BACKBONE_CHOICES}, got {self.backbone!r}")
        if abs(sum(self.split_ratios) - 1.0) > 1e-9:
            raise ConfigError("split_ratios must sum to 1")

    def to_dict(self) -> dict:
        return {
            "split_ratios": list(self.split_ratios),
            "target_size": list(self.target_size),
            "batch_size": self.batch_size,
            "hidden_activation": self.hidden_activation,
            "output_activation": self.output_activation,
            "optimizer": self.optimizer,
            "learning_rate": self.learning_rate,
            "k_folds": self.k_folds,
            "epochs": self.epochs,
            "dropout_rate": self.dropout_rate,
            "seed": self.seed,
            "hidden_units": self.hidden_units,
            "backbone": self.backbone,
            "freeze_backbone": self.freeze_backbone,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainingConfig":
        return cls(
            split_ratios=tuple(d["split_ratios"]),
            target_size=tuple(d["target_size"]),
            batch_size=int(d["batch_size"]),
            hidden_activation=d["hidden_activation"],
            output_activation=d["output_activation"],
            optimizer=d["optimizer"],
            learning_rate=float(d["learning_rate"]),
            k_folds=int(d["k_folds"]),
            epochs=int(d["epochs"]),
            dropout_rate=float(d["dropout_rate"]),
            seed=int(d["seed"]),
            hidden_units=int(d["hidden_units"]),
            backbone=d["backbone"],
            freeze_backbone=d["freeze_backbone"],
        )


def softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable exp-normalization along the last axis."""
    x = np.asarray(logits, dtype=np.float64)
    if not np.isfinite(x).all():
        raise DataError("softmax requires finite logits")
    shifted = x - x.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


class _RoastNet(nn.Module):
    def __init__(self, backbone: nn.Module, feat_dim: int, hidden_units: int, dropout_rate: float):
        super().__init__()
        self.backbone = backbone
        self.pool = nn.AdaptiveAvgPool2d(1)
        self.bn = nn.BatchNorm1d(feat_dim)
        self.dropout = nn.Dropout(dropout_rate)
        self.hidden = nn.Linear(feat_dim, hidden_units)
        self.out = nn.Linear(hidden_units, len(RoastClass))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        f = self.backbone(x)
        f = self.pool(f).flatten(1)
        f = self.bn(f)
        f = self.dropout(f)
        f = torch.relu(self.hidden(f))
        return self.out(f)  # logits


def _to_input_tensor(batch: np.ndarray) -> torch.Tensor:
    """NHWC float32 numpy -> channels-last NCHW tensor (no relayout copy)."""
    t = torch.from_numpy(np.ascontiguousarray(batch)).permute(0, 3, 1, 2)
    return t.to(memory_format=torch.channels_last)


def _fallback_backbone() -> tuple[nn.Module, int]:
    blocks = nn.Sequential(
        nn.Conv2d(3, 16, 3, padding=1), nn.ReLU(), nn.MaxPool2d(2),
        nn.Conv2d(16, 32, 3, padding=1), nn.ReLU(), nn.MaxPool2d(2),
        nn.Conv2d(32, 64, 3, padding=1), nn.ReLU(), nn.MaxPool2d(2),
    )
    return blocks, 64


def _pretrained_backbone() -> tuple[nn.Module, int]:
    from torchvision.models import MobileNet_V2_Weights, mobilenet_v2

    net = mobilenet_v2(weights=MobileNet_V2_Weights.IMAGENET1K_V1)
    return net.features, 1280


def _architecture(backbone_id: str) -> tuple[nn.Module, int]:
    """Backbone architecture without any weight download (for artifact loading)."""
    if backbone_id == FALLBACK_BACKBONE_ID:
        return _fallback_backbone()
    if backbone_id == "mobilenet_v2":
        from torchvision.models import mobilenet_v2

        return mobilenet_v2(weights=None).features, 1280
    raise ArtifactError(f"unknown backbone id {backbone_id!r}")


@dataclass
class RoastModel:
    """A (possibly untrained) classifier: torch network plus build metadata."""

    net: _RoastNet
    backbone_id: str
    fallback_used: bool
    config: TrainingConfig

    def predict_proba(self, batch: np.ndarray) -> np.ndarray:
        """Probabilities for a (N, H, W, 3) float batch in [0, 1]; rows sum to 1."""
        x = np.ascontiguousarray(np.asarray(batch, dtype=np.float32))
        if x.ndim != 4 or x.shape[3] != 3:
            raise DataError(f"expected a (N, H, W, 3) batch, got shape {x.shape}")
        self.net.eval()
        outputs = []
        with torch.no_grad():
            for start in range(0, len(x), _PREDICT_CHUNK):
                chunk = _to_input_tensor(x[start:start + _PREDICT_CHUNK])
                outputs.append(self.net(chunk).numpy())
        return softmax(np.concatenate(outputs, axis=0).astype(np.float64))

    def trainable_parameters(self):
        return [p for p in self.net.parameters() if p.requires_grad]


def build_model(config: TrainingConfig) -> RoastModel:
    """Assemble the classifier network.

    Tries the pretrained backbone unless the config forces the fallback; any
    failure to obtain pretrained weights (typically: no network) silently
    selects the documented small CNN and flags it.
    """
    torch.manual_seed(config.seed)
    fallback_used = False
    if config.backbone == "fallback_cnn":
        backbone, feat_dim = _fallback_backbone()
        backbone_id = FALLBACK_BACKBONE_ID
    else:
        try:
            backbone, feat_dim = _pretrained_backbone()
            backbone_id = "mobilenet_v2"
        except Exception as e:  # weights unavailable offline
            logger.warning("pretrained backbone unavailable (%s); using fallback CNN", e)
            backbone, feat_dim = _fallback_backbone()
            backbone_id = FALLBACK_BACKBONE_ID
            fallback_used = True

    pretrained = backbone_id == "mobilenet_v2"
    freeze = config.freeze_backbone if config.freeze_backbone is not None else pretrained
    if freeze:
        for p in backbone.parameters():
            p.requires_grad = False

    net = _RoastNet(backbone, feat_dim, config.hidden_units, config.dropout_rate)
    net = net.to(memory_format=torch.channels_last)  # faster CPU convolutions
    net.eval()
    return RoastModel(net=net, backbone_id=backbone_id, fallback_used=fallback_used, config=config)


@dataclass
class TrainingHistory:
    """Per-epoch curves for one training run (one fold, or the single split)."""

    train_accuracy: list[float] = field(default_factory=list)
    train_loss: list[float] = field(default_factory=list)
    val_accuracy: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    fold_index: int | None = None

    def __len__(self) -> int:
        return len(self.train_accuracy)

    def to_dict(self) -> dict:
        return {
            "fold_index": self.fold_index,
            "train_accuracy": self.train_accuracy,
            "train_loss": self.train_loss,
            "val_accuracy": self.val_accuracy,
            "val_loss": self.val_loss,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainingHistory":
        return cls(
            train_accuracy=[float(x) for x in d["train_accuracy"]],
            train_loss=[float(x) for x in d["train_loss"]],
            val_accuracy=[float(x) for x in d["val_accuracy"]],
            val_loss=[float(x) for x in d["val_loss"]],
            fold_index=d.get("fold_index"),
        )


@dataclass(frozen=True)
class Prediction:
    probabilities: np.ndarray  # 4-vector, sums to 1
    predicted_class: RoastClass
    confidence_percent: float

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=np.float64)
        if p.shape != (len(RoastClass),):
            raise DataError(f"probabilities must be a 4-vector, got shape {p.shape}")
        if abs(p.sum() - 1.0) > 1e-6:
            raise DataError(f"probabilities must sum to 1, got {p.sum()!r}")
        object.__setattr__(self, "probabilities", p)

    @classmethod
    def from_probabilities(cls, probs: np.ndarray) -> "Prediction":
        p = np.asarray(probs, dtype=np.float64)
        idx = int(np.argmax(p))  # ties resolve to the lowest class index
        return cls(
            probabilities=p,
            predicted_class=RoastClass(idx),
            confidence_percent=float(100.0 * p[idx]),
        )

    def to_dict(self) -> dict:
        return {
            "probabilities": {c.label: float(self.probabilities[int(c)]) for c in RoastClass},
            "predicted_class": self.predicted_class.label,
            "confidence_percent": self.confidence_percent,
        }


@dataclass
class ModelArtifact:
    """Everything needed to serve the trained model safely."""

    model: RoastModel
    class_mapping: dict  # index -> label
    input_size: tuple[int, int, int]
    preprocess_fingerprint: str
    training_config: dict
    metrics_summary: dict

    @property
    def backbone_id(self) -> str:
        return self.model.backbone_id

    @property
    def fallback_used(self) -> bool:
        return self.model.fallback_used


def prepare_features(
    samples: list[LabeledSample], preprocess_config: PreprocessConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Preprocess every sample into a float32 (N, H, W, 3) tensor plus labels."""
    if not samples:
        raise DataError("no samples to prepare")
    xs, ys = [], []
    for s in samples:
        img = s.image_ref if isinstance(s.image_ref, RasterImage) else read_image(s.image_ref)
        xs.append(preprocess(img, preprocess_config).pixels.astype(np.float32))
        ys.append(int(s.roast_class))
    return np.stack(xs), np.asarray(ys, dtype=np.int64)


def train(
    model: RoastModel,
    train_samples: list[LabeledSample],
    val_samples: list[LabeledSample],
    config: TrainingConfig,
    preprocess_config: PreprocessConfig,
    augment_config: AugmentConfig | None = None,
) -> tuple[ModelArtifact, TrainingHistory]:
    """Train on preprocessed samples; augmentation is applied to training data only."""
    if not train_samples or not val_samples:
        raise DataError("training and validation sets must be non-empty")
    x_train, y_train = prepare_features(train_samples, preprocess_config)
    x_val, y_val = prepare_features(val_samples, preprocess_config)
    return train_on_arrays(
        model, x_train, y_train, x_val, y_val, config, preprocess_config, augment_config
    )


def train_on_arrays(
    model: RoastModel,
    x_train: np.ndarray,
    y_train: np.ndarray,
    x_val: np.ndarray,
    y_val: np.ndarray,
    config: TrainingConfig,
    preprocess_config: PreprocessConfig,
    augment_config: AugmentConfig | None = None,
    fold_index: int | None = None,
) -> tuple[ModelArtifact, TrainingHistory]:
    """Core training loop over already-preprocessed float tensors.

    Minimizes categorical cross-entropy with Adam; records per-epoch train and
    validation accuracy/loss. Deterministic for a fixed config seed.
    """
    present = set(int(v) for v in np.unique(y_train))
    missing = [c.label for c in RoastClass if int(c) not in present]
    if missing:
        raise DataError(f"training set is missing classes: {', '.join(missing)}")

    if augment_config is None:
        augment_config = AugmentConfig(seed=config.seed)

    torch.manual_seed(config.seed)
    shuffle_rng = np.random.default_rng(config.seed)
    net = model.net
    freeze = any(not p.requires_grad for p in net.backbone.parameters())
    optimizer = torch.optim.Adam(model.trainable_parameters(), lr=config.learning_rate)
    loss_fn = nn.CrossEntropyLoss()
    history = TrainingHistory(fold_index=fold_index)

    for epoch in range(config.epochs):
        net.train()
        if freeze:
            net.backbone.eval()  # keep pretrained batch-norm statistics fixed
        order = shuffle_rng.permutation(len(x_train))
        batches = _batch_indices(order, config.batch_size)

        epoch_loss, epoch_correct = 0.0, 0
        for batch in batches:
            xb = _augment_batch(x_train, batch, augment_config, epoch)
            tb = _to_input_tensor(xb)
            yb = torch.from_numpy(y_train[batch])
            optimizer.zero_grad()
            logits = net(tb)
            loss = loss_fn(logits, yb)
            if not torch.isfinite(loss):
                raise TrainingError(f"loss diverged (non-finite) at epoch {epoch + 1}")
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.detach()) * len(batch)
            epoch_correct += int((logits.detach().argmax(dim=1) == yb).sum())

        val_loss, val_acc = _evaluate_arrays(net, x_val, y_val, loss_fn)
        history.train_loss.append(epoch_loss / len(x_train))
        history.train_accuracy.append(epoch_correct / len(x_train))
        history.val_loss.append(val_loss)
        history.val_accuracy.append(val_acc)
        logger.info(
            "epoch %d/%d: train acc %.4f loss %.4f | val acc %.4f loss %.4f",
            epoch + 1, config.epochs,
            history.train_accuracy[-1], history.train_loss[-1], val_acc, val_loss,
        )

    _recalibrate_batch_norm(net, x_train, config.batch_size, frozen_backbone=freeze)
    net.eval()
    metrics_summary = {
        "final_train_accuracy": history.train_accuracy[-1],
        "final_train_loss": history.train_loss[-1],
        "final_val_accuracy": history.val_accuracy[-1],
        "final_val_loss": history.val_loss[-1],
        "best_val_accuracy": max(history.val_accuracy),
        "epochs_run": len(history),
    }
    artifact = ModelArtifact(
        model=model,
        class_mapping={int(c): c.label for c in RoastClass},
        input_size=(config.target_size[0], config.target_size[1], 3),
        preprocess_fingerprint=preprocess_config.fingerprint(),
        training_config=config.to_dict(),
        metrics_summary=metrics_summary,
    )
    return artifact, history


def _recalibrate_batch_norm(
    net: _RoastNet, x_train: np.ndarray, batch_size: int, frozen_backbone: bool
) -> None:
    """Replace batch-norm running statistics with exact full-pass statistics.

    Running averages lag behind the final weights after training; inference
    mode then normalizes with stale statistics, which shows up as erratic
    validation accuracy. One cumulative pass over the un-augmented training
    data pins the statistics to what the final network actually produces.
    Frozen pretrained backbones keep their stored statistics untouched.
    """
    bn_modules = [m for m in net.modules() if isinstance(m, nn.modules.batchnorm._BatchNorm)]
    if frozen_backbone:
        backbone_bns = {id(m) for m in net.backbone.modules()
                        if isinstance(m, nn.modules.batchnorm._BatchNorm)}
        bn_modules = [m for m in bn_modules if id(m) not in backbone_bns]
    if not bn_modules:
        return

    saved_momentum = [m.momentum for m in bn_modules]
    for m in bn_modules:
        m.reset_running_stats()
        m.momentum = None  # cumulative moving average
    net.train()
    if frozen_backbone:
        net.backbone.eval()
    with torch.no_grad():
        for batch in _batch_indices(np.arange(len(x_train)), batch_size):
            net(_to_input_tensor(x_train[batch]))
    for m, momentum in zip(bn_modules, saved_momentum):
        m.momentum = momentum


def _batch_indices(order: np.ndarray, batch_size: int) -> list[np.ndarray]:
    batches = [order[i:i + batch_size] for i in range(0, len(order), batch_size)]
    if len(batches) > 1 and len(batches[-1]) == 1:
        # batch-norm needs at least 2 samples in training mode
        batches[-2] = np.concatenate([batches[-2], batches[-1]])
        batches.pop()
    return batches


def _augment_batch(
    x: np.ndarray, batch: np.ndarray, augment_config: AugmentConfig, epoch: int
) -> np.ndarray:
    out = np.empty((len(batch),) + x.shape[1:], dtype=np.float32)
    for row, j in enumerate(batch):
        seed = int(np.random.SeedSequence((augment_config.seed, epoch, int(j))).generate_state(1)[0])
        img = RasterImage(x[j], FLOAT01)
        out[row] = augment(img, augment_config.reseeded(seed)).pixels.astype(np.float32)
    return out


def _evaluate_arrays(net: _RoastNet, x: np.ndarray, y: np.ndarray, loss_fn) -> tuple[float, float]:
    net.eval()
    total_loss, correct = 0.0, 0
    with torch.no_grad():
        for start in range(0, len(x), _PREDICT_CHUNK):
            xb = _to_input_tensor(x[start:start + _PREDICT_CHUNK])
            yb = torch.from_numpy(y[start:start + _PREDICT_CHUNK])
            logits = net(xb)
            total_loss += float(loss_fn(logits, yb)) * len(yb)
            correct += int((logits.argmax(dim=1) == yb).sum())
    return total_loss / len(x), correct / len(x)


@dataclass
class KFoldResult:
    """Outputs of a k-fold cross-validation run."""

    plan: FoldPlan
    fold_artifacts: list[ModelArtifact]
    fold_histories: list[TrainingHistory]
    fold_reports: list  # list[EvaluationReport]
    aggregate_report: object  # EvaluationReport over all validation folds
    mean_accuracy: float
    std_accuracy: float
    best_fold_index: int

    @property
    def best_artifact(self) -> ModelArtifact:
        return self.fold_artifacts[self.best_fold_index]


def train_kfold(
    samples: list[LabeledSample],
    config: TrainingConfig,
    preprocess_config: PreprocessConfig,
    augment_config: AugmentConfig | None = None,
) -> KFoldResult:
    """Run k rounds of training, each fold held out for validation once.

    Fold accuracies are aggregated as mean +- standard deviation; the artifact
    from the best-validation-accuracy fold is the deployable model.
    """
    from .metrics import ConfusionMatrix, confusion_matrix, metrics_from_confusion

    plan = make_folds(samples, config.k_folds, config.seed)
    x_all, y_all = prepare_features(samples, preprocess_config)
    return _kfold_on_arrays(
        x_all, y_all, plan, config, preprocess_config, augment_config,
        confusion_matrix, metrics_from_confusion, ConfusionMatrix,
    )


def kfold_on_arrays(
    x_all: np.ndarray,
    y_all: np.ndarray,
    plan: FoldPlan,
    config: TrainingConfig,
    preprocess_config: PreprocessConfig,
    augment_config: AugmentConfig | None = None,
) -> KFoldResult:
    """k-fold over already-preprocessed tensors (avoids re-reading images)."""
    from .metrics import ConfusionMatrix, confusion_matrix, metrics_from_confusion

    return _kfold_on_arrays(
        x_all, y_all, plan, config, preprocess_config, augment_config,
        confusion_matrix, metrics_from_confusion, ConfusionMatrix,
    )


def _kfold_on_arrays(
    x_all, y_all, plan, config, preprocess_config, augment_config,
    confusion_matrix, metrics_from_confusion, ConfusionMatrix,
):
    artifacts, histories, reports = [], [], []
    for fold in range(plan.k):
        tr_idx = plan.training_indices(fold)
        va_idx = plan.validation_indices(fold)
        model = build_model(config)
        artifact, history = train_on_arrays(
            model,
            x_all[tr_idx], y_all[tr_idx],
            x_all[va_idx], y_all[va_idx],
            config, preprocess_config, augment_config, fold_index=fold,
        )
        probs = model.predict_proba(x_all[va_idx])
        predicted = [RoastClass(int(i)) for i in probs.argmax(axis=1)]
        actual = [RoastClass(int(v)) for v in y_all[va_idx]]
        reports.append(
            metrics_from_confusion(confusion_matrix(actual, predicted), dataset_tag=f"fold-{fold}")
        )
        artifacts.append(artifact)
        histories.append(history)
        logger.info("fold %d validation accuracy: %.4f", fold, reports[-1].accuracy)

    accuracies = np.array([r.accuracy for r in reports], dtype=np.float64)
    summed = ConfusionMatrix(sum(r.confusion.counts for r in reports))
    aggregate = metrics_from_confusion(summed, dataset_tag="kfold-aggregate")
    best = int(np.argmax(accuracies))
    return KFoldResult(
        plan=plan,
        fold_artifacts=artifacts,
        fold_histories=histories,
        fold_reports=reports,
        aggregate_report=aggregate,
        mean_accuracy=float(accuracies.mean()),
        std_accuracy=float(accuracies.std()),
        best_fold_index=best,
    )


def predict(
    artifact: ModelArtifact,
    image: RasterImage | str | Path,
    preprocess_config: PreprocessConfig,
    allow_preprocess_mismatch: bool = False,
) -> Prediction:
    """Preprocess one image and run the classifier.

    The serving preprocess configuration must match the one the model was
    trained with (by fingerprint) unless explicitly overridden.
    """
    if preprocess_config.fingerprint() != artifact.preprocess_fingerprint:
        if not allow_preprocess_mismatch:
            raise CompatibilityError(
                "preprocess configuration does not match the model artifact "
                f"(expected fingerprint {artifact.preprocess_fingerprint[:12]}...); "
                "pass allow_preprocess_mismatch=True to override"
            )
    if isinstance(image, (str, Path)):
        image = read_image(image)
    if image.color_space != RGB8:
        raise ColorSpaceError(f"predict requires an RGB8 image, got {image.color_space}")
    x = preprocess(image, preprocess_config).pixels.astype(np.float32)[None]
    probs = artifact.model.predict_proba(x)[0]
    return Prediction.from_probabilities(probs)


# ---------------------------------------------------------------------------
# Persistence (single-file HDF5 container)
# ---------------------------------------------------------------------------

def save_model(artifact: ModelArtifact, path: str | Path) -> None:
    """Write the artifact to one HDF5 file: weights + JSON metadata attribute."""
    meta = {
        "format_version": ARTIFACT_FORMAT_VERSION,
        "backbone_id": artifact.backbone_id,
        "fallback_used": artifact.fallback_used,
        "class_mapping": {str(k): v for k, v in artifact.class_mapping.items()},
        "input_size": list(artifact.input_size),
        "preprocess_fingerprint": artifact.preprocess_fingerprint,
        "training_config": artifact.training_config,
        "metrics_summary": artifact.metrics_summary,
    }
    with h5py.File(path, "w", track_order=True) as f:
        f.attrs["beanroast_meta"] = json.dumps(meta)
        grp = f.create_group("weights", track_order=True)
        for key, tensor in artifact.model.net.state_dict().items():
            # track_times off keeps artifact bytes reproducible across runs
            grp.create_dataset(key, data=tensor.numpy(), track_times=False)


def load_model(path: str | Path) -> ModelArtifact:
    """Load an artifact saved by :func:`save_model`; bitwise-faithful weights."""
    try:
        with h5py.File(path, "r") as f:
            meta = json.loads(f.attrs["beanroast_meta"])
            weights = {key: np.array(ds) for key, ds in f["weights"].items()}
    except (OSError, KeyError, ValueError) as e:
        raise ArtifactError(f"cannot load model artifact from {path}: {e}") from e

    try:
        config = TrainingConfig.from_dict(meta["training_config"])
        backbone_id = meta["backbone_id"]
        backbone, feat_dim = _architecture(backbone_id)
        net = _RoastNet(backbone, feat_dim, config.hidden_units, config.dropout_rate)
        net.load_state_dict({k: torch.from_numpy(v) for k, v in weights.items()})
    except (KeyError, RuntimeError, ValueError) as e:
        raise ArtifactError(f"model artifact {path} is corrupt: {e}") from e
    net = net.to(memory_format=torch.channels_last)
    net.eval()

    model = RoastModel(
        net=net,
        backbone_id=backbone_id,
        fallback_used=bool(meta["fallback_used"]),
        config=config,
    )
    return ModelArtifact(
        model=model,
        class_mapping={int(k): v for k, v in meta["class_mapping"].items()},
        input_size=tuple(meta["input_size"]),
        preprocess_fingerprint=meta["preprocess_fingerprint"],
        training_config=meta["training_config"],
        metrics_summary=meta["metrics_summary"],
    )
