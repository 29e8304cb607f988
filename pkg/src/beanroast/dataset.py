"""Dataset handling: class-per-directory loading, stratified splits, k-fold
plans, and a synthetic bean-image generator.

The generator renders ellipse "beans" with class-conditioned body color over
one of three background styles (white lightbox, wooden table, glass jar) and
records the ground-truth bean-area fraction, so downstream stages can be
verified at desk scale without the original photo corpus.
"""
from __future__ import annotations

import enum
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, LayoutError
from .imaging import RGB8, RasterImage, write_image

logger = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


class RoastClass(enum.IntEnum):
    """The four roast degrees; indices are frozen alphabetically."""

    DARK = 0
    GREEN = 1
    LIGHT = 2
    MEDIUM = 3

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "RoastClass":
        try:
            return cls[label.upper()]
        except KeyError:
            raise DataError(f"unknown roast class {label!r}") from None


CLASS_LABELS = tuple(c.label for c in RoastClass)  # ("dark", "green", "light", "medium")


@dataclass(frozen=True)
class LabeledSample:
    """One dataset element: an image (path or in-memory) plus its class."""

    image_ref: Path | RasterImage
    roast_class: RoastClass
    source_tag: str = ""


@dataclass(frozen=True)
class DatasetSplit:
    train: list[LabeledSample]
    validation: list[LabeledSample]
    test: list[LabeledSample]
    seed: int
    ratios: tuple[float, float, float]

    def __len__(self) -> int:
        return len(self.train) + len(self.validation) + len(self.test)


@dataclass(frozen=True)
class FoldPlan:
    """Stratified k-fold assignment, aligned with the sample list it was built from."""

    k: int
    seed: int
    assignments: tuple[int, ...]  # fold index per sample position

    def validation_indices(self, fold: int) -> list[int]:
        return [i for i, f in enumerate(self.assignments) if f == fold]

    def training_indices(self, fold: int) -> list[int]:
        return [i for i, f in enumerate(self.assignments) if f != fold]


def load_dataset(root_directory: str | Path) -> list[LabeledSample]:
    """Load a class-per-directory dataset (dark/, green/, light/, medium/).

    Files are ordered lexicographically within each class. Files that are not
    readable PNG/JPEG images are skipped with a logged warning.
    """
    root = Path(root_directory)
    missing = [label for label in CLASS_LABELS if not (root / label).is_dir()]
    if missing:
        raise LayoutError(f"missing class directories under {root}: {', '.join(missing)}")

    samples: list[LabeledSample] = []
    for cls in sorted(RoastClass):
        class_dir = root / cls.label
        count = 0
        for path in sorted(p for p in class_dir.iterdir() if p.is_file()):
            if path.suffix.lower() not in IMAGE_SUFFIXES:
                logger.warning("skipping non-image file %s", path)
                continue
            if not _looks_like_image(path):
                logger.warning("skipping unreadable image file %s", path)
                continue
            samples.append(LabeledSample(image_ref=path, roast_class=cls))
            count += 1
        if count == 0:
            logger.warning("class directory %s contains no readable images", class_dir)
    return samples


def _looks_like_image(path: Path) -> bool:
    try:
        head = path.open("rb").read(8)
    except OSError:
        return False
    return head.startswith(b"\x89PNG\r\n\x1a\n") or head.startswith(b"\xff\xd8")


def split_dataset(
    samples: list[LabeledSample],
    ratios: tuple[float, float, float] = (0.6, 0.2, 0.2),
    seed: int = 0,
) -> DatasetSplit:
    """Stratified shuffle-then-cut split into train/validation/test.

    Deterministic for fixed (samples, ratios, seed); per-class part sizes are
    within +-1 of the ideal fraction.
    """
    if len(ratios) != 3:
        raise ConfigError("ratios must be a (train, validation, test) triple")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigError(f"ratios must sum to 1, got {sum(ratios)}")
    if any(r < 0 for r in ratios):
        raise ConfigError("ratios must be non-negative")

    by_class = _group_by_class(samples)
    for cls, members in by_class.items():
        if len(members) < 3:
            raise DataError(f"class {cls.label} has {len(members)} samples, need at least 3")

    rng = np.random.default_rng(seed)
    train: list[LabeledSample] = []
    validation: list[LabeledSample] = []
    test: list[LabeledSample] = []
    for cls in sorted(by_class):
        members = by_class[cls]
        order = rng.permutation(len(members))
        n = len(members)
        cut1 = int(np.floor(n * ratios[0] + 0.5))
        cut2 = int(np.floor(n * (ratios[0] + ratios[1]) + 0.5))
        train.extend(members[i] for i in order[:cut1])
        validation.extend(members[i] for i in order[cut1:cut2])
        test.extend(members[i] for i in order[cut2:])
    return DatasetSplit(train=train, validation=validation, test=test, seed=seed, ratios=tuple(ratios))


def make_folds(samples: list[LabeledSample], k: int, seed: int = 0) -> FoldPlan:
    """Stratified k-fold plan; every sample lands in exactly one fold and
    per-class fold sizes differ by at most one."""
    if k < 2:
        raise ConfigError(f"k must be at least 2, got {k}")
    by_class = _group_by_class(samples, indices=True)
    for cls, members in by_class.items():
        if len(members) < k:
            raise ConfigError(f"class {cls.label} has {len(members)} samples, fewer than k={k}")

    rng = np.random.default_rng(seed)
    assignments = [0] * len(samples)
    for cls in sorted(by_class):
        idx = by_class[cls]
        order = rng.permutation(len(idx))
        for pos, j in enumerate(order):
            assignments[idx[j]] = pos % k
    return FoldPlan(k=k, seed=seed, assignments=tuple(assignments))


def _group_by_class(samples: list[LabeledSample], indices: bool = False) -> dict:
    grouped: dict[RoastClass, list] = {cls: [] for cls in RoastClass}
    for i, s in enumerate(samples):
        grouped[s.roast_class].append(i if indices else s)
    return {cls: members for cls, members in grouped.items() if members}


# ---------------------------------------------------------------------------
# Synthetic generation
# ---------------------------------------------------------------------------

BACKGROUND_MODES = ("lightbox_white", "natural_wood", "glass_jar")

# Invented stand-in colors for the four roast degrees; configurable, never
# treated as ground truth about real beans.
DEFAULT_CLASS_COLORS = {
    "green": ((110, 140, 90), 12.0),
    "light": ((170, 120, 70), 12.0),
    "medium": ((120, 75, 45), 12.0),
    "dark": ((60, 40, 30), 12.0),
}

_MIN_CLASS_SEPARATION = 30.0


@dataclass(frozen=True)
class SynthConfig:
    """Knobs of the synthetic generator.

    ``class_color_models`` maps class label to (mean RGB, per-channel spread);
    means must be pairwise separated so the classification task stays well
    posed. Bean count and radius are drawn uniformly from the given ranges.
    """

    per_class_count: int = 50
    image_size: int = 224
    class_color_models: dict = field(default_factory=lambda: dict(DEFAULT_CLASS_COLORS))
    background_modes: tuple[str, ...] = BACKGROUND_MODES
    seed: int = 0
    bean_count_range: tuple[int, int] = (8, 20)
    bean_radius_frac: tuple[float, float] = (0.055, 0.09)

    def __post_init__(self):
        if self.per_class_count < 1:
            raise ConfigError(f"per_class_count must be >= 1, got {self.per_class_count}")
        if self.image_size < 32:
            raise ConfigError(f"image_size must be >= 32, got {self.image_size}")
        missing = set(CLASS_LABELS) - set(self.class_color_models)
        if missing:
            raise ConfigError(f"class_color_models missing classes: {sorted(missing)}")
        unknown = set(self.background_modes) - set(BACKGROUND_MODES)
        if unknown:
            raise ConfigError(f"unknown background modes: {sorted(unknown)}")
        if not self.background_modes:
            raise ConfigError("at least one background mode is required")
        lo, hi = self.bean_count_range
        if not (1 <= lo <= hi):
            raise ConfigError(f"bad bean_count_range {self.bean_count_range}")
        means = {label: np.asarray(model[0], dtype=float) for label, model in self.class_color_models.items()}
        labels = sorted(means)
        for i, a in enumerate(labels):
            for b in labels[i + 1:]:
                dist = float(np.linalg.norm(means[a] - means[b]))
                if dist < _MIN_CLASS_SEPARATION:
                    raise ConfigError(
                        f"class mean colors for {a!r} and {b!r} are only {dist:.1f} apart; "
                        f"need at least {_MIN_CLASS_SEPARATION} so classes stay separable"
                    )

    def to_dict(self) -> dict:
        return {
            "per_class_count": self.per_class_count,
            "image_size": self.image_size,
            "class_color_models": {
                label: [list(mean), float(sigma)]
                for label, (mean, sigma) in self.class_color_models.items()
            },
            "background_modes": list(self.background_modes),
            "seed": self.seed,
            "bean_count_range": list(self.bean_count_range),
            "bean_radius_frac": list(self.bean_radius_frac),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        return cls(
            per_class_count=int(d["per_class_count"]),
            image_size=int(d["image_size"]),
            class_color_models={
                label: (tuple(mean), float(sigma))
                for label, (mean, sigma) in d["class_color_models"].items()
            },
            background_modes=tuple(d["background_modes"]),
            seed=int(d["seed"]),
            bean_count_range=tuple(d["bean_count_range"]),
            bean_radius_frac=tuple(d["bean_radius_frac"]),
        )


def synthesize_bean_image(
    roast_class: RoastClass,
    config: SynthConfig,
    rng: np.random.Generator,
) -> RasterImage:
    """Render one synthetic bean photo for the given class.

    The draw order from ``rng`` is fixed and independent of the class, so two
    classes rendered from generators in the same state differ only in bean
    body color. Ground truth lands in ``meta``: the boolean bean coverage map
    and its area fraction.
    """
    size = config.image_size
    mode = str(rng.choice(np.asarray(config.background_modes, dtype=object)))
    img = _render_background(mode, size, rng)

    ys, xs = np.mgrid[0:size, 0:size].astype(np.float64)
    mean_rgb, sigma = config.class_color_models[roast_class.label]
    mean_rgb = np.asarray(mean_rgb, dtype=np.float64)

    if mode == "glass_jar":
        jar_r = 0.42 * size
        center_lo, center_hi = size / 2 - 0.62 * jar_r, size / 2 + 0.62 * jar_r
    else:
        margin = config.bean_radius_frac[1] * size + 2
        center_lo, center_hi = margin, size - margin

    n_beans = int(rng.integers(config.bean_count_range[0], config.bean_count_range[1] + 1))
    bean_mask = np.zeros((size, size), dtype=bool)
    for _ in range(n_beans):
        cx = rng.uniform(center_lo, center_hi)
        cy = rng.uniform(center_lo, center_hi)
        a = rng.uniform(*config.bean_radius_frac) * size
        b = a * rng.uniform(0.55, 0.75)
        theta = rng.uniform(0, np.pi)
        eps = rng.normal(0.0, 1.0, size=3)
        color = np.clip(mean_rgb + eps * sigma, 0, 255)

        ct, st = np.cos(theta), np.sin(theta)
        u = ((xs - cx) * ct + (ys - cy) * st) / a
        w = (-(xs - cx) * st + (ys - cy) * ct) / b
        r2 = u ** 2 + w ** 2
        inside = r2 <= 1.0
        bean_mask |= inside

        shade = 1.0 - 0.10 * r2  # mild edge darkening
        body = color[None, None, :] * shade[..., None]
        crease = inside & (np.abs(w) <= 0.12) & (np.abs(u) <= 0.85)
        body = np.where(crease[..., None], body * 0.70, body)
        img = np.where(inside[..., None], body, img)

    noise = rng.normal(0.0, 3.0, size=(size, size, 3))
    img = np.where(bean_mask[..., None], img + noise, img)

    brightness = rng.uniform(0.90, 1.10)  # lightbox vs natural-light spread
    img = np.clip(img * brightness, 0, 255).astype(np.uint8)

    meta = {
        "roast_class": roast_class.label,
        "background": mode,
        "bean_fraction": float(bean_mask.mean()),
        "bean_mask": bean_mask,
        "brightness": float(brightness),
    }
    return RasterImage(img, RGB8, meta)


def _render_background(mode: str, size: int, rng: np.random.Generator) -> np.ndarray:
    ys = np.arange(size, dtype=np.float64)[:, None, None]
    if mode == "lightbox_white":
        base = np.full((size, size, 3), 235.0)
        base += (ys / size - 0.5) * 10.0  # soft vertical light falloff
        base += rng.normal(0.0, 2.0, size=(size, size, 1))
    elif mode == "natural_wood":
        # pale, near-neutral wood: stays below the default saturation bound
        # so the standard mask treats it as background, like the lightbox
        base = np.full((size, size, 3), 1.0) * np.array([170.0, 162.0, 150.0])
        phase = rng.uniform(0, 2 * np.pi)
        stripes = 10.0 * np.sin(2 * np.pi * ys / 17.0 + phase)
        base += stripes
        seam_period = max(size // 6, 8)
        seam = (np.arange(size) % seam_period) < 2
        base[seam, :, :] *= 0.78
        base += rng.normal(0.0, 4.0, size=(size, size, 1))
    elif mode == "glass_jar":
        base = np.full((size, size, 3), 222.0)
        base += rng.normal(0.0, 2.0, size=(size, size, 1))
        yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
        r = np.hypot(yy - size / 2, xx - size / 2)
        jar_r = 0.42 * size
        inside = r <= jar_r
        base = np.where(inside[..., None], base * np.array([0.94, 0.97, 0.94]), base)
        rim = np.abs(r - jar_r) <= max(size / 150.0, 1.2)
        base = np.where(rim[..., None], 248.0, base)
    else:
        raise ConfigError(f"unknown background mode {mode!r}")
    return np.clip(base, 0, 255)


def synthesize_dataset(config: SynthConfig, output_directory: str | Path) -> dict:
    """Write a full synthetic dataset in the class-per-directory layout.

    Each image is generated from a seed derived from (config.seed, class
    index, image index), so generation is reproducible and could be
    parallelized per image. Returns the manifest that was written alongside
    (seed, config, per-file checksums and ground-truth bean fractions).
    """
    out = Path(output_directory)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    files = []
    try:
        for cls in sorted(RoastClass):
            class_dir = out / cls.label
            class_dir.mkdir(exist_ok=True)
            for i in range(config.per_class_count):
                rng = np.random.default_rng(np.random.SeedSequence((config.seed, int(cls), i)))
                img = synthesize_bean_image(cls, config, rng)
                path = class_dir / f"{cls.label}_{i:04d}.png"
                write_image(img, path)
                written.append(path)
                files.append(
                    {
                        "path": str(path.relative_to(out)),
                        "class": cls.label,
                        "sha256": _sha256_file(path),
                        "bean_fraction": img.meta["bean_fraction"],
                        "background": img.meta["background"],
                    }
                )
        manifest = {"seed": config.seed, "config": config.to_dict(), "files": files}
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
        return manifest
    except OSError:
        for path in written:
            path.unlink(missing_ok=True)
        raise


def _sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()
