"""Dataset loading, splitting, fold planning, and synthetic generation."""
import json
import logging
from pathlib import Path

import numpy as np
import pytest

from beanroast import (
    ConfigError,
    DataError,
    LayoutError,
    LabeledSample,
    RoastClass,
    SynthConfig,
    load_dataset,
    make_folds,
    rgb_to_hsv,
    split_dataset,
    synthesize_bean_image,
    synthesize_dataset,
)
from beanroast.dataset import CLASS_LABELS

TINY_PNG = bytes.fromhex(
    "89504e470d0a1a0a0000000d49484452000000010000000108020000009077"
    "53de0000000c4944415408d763f8cfc000000301010018dd8db00000000049"
    "454e44ae426082"
)  # a valid 1x1 PNG


def make_layout(root: Path, per_class=3, classes=CLASS_LABELS):
    for label in classes:
        d = root / label
        d.mkdir(parents=True, exist_ok=True)
        for i in range(per_class):
            (d / f"img_{i:03d}.png").write_bytes(TINY_PNG)


def fake_samples(per_class):
    """Path-only samples for split/fold logic; files never opened."""
    samples = []
    for cls in RoastClass:
        for i in range(per_class):
            samples.append(LabeledSample(Path(f"/none/{cls.label}/{i}.png"), cls))
    return samples


# ---------------------------------------------------------------------------
# load_dataset
# ---------------------------------------------------------------------------

def test_load_counts_per_class(tmp_path):
    make_layout(tmp_path, per_class=3)
    samples = load_dataset(tmp_path)
    assert len(samples) == 12
    for cls in RoastClass:
        assert sum(1 for s in samples if s.roast_class == cls) == 3


def test_load_orders_lexicographically(tmp_path):
    make_layout(tmp_path, per_class=0)
    for name in ("b.png", "a.png", "c.png"):
        (tmp_path / "dark" / name).write_bytes(TINY_PNG)
    samples = load_dataset(tmp_path)
    dark = [s.image_ref.name for s in samples if s.roast_class == RoastClass.DARK]
    assert dark == ["a.png", "b.png", "c.png"]


def test_load_missing_class_directory(tmp_path):
    make_layout(tmp_path, classes=("dark", "green", "light"))
    with pytest.raises(LayoutError):
        load_dataset(tmp_path)


def test_load_empty_class_warns(tmp_path, caplog):
    make_layout(tmp_path, per_class=2)
    for f in (tmp_path / "green").iterdir():
        f.unlink()
    with caplog.at_level(logging.WARNING):
        samples = load_dataset(tmp_path)
    assert sum(1 for s in samples if s.roast_class == RoastClass.GREEN) == 0
    assert any("no readable images" in r.message for r in caplog.records)


def test_load_skips_unreadable_file_with_warning(tmp_path, caplog):
    make_layout(tmp_path, per_class=2)
    (tmp_path / "dark" / "broken.png").write_bytes(b"this is not a png")
    (tmp_path / "dark" / "notes.txt").write_text("irrelevant")
    with caplog.at_level(logging.WARNING):
        samples = load_dataset(tmp_path)
    assert len(samples) == 8
    messages = [r.message for r in caplog.records]
    assert any("unreadable" in m for m in messages)
    assert any("non-image" in m for m in messages)


def test_load_paper_scale_layout(tmp_path):
    # 1200 per class, 4800 total
    make_layout(tmp_path, per_class=1200)
    samples = load_dataset(tmp_path)
    assert len(samples) == 4800
    for cls in RoastClass:
        assert sum(1 for s in samples if s.roast_class == cls) == 1200


# ---------------------------------------------------------------------------
# split_dataset
# ---------------------------------------------------------------------------

def test_split_reference_sizes():
    split = split_dataset(fake_samples(1200), (0.6, 0.2, 0.2), seed=1)
    assert (len(split.train), len(split.validation), len(split.test)) == (2880, 960, 960)
    for part in (split.train, split.validation, split.test):
        for cls in RoastClass:
            count = sum(1 for s in part if s.roast_class == cls)
            assert count == {2880: 720, 960: 240}[len(part)]


def test_split_ten_samples_single_class():
    samples = [LabeledSample(Path(f"/none/{i}.png"), RoastClass.LIGHT) for i in range(10)]
    split = split_dataset(samples, (0.6, 0.2, 0.2), seed=0)
    assert (len(split.train), len(split.validation), len(split.test)) == (6, 2, 2)


def test_split_is_deterministic_and_seed_sensitive():
    samples = fake_samples(10)
    ref = split_dataset(samples, seed=3)
    again = split_dataset(samples, seed=3)
    assert [s.image_ref for s in ref.train] == [s.image_ref for s in again.train]
    others = 0
    for seed in range(10):
        alt = split_dataset(samples, seed=100 + seed)
        if [s.image_ref for s in alt.train] != [s.image_ref for s in ref.train]:
            others += 1
    assert others == 10


def test_split_partition_property():
    samples = fake_samples(17)
    split = split_dataset(samples, seed=5)
    ids = lambda part: {id(s) for s in part}
    assert ids(split.train) | ids(split.validation) | ids(split.test) == ids(samples)
    assert not (ids(split.train) & ids(split.validation))
    assert not (ids(split.train) & ids(split.test))
    assert not (ids(split.validation) & ids(split.test))


def test_split_rejects_bad_ratios():
    with pytest.raises(ConfigError):
        split_dataset(fake_samples(5), (0.5, 0.2, 0.2), seed=0)


def test_split_rejects_tiny_class():
    samples = fake_samples(5) + [LabeledSample(Path("/none/x.png"), RoastClass.DARK)]
    samples = [s for s in samples if s.roast_class != RoastClass.GREEN]
    samples += [LabeledSample(Path("/none/g.png"), RoastClass.GREEN)] * 2
    with pytest.raises(DataError):
        split_dataset(samples, seed=0)


# ---------------------------------------------------------------------------
# make_folds
# ---------------------------------------------------------------------------

def test_folds_balanced():
    samples = fake_samples(25)
    plan = make_folds(samples, k=5, seed=2)
    for fold in range(5):
        members = plan.validation_indices(fold)
        assert len(members) == 20
        for cls in RoastClass:
            count = sum(1 for i in members if samples[i].roast_class == cls)
            assert count == 5


def test_folds_partition_pool():
    samples = fake_samples(13)
    plan = make_folds(samples, k=5, seed=0)
    seen = []
    for fold in range(5):
        seen.extend(plan.validation_indices(fold))
    assert sorted(seen) == list(range(len(samples)))


def test_folds_reject_small_k_or_class():
    with pytest.raises(ConfigError):
        make_folds(fake_samples(10), k=1, seed=0)
    with pytest.raises(ConfigError):
        make_folds(fake_samples(3), k=5, seed=0)


def test_folds_paper_k():
    plan = make_folds(fake_samples(10), k=5, seed=1)
    assert plan.k == 5


# ---------------------------------------------------------------------------
# synthesize_bean_image
# ---------------------------------------------------------------------------

def test_synth_deterministic():
    cfg = SynthConfig(image_size=64)
    a = synthesize_bean_image(RoastClass.GREEN, cfg, np.random.default_rng(5))
    b = synthesize_bean_image(RoastClass.GREEN, cfg, np.random.default_rng(5))
    assert np.array_equal(a.pixels, b.pixels)
    assert a.meta["bean_fraction"] == b.meta["bean_fraction"]


def test_synth_green_hue_in_green_band():
    cfg = SynthConfig(image_size=96, background_modes=("lightbox_white",))
    img = synthesize_bean_image(RoastClass.GREEN, cfg, np.random.default_rng(0))
    hsv = rgb_to_hsv(img)
    hues = hsv.pixels[..., 0][img.meta["bean_mask"]]
    assert 60 <= np.median(hues) <= 160  # greenish-yellow band


def test_synth_classes_share_geometry_differ_in_color():
    cfg = SynthConfig(image_size=64)
    a = synthesize_bean_image(RoastClass.GREEN, cfg, np.random.default_rng(9))
    b = synthesize_bean_image(RoastClass.DARK, cfg, np.random.default_rng(9))
    assert np.array_equal(a.meta["bean_mask"], b.meta["bean_mask"])
    mean_a = a.pixels[a.meta["bean_mask"]].mean(axis=0)
    mean_b = b.pixels[b.meta["bean_mask"]].mean(axis=0)
    assert np.linalg.norm(mean_a - mean_b) > 20
    # background pixels identical
    bg = ~a.meta["bean_mask"]
    assert np.array_equal(a.pixels[bg], b.pixels[bg])


def test_synth_dark_beans_darker_than_light():
    # Monte Carlo over 100 seeds: mean foreground V ordering
    cfg = SynthConfig(image_size=64)

    def mean_v(cls, seed):
        img = synthesize_bean_image(cls, cfg, np.random.default_rng(seed))
        return rgb_to_hsv(img).pixels[..., 2][img.meta["bean_mask"]].mean()

    dark = np.mean([mean_v(RoastClass.DARK, s) for s in range(100)])
    light = np.mean([mean_v(RoastClass.LIGHT, s) for s in range(100)])
    assert dark < light


def test_synth_config_enforces_color_separation():
    colors = dict(SynthConfig().class_color_models)
    colors["light"] = (colors["medium"][0], 12.0)
    with pytest.raises(ConfigError):
        SynthConfig(class_color_models=colors)


def test_synth_config_rejects_unknown_background():
    with pytest.raises(ConfigError):
        SynthConfig(background_modes=("disco",))


# ---------------------------------------------------------------------------
# synthesize_dataset
# ---------------------------------------------------------------------------

def test_synthesize_dataset_layout_and_roundtrip(tmp_path):
    cfg = SynthConfig(per_class_count=50, image_size=48, seed=4)
    manifest = synthesize_dataset(cfg, tmp_path / "data")
    pngs = list((tmp_path / "data").rglob("*.png"))
    assert len(pngs) == 200
    assert len(manifest["files"]) == 200
    assert {p.parent.name for p in pngs} == set(CLASS_LABELS)

    samples = load_dataset(tmp_path / "data")
    assert len(samples) == 200
    for cls in RoastClass:
        assert sum(1 for s in samples if s.roast_class == cls) == 50


def test_synthesize_dataset_checksums_reproducible(tmp_path):
    cfg = SynthConfig(per_class_count=3, image_size=48, seed=11)
    m1 = synthesize_dataset(cfg, tmp_path / "a")
    m2 = synthesize_dataset(cfg, tmp_path / "b")
    sums1 = {f["path"]: f["sha256"] for f in m1["files"]}
    sums2 = {f["path"]: f["sha256"] for f in m2["files"]}
    assert sums1 == sums2


def test_synthesize_dataset_manifest_contents(tmp_path):
    cfg = SynthConfig(per_class_count=2, image_size=48, seed=8)
    synthesize_dataset(cfg, tmp_path / "d")
    manifest = json.loads((tmp_path / "d" / "manifest.json").read_text())
    assert manifest["seed"] == 8
    assert manifest["config"]["per_class_count"] == 2
    assert all(set(f) >= {"path", "class", "sha256", "bean_fraction"} for f in manifest["files"])


def test_synthetic_separability_nearest_centroid():
    # the learning task must be solvable by a trivial classifier before any CNN
    cfg = SynthConfig(per_class_count=100, image_size=96)
    feats, labels = [], []
    for cls in RoastClass:
        for i in range(cfg.per_class_count):
            rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, int(cls), i)))
            img = synthesize_bean_image(cls, cfg, rng)
            feats.append(img.pixels[img.meta["bean_mask"]].mean(axis=0))
            labels.append(cls.label)
    feats = np.asarray(feats)
    labels = np.asarray(labels)
    centroids = {lab: feats[labels == lab].mean(axis=0) for lab in CLASS_LABELS}
    predicted = [
        min(centroids, key=lambda lab: np.linalg.norm(f - centroids[lab])) for f in feats
    ]
    accuracy = float(np.mean(np.asarray(predicted) == labels))
    assert accuracy >= 0.95
