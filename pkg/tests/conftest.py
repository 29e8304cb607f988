"""Shared fixtures: small synthetic sample sets and a quickly trained model.

Model-dependent tests run at a reduced 64x64 input size so the suite stays
fast; the full 224x224 path is exercised by the acceptance tests.
"""
import numpy as np
import pytest

from beanroast import (
    LabeledSample,
    PreprocessConfig,
    RoastClass,
    SynthConfig,
    TrainingConfig,
    build_model,
    split_dataset,
    synthesize_bean_image,
)
from beanroast import model as mdl


SMALL_PP = PreprocessConfig(target_size=(64, 64))


def synth_samples(per_class, image_size=96, seed=0, **synth_kw):
    """In-memory labeled synthetic images, deterministic per (seed, class, index)."""
    cfg = SynthConfig(per_class_count=per_class, image_size=image_size, seed=seed, **synth_kw)
    samples = []
    for cls in RoastClass:
        for i in range(per_class):
            rng = np.random.default_rng(np.random.SeedSequence((seed, int(cls), i)))
            samples.append(LabeledSample(synthesize_bean_image(cls, cfg, rng), cls))
    return samples


@pytest.fixture(scope="session")
def small_pp():
    return SMALL_PP


@pytest.fixture(scope="session")
def small_config():
    return TrainingConfig(
        target_size=(64, 64),
        learning_rate=1e-3,
        epochs=2,
        backbone="fallback_cnn",
        seed=3,
        batch_size=16,
    )


@pytest.fixture(scope="session")
def small_dataset():
    samples = synth_samples(per_class=10, image_size=96, seed=5)
    return split_dataset(samples, seed=5)


@pytest.fixture(scope="session")
def small_artifact(small_dataset, small_config, small_pp):
    """A quickly trained (not converged) artifact for contract tests."""
    model = build_model(small_config)
    artifact, history = mdl.train(
        model, small_dataset.train, small_dataset.validation, small_config, small_pp
    )
    return artifact, history
