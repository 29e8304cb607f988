#!/usr/bin/env python3
"""Train the classifier on a small synthetic set and evaluate it.

Uses the from-scratch fallback CNN at a reduced 96x96 input so the whole demo
finishes in a couple of minutes on a laptop CPU. The full-size run (224x224,
200 images per class) lives in the acceptance suite and the CLI:

    beanroast synth --per-class 200 --seed 7 --out data/
    beanroast train --data data/ --out run/ --backbone fallback_cnn
"""
from pathlib import Path

from beanroast import (
    PreprocessConfig,
    SynthConfig,
    TrainingConfig,
    build_model,
    evaluate,
    export_curves,
    load_dataset,
    save_model,
    split_dataset,
    synthesize_dataset,
    train,
)

out = Path("demo_output/training")
out.mkdir(parents=True, exist_ok=True)

data_dir = out / "data"
synthesize_dataset(SynthConfig(per_class_count=30, image_size=96, seed=5), data_dir)
split = split_dataset(load_dataset(data_dir), seed=5)

pp_config = PreprocessConfig(target_size=(96, 96))
config = TrainingConfig(
    target_size=(96, 96),
    batch_size=16,
    learning_rate=1e-3,  # raised from the pretrained-backbone default: training from scratch
    epochs=8,
    backbone="fallback_cnn",
    seed=5,
)

model = build_model(config)
print(f"backbone: {model.backbone_id} (fallback flag: {model.fallback_used})")

artifact, history = train(model, split.train, split.validation, config, pp_config)
print("\nper-epoch validation accuracy:", [round(a, 3) for a in history.val_accuracy])

report = evaluate(artifact, split.test, pp_config, dataset_tag="held-out test")
print("\n" + report.format_table())

save_model(artifact, out / "model.h5")
curves = export_curves([history], out / "curves.png")
print(f"\nartifact: {out / 'model.h5'}")
print(f"curves:   {curves['figure']} (+ {curves['table']})")
