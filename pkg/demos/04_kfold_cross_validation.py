#!/usr/bin/env python3
"""Cross-validate the classifier with the k-fold protocol.

The test split is held out once; the remaining pool is divided into k
stratified folds, each serving as the validation set exactly once. Scores
are aggregated as mean +- standard deviation and the best fold's artifact
becomes the deployable model.
"""
from pathlib import Path

from beanroast import (
    PreprocessConfig,
    SynthConfig,
    TrainingConfig,
    evaluate,
    export_curves,
    load_dataset,
    split_dataset,
    synthesize_dataset,
    train_kfold,
)

out = Path("demo_output/kfold")
out.mkdir(parents=True, exist_ok=True)

data_dir = out / "data"
synthesize_dataset(SynthConfig(per_class_count=20, image_size=96, seed=6), data_dir)
split = split_dataset(load_dataset(data_dir), seed=6)
pool = split.train + split.validation
print(f"pool {len(pool)} samples, test {len(split.test)} held out")

pp_config = PreprocessConfig(target_size=(96, 96))
config = TrainingConfig(
    target_size=(96, 96), batch_size=16, learning_rate=1e-3,
    epochs=5, k_folds=5, backbone="fallback_cnn", seed=6,
)

result = train_kfold(pool, config, pp_config)
for report in result.fold_reports:
    print(f"  {report.dataset_tag}: accuracy {report.accuracy:.3f}")
print(f"mean fold accuracy {result.mean_accuracy:.3f} +- {result.std_accuracy:.3f}")
print(f"best fold: {result.best_fold_index}")

test_report = evaluate(result.best_artifact, split.test, pp_config, dataset_tag="test")
print(f"held-out test accuracy of the best fold's model: {test_report.accuracy:.3f}")

curves = export_curves(result.fold_histories, out / "curves.png")
print(f"per-fold curves: {curves['figure']} ({curves['panels']} panels)")
