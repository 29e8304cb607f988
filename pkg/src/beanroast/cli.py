"""Command-line entry point wiring every stage: synth, preprocess, train,
kfold, evaluate, predict, serve.

Exit codes: 0 success, 1 usage error, 2 runtime failure. Every subcommand
that writes files puts them under a single --out root together with a
run_manifest.json describing the invocation.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import dataset as ds
from . import imaging, metrics, model as mdl, service
from .errors import BeanroastError

logger = logging.getLogger(__name__)

# Learning rate used when the from-scratch fallback CNN is selected and no
# explicit rate was given; the 1e-5 default assumes a pretrained backbone
# and is too small to converge a fresh network within the epoch budget.
FALLBACK_LEARNING_RATE = 1e-3
TABLE_LEARNING_RATE = 1e-5


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="beanroast", description=__doc__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("synth", help="generate a synthetic bean dataset")
    p.add_argument("--per-class", type=int, default=50, help="images per roast class")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--image-size", type=int, default=224)
    p.add_argument(
        "--backgrounds",
        default=",".join(ds.BACKGROUND_MODES),
        help="comma-separated background modes",
    )
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("preprocess", help="write each preprocessing stage of one image")
    p.add_argument("--image", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--preprocess-config", help="JSON config file (defaults used otherwise)")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train", help="train on a class-per-directory dataset")
    _add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("kfold", help="k-fold cross-validation over the train+val pool")
    _add_train_flags(p)
    p.add_argument("--k", type=int, default=5)
    p.set_defaults(func=cmd_kfold)

    p = sub.add_parser("evaluate", help="evaluate a saved model on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--preprocess-config")
    p.add_argument("--allow-preprocess-mismatch", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="classify one image")
    p.add_argument("--model", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--preprocess-config")
    p.add_argument("--allow-preprocess-mismatch", action="store_true")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("serve", help="run the HTTP prediction service")
    p.add_argument("--host", default=os.environ.get("BEANROAST_HOST", "127.0.0.1"))
    p.add_argument("--port", type=int, default=int(os.environ.get("BEANROAST_PORT", "8000")))
    p.add_argument("--model", default=os.environ.get("BEANROAST_MODEL"))
    p.add_argument("--store", default=os.environ.get("BEANROAST_STORE"), help="record log path")
    p.add_argument("--images", default=os.environ.get("BEANROAST_IMAGES"))
    p.add_argument(
        "--upload-limit",
        type=int,
        default=int(os.environ.get("BEANROAST_UPLOAD_LIMIT", str(service.DEFAULT_UPLOAD_LIMIT))),
    )
    p.add_argument("--ui-dir", default=os.environ.get("BEANROAST_UI_DIR"))
    p.add_argument("--preprocess-config", default=os.environ.get("BEANROAST_PREPROCESS_CONFIG"))
    p.set_defaults(func=cmd_serve)

    return parser


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="class-per-directory dataset root")
    p.add_argument("--out", required=True, help="output directory for this run")
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument(
        "--learning-rate",
        type=float,
        default=None,
        help="default: 1e-5 with a pretrained backbone, 1e-3 with the fallback CNN",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--backbone", choices=mdl.BACKBONE_CHOICES, default="auto")
    p.add_argument("--dropout-rate", type=float, default=0.3)
    p.add_argument("--hidden-units", type=int, default=64)
    p.add_argument("--preprocess-config")


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return 1
    try:
        args.func(args)
    except (BeanroastError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_synth(args) -> None:
    config = ds.SynthConfig(
        per_class_count=args.per_class,
        image_size=args.image_size,
        background_modes=tuple(m.strip() for m in args.backgrounds.split(",") if m.strip()),
        seed=args.seed,
    )
    out = Path(args.out)
    manifest = ds.synthesize_dataset(config, out)
    _write_run_manifest(
        out, "synth",
        {"per_class": args.per_class, "seed": args.seed, "image_size": args.image_size,
         "backgrounds": list(config.background_modes)},
        {"dataset": str(out), "manifest": str(out / "manifest.json")},
    )
    print(f"wrote {len(manifest['files'])} images under {out}")


def cmd_preprocess(args) -> None:
    config = _load_preprocess_config(args.preprocess_config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    img = imaging.read_image(args.image)

    blurred = imaging.gaussian_blur(img, config)
    hsv = imaging.rgb_to_hsv(blurred)
    mask = imaging.compute_mask(hsv, config)
    masked = imaging.apply_mask(blurred, mask)
    final = imaging.normalize(imaging.resize(masked, config.target_size))

    panels = {
        "01_original.png": img,
        "02_blurred.png": blurred,
        "03_hsv_falsecolor.png": _hsv_falsecolor(hsv),
        "04_mask.png": imaging.mask_to_image(mask),
        "05_masked.png": masked,
        "06_final.png": final,
    }
    for name, panel in panels.items():
        imaging.write_image(panel, out / name)
    _write_run_manifest(
        out, "preprocess",
        {"image": str(args.image), "config": config.to_dict()},
        {name: str(out / name) for name in panels},
        notes={"foreground_fraction": mask.foreground_fraction},
    )
    print(f"wrote {len(panels)} stage images under {out} "
          f"(foreground fraction {mask.foreground_fraction:.3f})")


def _hsv_falsecolor(hsv: imaging.RasterImage) -> imaging.RasterImage:
    px = hsv.pixels
    vis = np.stack([px[..., 0] / 360.0, px[..., 1], px[..., 2]], axis=-1)
    return imaging.RasterImage(np.clip(vis, 0.0, 1.0), imaging.FLOAT01)


def _resolve_training(args) -> tuple[mdl.TrainingConfig, mdl.RoastModel, dict]:
    """Build the model, then pin the learning rate based on which backbone won."""
    base = mdl.TrainingConfig(
        batch_size=args.batch_size,
        learning_rate=args.learning_rate or TABLE_LEARNING_RATE,
        epochs=args.epochs,
        dropout_rate=args.dropout_rate,
        seed=args.seed,
        hidden_units=args.hidden_units,
        backbone=args.backbone,
        k_folds=getattr(args, "k", 5),
    )
    model = mdl.build_model(base)
    if args.learning_rate is not None:
        lr_used, note = args.learning_rate, "explicit"
    elif model.backbone_id == mdl.FALLBACK_BACKBONE_ID:
        lr_used = FALLBACK_LEARNING_RATE
        note = "raised from the table default: fallback CNN trains from scratch"
    else:
        lr_used, note = TABLE_LEARNING_RATE, "table default"
    config = dataclasses.replace(base, learning_rate=lr_used)
    lr_record = {
        "learning_rate_requested": args.learning_rate,
        "learning_rate_used": lr_used,
        "learning_rate_note": note,
        "backbone_resolved": model.backbone_id,
        "fallback_used": model.fallback_used,
    }
    return config, model, lr_record


def cmd_train(args) -> None:
    pp_config = _load_preprocess_config(args.preprocess_config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    samples = ds.load_dataset(args.data)
    split = ds.split_dataset(samples, seed=args.seed)
    config, model, lr_record = _resolve_training(args)

    artifact, history = mdl.train(model, split.train, split.validation, config, pp_config)
    test_report = metrics.evaluate(artifact, split.test, pp_config, dataset_tag="test")

    model_path = out / "model.h5"
    mdl.save_model(artifact, model_path)
    (out / "history.json").write_text(json.dumps(history.to_dict(), indent=2) + "\n")
    (out / "test_report.json").write_text(json.dumps(test_report.to_dict(), indent=2) + "\n")
    curves = metrics.export_curves([history], out / "curves.png")
    _write_run_manifest(
        out, "train",
        {"data": str(args.data), "seed": args.seed, "epochs": args.epochs,
         "batch_size": args.batch_size, "config": config.to_dict(),
         "preprocess_config": pp_config.to_dict(), **lr_record},
        {"model": str(model_path), "history": str(out / "history.json"),
         "test_report": str(out / "test_report.json"), **curves},
        notes={"test_accuracy": test_report.accuracy,
               "split_sizes": [len(split.train), len(split.validation), len(split.test)]},
    )
    print(f"test accuracy: {test_report.accuracy:.4f}")
    print(f"model artifact: {model_path}")


def cmd_kfold(args) -> None:
    pp_config = _load_preprocess_config(args.preprocess_config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    samples = ds.load_dataset(args.data)
    split = ds.split_dataset(samples, seed=args.seed)
    pool = split.train + split.validation  # test set stays held out
    config, _, lr_record = _resolve_training(args)

    result = mdl.train_kfold(pool, config, pp_config)
    test_report = metrics.evaluate(result.best_artifact, split.test, pp_config, dataset_tag="test")

    model_path = out / "model.h5"
    mdl.save_model(result.best_artifact, model_path)
    for i, report in enumerate(result.fold_reports):
        (out / f"fold_report_{i}.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    summary = {
        "k": config.k_folds,
        "fold_accuracies": [r.accuracy for r in result.fold_reports],
        "mean_accuracy": result.mean_accuracy,
        "std_accuracy": result.std_accuracy,
        "best_fold_index": result.best_fold_index,
        "test_accuracy": test_report.accuracy,
        **lr_record,
    }
    (out / "kfold_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    (out / "test_report.json").write_text(json.dumps(test_report.to_dict(), indent=2) + "\n")
    curves = metrics.export_curves(result.fold_histories, out / "curves.png")
    _write_run_manifest(
        out, "kfold",
        {"data": str(args.data), "k": config.k_folds, "seed": args.seed,
         "config": config.to_dict(), "preprocess_config": pp_config.to_dict(), **lr_record},
        {"model": str(model_path), "summary": str(out / "kfold_summary.json"), **curves},
        notes={"mean_accuracy": result.mean_accuracy},
    )
    print(f"mean fold accuracy: {result.mean_accuracy:.4f} +- {result.std_accuracy:.4f}")
    print(f"best fold: {result.best_fold_index}; held-out test accuracy: {test_report.accuracy:.4f}")


def cmd_evaluate(args) -> None:
    pp_config = _load_preprocess_config(args.preprocess_config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    artifact = mdl.load_model(args.model)
    samples = ds.load_dataset(args.data)
    report = metrics.evaluate(
        artifact, samples, pp_config, dataset_tag=str(args.data),
        allow_preprocess_mismatch=args.allow_preprocess_mismatch,
    )
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    (out / "report.txt").write_text(report.format_table() + "\n")
    _write_run_manifest(
        out, "evaluate",
        {"model": str(args.model), "data": str(args.data)},
        {"report": str(out / "report.json"), "table": str(out / "report.txt")},
        notes={"accuracy": report.accuracy},
    )
    print(report.format_table())


def cmd_predict(args) -> None:
    pp_config = _load_preprocess_config(args.preprocess_config)
    artifact = mdl.load_model(args.model)
    pred = mdl.predict(
        artifact, args.image, pp_config,
        allow_preprocess_mismatch=args.allow_preprocess_mismatch,
    )
    print(f"{pred.predicted_class.label} ({pred.confidence_percent:.1f}%)")
    sidecar = Path(str(args.image) + ".prediction.json")
    sidecar.write_text(
        json.dumps({"image": str(args.image), "model": str(args.model), **pred.to_dict()}, indent=2)
        + "\n"
    )


def cmd_serve(args) -> None:
    import uvicorn

    if not args.store:
        raise BeanroastError("--store (or BEANROAST_STORE) is required")
    images = args.images or str(Path(args.store).parent / "images")
    pp_config = _load_preprocess_config(args.preprocess_config)
    app = service.create_app(
        store_path=args.store,
        image_dir=images,
        model_path=args.model,
        preprocess_config=pp_config,
        upload_limit=args.upload_limit,
        ui_dir=args.ui_dir,
    )
    uvicorn.run(app, host=args.host, port=args.port)


# ---------------------------------------------------------------------------

def _load_preprocess_config(path: str | None) -> imaging.PreprocessConfig:
    if path is None:
        return imaging.PreprocessConfig()
    config = imaging.load_config(path)
    if not isinstance(config, imaging.PreprocessConfig):
        raise BeanroastError(f"{path} is not a preprocess config")
    return config


def _write_run_manifest(out: Path, command: str, parameters: dict, outputs: dict, notes: dict | None = None) -> None:
    doc = {
        "command": command,
        "created": service.utc_now_iso(),
        "parameters": parameters,
        "outputs": outputs,
    }
    if notes:
        doc["notes"] = notes
    (out / "run_manifest.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    sys.exit(main())
