#!/usr/bin/env python3
"""Exercise the prediction service end to end, in process.

Trains a quick model, mounts the service on an in-process test client, then
uploads a photo, annotates the resulting history record, and lists history --
the same flow a client app drives over HTTP. To run the real server instead:

    beanroast serve --model run/model.h5 --store run/records.jsonl --port 8000
"""
import io
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient
from PIL import Image

from beanroast import (
    LabeledSample,
    PreprocessConfig,
    RoastClass,
    SynthConfig,
    TrainingConfig,
    build_model,
    synthesize_bean_image,
    train,
)
from beanroast.service import create_app

out = Path("demo_output/service")
out.mkdir(parents=True, exist_ok=True)

# a quick small model (contract demo, not a converged classifier)
synth = SynthConfig(per_class_count=6, image_size=96, seed=2)
samples = [
    LabeledSample(synthesize_bean_image(cls, synth, np.random.default_rng((int(cls), i))), cls)
    for cls in RoastClass for i in range(6)
]
pp_config = PreprocessConfig(target_size=(96, 96))
config = TrainingConfig(target_size=(96, 96), batch_size=8, learning_rate=1e-3,
                        epochs=3, backbone="fallback_cnn", seed=2)
artifact, _ = train(build_model(config), samples, samples[:8], config, pp_config)

app = create_app(store_path=out / "records.jsonl", image_dir=out / "images",
                 artifact=artifact, preprocess_config=pp_config)

photo = synthesize_bean_image(RoastClass.DARK, synth, np.random.default_rng(99))
buf = io.BytesIO()
Image.fromarray(photo.pixels).save(buf, format="PNG")

with TestClient(app) as client:
    print("health:", client.get("/health").json())

    resp = client.post(
        "/predict",
        files={"image": ("beans.png", buf.getvalue(), "image/png")},
        data={"description": "batch 12, second roast"},
    )
    record = resp.json()
    print(f"\npredicted: {record['roast_level']} ({record['probability_percent']}%)")
    print("record id:", record["id"])

    client.put(f"/records/{record['id']}/description", content=b"batch 12, adjusted drum temp")
    history = client.get("/records").json()
    print(f"\nhistory ({len(history)} record(s)):")
    for r in history:
        print(f"  {r['timestamp']}  {r['roast_level']:>6}  {r['probability_percent']:5.1f}%  "
              f"{r['description']}")

print(f"\nrecord log: {out / 'records.jsonl'} (replayable after restart)")
