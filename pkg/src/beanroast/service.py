"""HTTP prediction service with persisted prediction history.

Records live in an append-only JSON-lines log (one record per line,
last-write-wins per id), so the full history is reconstructible from the
backing file alone after a crash. Uploaded images are stored content-addressed
under the image directory.
"""
from __future__ import annotations

import hashlib
import io
import json
import logging
import os
import threading
import uuid
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.responses import JSONResponse
from PIL import Image

from .imaging import RGB8, PreprocessConfig, RasterImage
from .model import ModelArtifact, load_model, predict

logger = logging.getLogger(__name__)

DEFAULT_UPLOAD_LIMIT = 16 * 1024 * 1024  # bytes
MAX_DESCRIPTION_BYTES = 4096


@dataclass(frozen=True)
class HistoryRecord:
    """One persisted prediction, exactly as serialized to the record log."""

    id: str
    timestamp: str  # ISO-8601 UTC, fixed microsecond precision
    roast_level: str
    probability_percent: float
    description: str
    image_ref: str
    probabilities: tuple[float, float, float, float]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "timestamp": self.timestamp,
            "roast_level": self.roast_level,
            "probability_percent": self.probability_percent,
            "description": self.description,
            "image_ref": self.image_ref,
            "probabilities": list(self.probabilities),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HistoryRecord":
        return cls(
            id=d["id"],
            timestamp=d["timestamp"],
            roast_level=d["roast_level"],
            probability_percent=float(d["probability_percent"]),
            description=d.get("description", ""),
            image_ref=d.get("image_ref", ""),
            probabilities=tuple(float(p) for p in d["probabilities"]),
        )


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


class RecordStore:
    """Append-only JSON-lines store with an in-memory id index.

    Every mutation appends one line and flushes it to disk before returning;
    replaying the log (last-write-wins per id) reconstructs the exact store
    state, which is how crash recovery works.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._records: dict[str, HistoryRecord] = {}
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._replay()
        self._fh = self.path.open("a", encoding="utf-8")

    def _replay(self) -> None:
        if not self.path.exists():
            return
        with self.path.open("r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = HistoryRecord.from_dict(json.loads(line))
                except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                    # torn write from a crash; ignore but keep a trace
                    logger.warning("skipping malformed record at %s:%d", self.path, lineno)
                    continue
                self._records[rec.id] = rec

    def append(self, record: HistoryRecord) -> None:
        line = json.dumps(record.to_dict(), ensure_ascii=False)
        with self._lock:
            self._fh.write(line + "\n")
            self._fh.flush()
            os.fsync(self._fh.fileno())
            self._records[record.id] = record

    def get(self, record_id: str) -> HistoryRecord | None:
        with self._lock:
            return self._records.get(record_id)

    def update_description(self, record_id: str, description: str) -> HistoryRecord | None:
        with self._lock:
            rec = self._records.get(record_id)
            if rec is None:
                return None
            updated = replace(rec, description=description)
            self._fh.write(json.dumps(updated.to_dict(), ensure_ascii=False) + "\n")
            self._fh.flush()
            os.fsync(self._fh.fileno())
            self._records[record_id] = updated
            return updated

    def list_records(self, limit: int | None = None, offset: int = 0) -> list[HistoryRecord]:
        """Newest first, ordered by (timestamp desc, id) for a stable listing."""
        with self._lock:
            recs = sorted(self._records.values(), key=lambda r: r.id)
        recs.sort(key=lambda r: r.timestamp, reverse=True)
        recs = recs[offset:]
        if limit is not None:
            recs = recs[:limit]
        return recs

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)

    def close(self) -> None:
        self._fh.close()


def store_image(data: bytes, image_dir: str | Path, fmt: str) -> str:
    """Content-addressed image storage; returns the stored path as a string."""
    digest = hashlib.sha256(data).hexdigest()
    ext = ".png" if fmt.upper() == "PNG" else ".jpg"
    target = Path(image_dir) / digest[:2] / f"{digest}{ext}"
    target.parent.mkdir(parents=True, exist_ok=True)
    if not target.exists():
        target.write_bytes(data)
    return str(target)


def create_app(
    store_path: str | Path,
    image_dir: str | Path,
    artifact: ModelArtifact | None = None,
    model_path: str | Path | None = None,
    preprocess_config: PreprocessConfig | None = None,
    upload_limit: int = DEFAULT_UPLOAD_LIMIT,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    """Build the prediction service.

    The model may be passed in-memory (``artifact``) or loaded from
    ``model_path``; without either, /predict answers 503 until a model exists.
    """
    if artifact is None and model_path is not None:
        artifact = load_model(model_path)
    if preprocess_config is None:
        preprocess_config = PreprocessConfig()

    app = FastAPI(title="beanroast prediction service")
    store = RecordStore(store_path)
    app.state.store = store
    app.state.artifact = artifact
    app.state.preprocess_config = preprocess_config
    app.state.upload_limit = upload_limit

    def _error(status: int, code: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"error": code})

    @app.post("/predict")
    def post_predict(image: UploadFile = File(...), description: str = Form("")):
        data = image.file.read(app.state.upload_limit + 1)
        if len(data) > app.state.upload_limit:
            return _error(413, "payload_too_large")
        try:
            with Image.open(io.BytesIO(data)) as im:
                fmt = im.format or "PNG"
                rgb = np.asarray(im.convert("RGB"), dtype=np.uint8)
        except Exception:
            return _error(400, "not_an_image")
        if app.state.artifact is None:
            return _error(503, "model_not_loaded")

        raster = RasterImage(rgb, RGB8)
        pred = predict(app.state.artifact, raster, app.state.preprocess_config)
        stored = store_image(data, image_dir, fmt)
        record = HistoryRecord(
            id=str(uuid.uuid4()),
            timestamp=utc_now_iso(),
            roast_level=pred.predicted_class.label,
            probability_percent=round(pred.confidence_percent, 1),
            description=description,
            image_ref=stored,
            probabilities=tuple(float(p) for p in pred.probabilities),
        )
        store.append(record)
        return record.to_dict()

    @app.get("/records")
    def get_records(request: Request):
        params = request.query_params
        try:
            limit = int(params["limit"]) if "limit" in params else None
            offset = int(params["offset"]) if "offset" in params else 0
        except ValueError:
            return _error(400, "bad_paging")
        if (limit is not None and limit < 0) or offset < 0:
            return _error(400, "bad_paging")
        return [r.to_dict() for r in store.list_records(limit=limit, offset=offset)]

    @app.put("/records/{record_id}/description")
    async def put_description(record_id: str, request: Request):
        body = await request.body()
        if len(body) > MAX_DESCRIPTION_BYTES:
            return _error(413, "description_too_large")
        try:
            text = body.decode("utf-8")
        except UnicodeDecodeError:
            return _error(400, "bad_encoding")
        updated = store.update_description(record_id, text)
        if updated is None:
            return _error(404, "unknown_record")
        return updated.to_dict()

    @app.get("/health")
    def get_health():
        art = app.state.artifact
        return {
            "model_loaded": art is not None,
            "artifact_fingerprint": art.preprocess_fingerprint if art is not None else None,
            "backbone_id": art.backbone_id if art is not None else None,
            "records": len(store),
        }

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
