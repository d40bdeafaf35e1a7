"""HTTP measurement service: image upload, sessions, measurement, CSV export.

Storage is a plain directory tree (images/ and sessions/, one JSON file
per session). Images are content-addressed by hash; sessions are
append-only and every measurement is persisted before the response goes
out, so an acknowledged record survives restart.
"""

from __future__ import annotations

import dataclasses
import datetime as _dt
import hashlib
import json
import math
import os
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from .cobb import EndplateNotFoundError, Measurement, PipelineConfig, measure_cobb
from .denoise import NlConfig
from .edges import CannyConfig
from .imagecore import GrayImage, ImageFormatError, Rect, image_from_bytes
from .lines import HoughConfig, LineRT
from .reliability import OBSERVATIONS_HEADER, group_of

DEFAULT_MAX_IMAGE_BYTES = 32 * 1024 * 1024


@dataclass
class Session:
    session_id: str
    image_id: str
    observer_id: str
    created_at: str
    measurements: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


class DataStore:
    """Directory-backed persistence for images and sessions."""

    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)
        self.images_dir = self.root / "images"
        self.sessions_dir = self.root / "sessions"
        self.images_dir.mkdir(parents=True, exist_ok=True)
        self.sessions_dir.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def image_id_of(data: bytes) -> str:
        return hashlib.sha256(data).hexdigest()[:16]

    def save_image_bytes(self, data: bytes) -> str:
        image_from_bytes(data)  # validate before persisting
        image_id = self.image_id_of(data)
        ext = "pgm" if data.startswith(b"P5") else "png"
        path = self.images_dir / f"{image_id}.{ext}"
        if not path.exists():
            self._atomic_write(path, data)
        return image_id

    def image_path(self, image_id: str) -> Path | None:
        for ext in ("pgm", "png"):
            path = self.images_dir / f"{image_id}.{ext}"
            if path.exists():
                return path
        return None

    def load_image(self, image_id: str) -> GrayImage | None:
        path = self.image_path(image_id)
        if path is None:
            return None
        return image_from_bytes(path.read_bytes())

    def create_session(self, image_id: str, observer_id: str) -> Session:
        session = Session(
            session_id=uuid.uuid4().hex,
            image_id=image_id,
            observer_id=observer_id,
            created_at=_dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        )
        self._write_session(session)
        return session

    def get_session(self, session_id: str) -> Session | None:
        path = self.sessions_dir / f"{session_id}.json"
        if not path.exists():
            return None
        data = json.loads(path.read_text())
        return Session(**data)

    def append_measurement(self, session: Session, record: dict) -> None:
        session.measurements.append(record)
        self._write_session(session)

    def all_sessions(self) -> list[Session]:
        out = []
        for path in sorted(self.sessions_dir.glob("*.json")):
            out.append(Session(**json.loads(path.read_text())))
        return out

    def _write_session(self, session: Session) -> None:
        self._atomic_write(
            self.sessions_dir / f"{session.session_id}.json",
            json.dumps(session.to_dict(), indent=1).encode(),
        )

    @staticmethod
    def _atomic_write(path: Path, data: bytes) -> None:
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_bytes(data)
        os.replace(tmp, path)


def _error(status: int, message: str, fld: str | None = None) -> JSONResponse:
    body: dict = {"error": message}
    if fld is not None:
        body["field"] = fld
    return JSONResponse(status_code=status, content=body)


def _parse_rect(body: dict, name: str) -> Rect:
    raw = body.get(name)
    if not isinstance(raw, dict):
        raise ValueError(f"{name} must be an object with x, y, w, h")
    try:
        return Rect(x=int(raw["x"]), y=int(raw["y"]), w=int(raw["w"]), h=int(raw["h"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{name} must have integer x, y, w, h") from exc


def _merge_config(overrides: dict | None) -> PipelineConfig:
    base = PipelineConfig()
    if not overrides:
        return base
    nl = dataclasses.replace(base.nl, **overrides.get("nl", {}))
    canny = dataclasses.replace(base.canny, **overrides.get("canny", {}))
    hough = dataclasses.replace(base.hough, **overrides.get("hough", {}))
    return PipelineConfig(
        nl=nl, canny=canny, hough=hough,
        denoiser=overrides.get("denoiser", base.denoiser),
    )


def line_segment_in_roi(line: LineRT, roi: Rect) -> dict:
    """Clip the infinite line to its ROI; endpoints in full-image coordinates."""
    theta = math.radians(line.theta)
    c, s = math.cos(theta), math.sin(theta)
    # point on line closest to ROI-local origin, direction along the line
    px, py = line.rho * c, line.rho * s
    dx, dy = -s, c
    ts: list[float] = []
    for bound, p0, d in ((roi.w - 1, px, dx), (roi.h - 1, py, dy)):
        if abs(d) > 1e-12:
            ts.extend(((0.0 - p0) / d, (bound - p0) / d))
    inside = []
    for t in sorted(ts):
        x, y = px + t * dx, py + t * dy
        if -0.5 <= x <= roi.w - 0.5 and -0.5 <= y <= roi.h - 0.5:
            inside.append((x, y))
    if len(inside) < 2:
        inside = [(px, py), (px + dx, py + dy)]
    (x1, y1), (x2, y2) = inside[0], inside[-1]
    return {
        "x1": round(x1 + roi.x, 2), "y1": round(y1 + roi.y, 2),
        "x2": round(x2 + roi.x, 2), "y2": round(y2 + roi.y, 2),
    }


def measurement_response(m: Measurement) -> dict:
    record = m.to_json_dict()
    record["overlay"] = {
        "superior": line_segment_in_roi(m.line_superior, m.roi_superior),
        "inferior": line_segment_in_roi(m.line_inferior, m.roi_inferior),
    }
    return record


def create_app(
    data_dir: str | os.PathLike,
    max_image_bytes: int = DEFAULT_MAX_IMAGE_BYTES,
    ui_dir: str | os.PathLike | None = None,
) -> FastAPI:
    store = DataStore(data_dir)
    app = FastAPI(title="cobbkit measurement service")
    app.state.store = store

    @app.post("/images")
    async def upload_image(request: Request):
        data = await request.body()
        if len(data) > max_image_bytes:
            return _error(413, f"image exceeds {max_image_bytes} bytes")
        if not data:
            return _error(400, "empty body")
        try:
            image_id = store.save_image_bytes(data)
        except ImageFormatError as exc:
            return _error(400, str(exc))
        return JSONResponse(status_code=201, content={"image_id": image_id})

    @app.get("/images/{image_id}")
    def get_image(image_id: str):
        path = store.image_path(image_id)
        if path is None:
            return _error(404, f"unknown image {image_id}")
        media = "image/png" if path.suffix == ".png" else "image/x-portable-graymap"
        return Response(content=path.read_bytes(), media_type=media)

    @app.post("/sessions")
    async def create_session(request: Request):
        body = await request.json()
        image_id = str(body.get("image_id", ""))
        if store.image_path(image_id) is None:
            return _error(404, f"unknown image {image_id}", fld="image_id")
        session = store.create_session(image_id, str(body.get("observer_id", "")))
        return JSONResponse(status_code=201, content={"session_id": session.session_id})

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = store.get_session(session_id)
        if session is None:
            return _error(404, f"unknown session {session_id}")
        return session.to_dict()

    @app.post("/sessions/{session_id}/measure")
    async def measure(session_id: str, request: Request):
        session = store.get_session(session_id)
        if session is None:
            return _error(404, f"unknown session {session_id}")
        img = store.load_image(session.image_id)
        if img is None:
            return _error(404, f"image {session.image_id} missing from store")
        body = await request.json()
        rois = {}
        for name in ("roi_superior", "roi_inferior"):
            try:
                rois[name] = _parse_rect(body, name)
                rois[name].validate(img, min_size=16)
            except ValueError as exc:
                return _error(422, str(exc), fld=name)
        try:
            cfg = _merge_config(body.get("config"))
        except (TypeError, ValueError) as exc:
            return _error(422, f"bad config override: {exc}", fld="config")
        try:
            m = measure_cobb(
                img, rois["roi_superior"], rois["roi_inferior"], cfg,
                image_id=session.image_id, observer_id=session.observer_id,
            )
        except EndplateNotFoundError as exc:
            return _error(422, str(exc), fld=f"roi_{exc.roi}")
        record = measurement_response(m)
        store.append_measurement(session, record)
        return record

    @app.get("/export/observations.csv")
    def export_observations(group: str | None = None, method: str | None = None):
        import csv as _csv
        from io import StringIO

        buf = StringIO()
        writer = _csv.writer(buf, lineterminator="\n")
        writer.writerow(OBSERVATIONS_HEADER)
        for session in store.all_sessions():
            for m in session.measurements:
                g = group_of(m["cobb_deg"])
                if group is not None and g != group:
                    continue
                if method is not None and method != "digital":
                    continue
                writer.writerow(
                    [m["image_id"], m["observer_id"], session.session_id, g,
                     "digital", f"{m['cobb_deg']:.2f}"]
                )
        return PlainTextResponse(buf.getvalue(), media_type="text/csv")

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=os.fspath(ui_dir), html=True), name="ui")

    return app
