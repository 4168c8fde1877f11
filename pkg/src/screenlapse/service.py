"""Loopback-only HTTP service for the player UI and scripts.

Privacy stance: the history never leaves the machine, so the server hard
refuses to bind anything but a loopback address. Read endpoints are
side-effect-free; mutating ones (config, gc, record control, open) are
serialized through one lock. Every response carries the schema version,
JSON bodies as a field and all responses as a header.

Endpoints:
    GET  /dates                      days with history, newest first
    GET  /timeline/{date}            full day of records with frame ids
    GET  /frame/{date}/{idx}/image   JPG bytes
    GET  /frame/{date}/{idx}/meta    one record
    POST /open                       {frame_id, variant: default|folder}
    GET  /config   PUT /config       recording parameters
    GET  /estimate?hours=H           conservative disk estimate
    POST /gc                         run retention GC now
    GET  /stats                      store counters
    POST /record/start|stop          control the hosted recorder
"""

from __future__ import annotations

import errno
import ipaddress
import json
import logging
import mimetypes
import threading
from dataclasses import dataclass
from datetime import date
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Callable
from urllib.parse import parse_qs, urlparse

from . import retrieval
from .capture import MetadataProvider, Recorder, ScriptedMetadataProvider
from .config import (
    CaptureConfig,
    ConfigError,
    DEFAULT_NATIVE_H,
    DEFAULT_NATIVE_W,
    load_config,
    save_config,
    validate_config,
)
from .frames import FrameSource, SyntheticFrameSource
from .registry import AppSnapshot, CategoryMap, default_category_map, load_category_map
from .store import FrameStore, PartialGc, RetentionPolicy

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class BindRefusedNonLoopback(OSError):
    """The configured bind address is not loopback; refusing to serve."""


class PortInUse(OSError):
    pass


@dataclass(frozen=True)
class ServiceConfig:
    storage_root: Path
    host: str = "127.0.0.1"
    port: int = 8765
    read_only: bool = False


def is_loopback(host: str) -> bool:
    if host == "localhost":
        return True
    try:
        return ipaddress.ip_address(host).is_loopback
    except ValueError:
        return False


def _default_source_factory(cfg: CaptureConfig) -> FrameSource:
    return SyntheticFrameSource(
        script=["desktop"], native_w=DEFAULT_NATIVE_W, native_h=DEFAULT_NATIVE_H, scale=cfg.scale
    )


def _default_provider_factory() -> MetadataProvider:
    return ScriptedMetadataProvider([AppSnapshot(app_id="synthetic", app_name="Synthetic Source")])


class ServiceState:
    """Everything the request handlers share."""

    def __init__(
        self,
        service_cfg: ServiceConfig,
        store: FrameStore,
        capture_cfg: CaptureConfig,
        category_map: CategoryMap,
        launcher: retrieval.Launcher,
        source_factory: Callable[[CaptureConfig], FrameSource] | None = None,
        provider_factory: Callable[[], MetadataProvider] | None = None,
        category_map_path: Path | None = None,
        ui_dir: Path | None = None,
    ) -> None:
        self.service_cfg = service_cfg
        self.store = store
        self.capture_cfg = capture_cfg
        self.category_map = category_map
        self.launcher = launcher
        self.source_factory = source_factory or _default_source_factory
        self.provider_factory = provider_factory or _default_provider_factory
        self.category_map_path = category_map_path
        self.ui_dir = ui_dir
        self.recorder: Recorder | None = None
        self.lock = threading.Lock()
        probe = self.source_factory(capture_cfg)
        self.native_w = probe.native_w
        self.native_h = probe.native_h

    def ensure_recorder(self) -> Recorder:
        if self.recorder is None:
            cfg = self.capture_cfg
            self.recorder = Recorder(
                cfg,
                self.source_factory(cfg),
                self.provider_factory(),
                self.store,
                self.category_map,
            )
        return self.recorder

    def apply_config(self, fields: dict) -> CaptureConfig:
        """Validate and atomically swap the capture config; persists on success.

        Also the hot-reload moment for the category map when one was loaded
        from a file.
        """
        from dataclasses import replace

        allowed = {"interval_s", "scale", "quality", "retention_days", "capture_on_app_switch"}
        unknown = set(fields) - allowed
        if unknown:
            raise ConfigError(f"unknown config field(s): {sorted(unknown)}")
        candidate = replace(self.capture_cfg, **fields)
        validate_config(candidate, self.native_w, self.native_h)
        save_config(candidate)
        self.capture_cfg = candidate
        if self.recorder is not None and not self.recorder.running:
            self.recorder = None  # next start picks up the new parameters
        if self.category_map_path is not None:
            try:
                self.category_map = load_category_map(self.category_map_path)
            except Exception:
                logger.exception("category map reload failed; keeping previous map")
        return candidate


class _Handler(BaseHTTPRequestHandler):
    server_version = "screenlapse"

    @property
    def state(self) -> ServiceState:
        return self.server.state  # type: ignore[attr-defined]

    def log_message(self, fmt: str, *args) -> None:
        logger.debug("%s %s", self.address_string(), fmt % args)

    # -- response helpers ------------------------------------------------

    def _send(self, code: int, body: bytes, content_type: str) -> None:
        self.send_response(code)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("X-Schema-Version", str(SCHEMA_VERSION))
        self.end_headers()
        self.wfile.write(body)

    def _json(self, code: int, payload: dict) -> None:
        payload = {"schema_version": SCHEMA_VERSION, **payload}
        self._send(code, json.dumps(payload).encode("utf-8"), "application/json")

    def _error(self, code: int, error: str, message: str, **extra) -> None:
        self._json(code, {"error": error, "message": message, **extra})

    def _read_json_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            return {}
        data = json.loads(raw.decode("utf-8"))
        if not isinstance(data, dict):
            raise ValueError("body must be a JSON object")
        return data

    def _reject_writes(self) -> bool:
        if self.state.service_cfg.read_only:
            self._error(403, "read_only", "service is running in read-only mode")
            return True
        return False

    # -- dispatch ----------------------------------------------------------

    def do_GET(self) -> None:
        url = urlparse(self.path)
        parts = [p for p in url.path.split("/") if p]
        try:
            if url.path == "/dates":
                return self._get_dates()
            if len(parts) == 2 and parts[0] == "timeline":
                return self._get_timeline(parts[1])
            if len(parts) == 4 and parts[0] == "frame":
                return self._get_frame(parts[1], parts[2], parts[3])
            if url.path == "/config":
                return self._json(200, {"config": self.state.capture_cfg.to_dict()})
            if url.path == "/estimate":
                return self._get_estimate(parse_qs(url.query))
            if url.path == "/stats":
                return self._json(200, {"stats": self.state.store.store_stats().to_dict()})
            if self.state.ui_dir is not None:
                return self._get_static(url.path)
            self._error(404, "not_found", f"no such endpoint: {url.path}")
        except Exception as exc:  # pragma: no cover - handler safety net
            logger.exception("GET %s failed", self.path)
            self._error(500, "internal", str(exc))

    def do_POST(self) -> None:
        try:
            if self.path == "/open":
                return self._post_open()
            if self.path == "/gc":
                return self._post_gc()
            if self.path == "/record/start":
                return self._post_record(start=True)
            if self.path == "/record/stop":
                return self._post_record(start=False)
            self._error(404, "not_found", f"no such endpoint: {self.path}")
        except json.JSONDecodeError as exc:
            self._error(400, "bad_request", f"invalid JSON body: {exc}")
        except Exception as exc:  # pragma: no cover - handler safety net
            logger.exception("POST %s failed", self.path)
            self._error(500, "internal", str(exc))

    def do_PUT(self) -> None:
        try:
            if self.path == "/config":
                return self._put_config()
            self._error(404, "not_found", f"no such endpoint: {self.path}")
        except json.JSONDecodeError as exc:
            self._error(400, "bad_request", f"invalid JSON body: {exc}")
        except Exception as exc:  # pragma: no cover - handler safety net
            logger.exception("PUT %s failed", self.path)
            self._error(500, "internal", str(exc))

    # -- GET handlers ------------------------------------------------------

    def _get_dates(self) -> None:
        days = [d.isoformat() for d in reversed(self.state.store.dates())]
        self._json(200, {"dates": days})

    def _parse_date(self, raw: str) -> date | None:
        try:
            return date.fromisoformat(raw)
        except ValueError:
            self._error(400, "bad_date", f"not a YYYY-MM-DD date: {raw!r}")
            return None

    def _get_timeline(self, raw_date: str) -> None:
        day = self._parse_date(raw_date)
        if day is None:
            return
        segment = self.state.store.read_day(day)
        frames = []
        for i, rec in enumerate(segment.records):
            entry = rec.to_dict()
            entry["id"] = f"{day.isoformat()}/{i}"
            frames.append(entry)
        self._json(
            200,
            {
                "date": day.isoformat(),
                "length": len(frames),
                "skipped_count": segment.skipped_count,
                "frames": frames,
            },
        )

    def _lookup_record(self, raw_date: str, raw_index: str):
        day = self._parse_date(raw_date)
        if day is None:
            return None
        try:
            index = int(raw_index)
        except ValueError:
            self._error(400, "bad_index", f"not an integer index: {raw_index!r}")
            return None
        segment = self.state.store.read_day(day)
        if not (0 <= index < len(segment.records)):
            self._error(404, "frame_not_found", f"no frame {raw_date}/{raw_index}")
            return None
        return day, index, segment.records[index]

    def _get_frame(self, raw_date: str, raw_index: str, what: str) -> None:
        found = self._lookup_record(raw_date, raw_index)
        if found is None:
            return
        day, index, record = found
        if what == "meta":
            entry = record.to_dict()
            entry["id"] = f"{day.isoformat()}/{index}"
            return self._json(200, {"frame": entry})
        if what == "image":
            blob_file = self.state.store.blob_path(record.blob)
            if not blob_file.is_file():
                return self._error(404, "blob_missing", f"image {record.blob} not in store")
            return self._send(200, blob_file.read_bytes(), "image/jpeg")
        self._error(404, "not_found", f"no such frame resource: {what}")

    def _get_estimate(self, query: dict) -> None:
        from .store import estimate_disk

        raw = (query.get("hours") or [None])[0]
        if raw is None:
            return self._error(400, "bad_request", "missing required query parameter: hours")
        try:
            hours = float(raw)
        except ValueError:
            return self._error(400, "bad_request", f"hours must be a number, got {raw!r}")
        if hours < 0:
            return self._error(400, "bad_request", "hours must be >= 0")
        value = estimate_disk(self.state.capture_cfg, self.state.native_w, self.state.native_h, hours)
        self._json(200, {"hours": hours, "bytes": value})

    def _get_static(self, path: str) -> None:
        ui_dir = self.state.ui_dir.resolve()
        rel = "index.html" if path in ("/", "/ui", "/ui/") else path.removeprefix("/ui/").lstrip("/")
        target = (ui_dir / rel).resolve()
        if not str(target).startswith(str(ui_dir)) or not target.is_file():
            return self._error(404, "not_found", f"no such endpoint: {path}")
        ctype = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        self._send(200, target.read_bytes(), ctype)

    # -- mutating handlers ---------------------------------------------------

    def _put_config(self) -> None:
        if self._reject_writes():
            return
        fields = self._read_json_body()
        with self.state.lock:
            try:
                cfg = self.state.apply_config(fields)
            except ConfigError as exc:
                return self._error(400, "config_invalid", str(exc))
        self._json(200, {"config": cfg.to_dict()})

    def _post_open(self) -> None:
        if self._reject_writes():
            return
        body = self._read_json_body()
        frame_id = body.get("frame_id", "")
        variant = body.get("variant", "default")
        if variant not in ("default", "folder"):
            return self._error(400, "bad_request", f"unknown variant {variant!r}")
        raw_date, _, raw_index = str(frame_id).partition("/")
        if not raw_date or not raw_index:
            return self._error(404, "frame_not_found", f"malformed frame id {frame_id!r}")
        with self.state.lock:
            found = self._lookup_record(raw_date, raw_index)
            if found is None:
                return
            _, _, record = found
            try:
                if variant == "folder":
                    action = retrieval.derive_folder_action(record)
                else:
                    action = retrieval.derive_action(record)
            except retrieval.NotApplicable as exc:
                return self._error(400, "not_applicable", str(exc))
            try:
                retrieval.execute(action, self.state.launcher)
            except retrieval.OpenTargetMissing as exc:
                return self._error(
                    410, "open_target_missing", str(exc), target=exc.target,
                    action=action.to_dict(),
                )
            except retrieval.LaunchError as exc:
                return self._error(502, "launch_failed", str(exc), action=action.to_dict())
        self._json(200, {"status": "ok", "action": action.to_dict()})

    def _post_gc(self) -> None:
        if self._reject_writes():
            return
        with self.state.lock:
            policy = RetentionPolicy(self.state.capture_cfg.retention_days)
            try:
                report = self.state.store.run_gc(policy)
            except PartialGc as exc:
                return self._error(
                    500, "partial_gc", str(exc),
                    report=exc.report.to_dict(), failed=[str(p) for p in exc.failed],
                )
        self._json(200, {"report": report.to_dict()})

    def _post_record(self, start: bool) -> None:
        if self._reject_writes():
            return
        with self.state.lock:
            recorder = self.state.ensure_recorder()
            if start:
                recorder.start()
            else:
                recorder.stop()
            status = recorder.status()
        self._json(200, {"record": status})


class _Server(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True


def create_server(
    service_cfg: ServiceConfig,
    state: ServiceState | None = None,
    **state_kwargs,
) -> _Server:
    """Bind the service. Refuses non-loopback addresses outright."""
    if not is_loopback(service_cfg.host):
        raise BindRefusedNonLoopback(
            f"refusing to bind {service_cfg.host}: this service is loopback-only"
        )
    if state is None:
        root = Path(service_cfg.storage_root)
        store = FrameStore(root)
        capture_cfg = load_config(root)
        state = ServiceState(
            service_cfg,
            store,
            capture_cfg,
            state_kwargs.pop("category_map", None) or default_category_map(),
            state_kwargs.pop("launcher", None) or retrieval.SystemLauncher(),
            **state_kwargs,
        )
    try:
        server = _Server((service_cfg.host, service_cfg.port), _Handler)
    except OSError as exc:
        if exc.errno == errno.EADDRINUSE:
            raise PortInUse(f"port {service_cfg.port} is already in use") from exc
        raise
    server.state = state  # type: ignore[attr-defined]
    return server


def serve(service_cfg: ServiceConfig, **state_kwargs) -> None:
    """Blocking entry point used by the CLI."""
    server = create_server(service_cfg, **state_kwargs)
    host, port = server.server_address[:2]
    logger.info("serving on http://%s:%s (storage: %s)", host, port, service_cfg.storage_root)
    try:
        server.serve_forever()
    finally:
        server.server_close()
