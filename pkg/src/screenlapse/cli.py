"""Command line interface.

Storage root resolution: --storage-root flag, then the SCREENLAPSE_STORAGE_ROOT
environment variable, then ~/.screenlapse. Exit codes: 0 success, 1 runtime
error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import signal
import sys
import time
from datetime import date
from pathlib import Path

from .capture import CaptureLoop, ScriptedMetadataProvider, SinkFull
from .config import (
    CaptureConfig,
    ConfigError,
    DEFAULT_NATIVE_H,
    DEFAULT_NATIVE_W,
    load_config,
    save_config,
    validate_config,
)
from .frames import SyntheticFrameSource
from .registry import AppSnapshot, default_category_map, load_category_map
from .service import ServiceConfig, serve
from .store import FrameStore, PartialGc, RetentionPolicy, estimate_disk

logger = logging.getLogger(__name__)

ENV_STORAGE_ROOT = "SCREENLAPSE_STORAGE_ROOT"
PIDFILE = "recorder.pid"


def resolve_storage_root(flag_value: str | None) -> Path:
    if flag_value:
        return Path(flag_value).expanduser()
    env = os.environ.get(ENV_STORAGE_ROOT)
    if env:
        return Path(env).expanduser()
    return Path.home() / ".screenlapse"


def _fmt_bytes(n: float) -> str:
    return f"{n / 1e9:.2f} GB" if n >= 1e9 else f"{n / 1e6:.2f} MB"


def _effective_config(root: Path, args: argparse.Namespace) -> CaptureConfig:
    """Persisted config with any provided flags layered on top."""
    from dataclasses import replace

    cfg = load_config(root)
    overrides = {}
    for flag, field in (
        ("interval", "interval_s"),
        ("scale", "scale"),
        ("quality", "quality"),
        ("retention_days", "retention_days"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[field] = value
    if getattr(args, "app_switch", None):
        overrides["capture_on_app_switch"] = True
    return replace(cfg, **overrides) if overrides else cfg


# -- record ------------------------------------------------------------


def _pidfile(root: Path) -> Path:
    return root / PIDFILE


def cmd_record_start(args: argparse.Namespace) -> int:
    root = resolve_storage_root(args.storage_root)
    root.mkdir(parents=True, exist_ok=True)
    cfg = _effective_config(root, args)

    script = [s.strip() or None for s in args.script.split(",")] if args.script else ["desktop"]
    source = SyntheticFrameSource(
        script=script,
        seed=args.seed,
        native_w=args.native_width,
        native_h=args.native_height,
        scale=cfg.scale,
    )
    try:
        validate_config(cfg, source.native_w, source.native_h)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    save_config(cfg)

    store = FrameStore(root)
    store.run_gc(RetentionPolicy(cfg.retention_days))
    cmap = load_category_map(args.category_map) if args.category_map else default_category_map()
    provider = ScriptedMetadataProvider(
        [AppSnapshot(app_id="synthetic", app_name="Synthetic Source")]
    )
    loop = CaptureLoop(cfg, source, provider, store, cmap)

    pidfile = _pidfile(root)
    pidfile.write_text(str(os.getpid()), encoding="utf-8")
    for sig in (signal.SIGINT, signal.SIGTERM):
        signal.signal(sig, lambda *_: loop.stop())
    if args.duration is not None:
        # A real deployment stops via signal; --duration bounds demo runs.
        deadline = time.time() + args.duration
        import threading

        threading.Timer(max(0.0, deadline - time.time()), loop.stop).start()

    print(f"recording to {root} every {cfg.interval_s:g}s (ctrl-c to stop)")
    try:
        loop.run(max_ticks=args.ticks)
    except SinkFull as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    finally:
        pidfile.unlink(missing_ok=True)
    print(f"stopped after {loop.records_emitted} records")
    return 0


def cmd_record_stop(args: argparse.Namespace) -> int:
    root = resolve_storage_root(args.storage_root)
    pidfile = _pidfile(root)
    if not pidfile.is_file():
        print("no recorder running (no pidfile)", file=sys.stderr)
        return 1
    pid = int(pidfile.read_text().strip())
    try:
        os.kill(pid, signal.SIGTERM)
    except ProcessLookupError:
        pidfile.unlink(missing_ok=True)
        print(f"stale pidfile for pid {pid}; removed", file=sys.stderr)
        return 1
    print(f"sent stop signal to recorder (pid {pid})")
    return 0


def cmd_record_status(args: argparse.Namespace) -> int:
    root = resolve_storage_root(args.storage_root)
    pidfile = _pidfile(root)
    running = False
    pid = None
    if pidfile.is_file():
        pid = int(pidfile.read_text().strip())
        try:
            os.kill(pid, 0)
            running = True
        except ProcessLookupError:
            running = False
    stats = FrameStore(root).store_stats()
    state = f"running (pid {pid})" if running else "stopped"
    print(f"recorder: {state}")
    print(
        f"store: {stats.journal_days} day(s), {stats.blob_count} image(s), "
        f"{_fmt_bytes(stats.total_bytes)}, dedup ratio {stats.dedup_ratio:.1f}"
    )
    return 0


# -- one-shot commands ---------------------------------------------------


def cmd_estimate(args: argparse.Namespace) -> int:
    root = resolve_storage_root(args.storage_root)
    cfg = _effective_config(root, args)
    try:
        validate_config(cfg, args.native_width, args.native_height)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    value = estimate_disk(cfg, args.native_width, args.native_height, args.hours)
    text = f"{int(value)}" if float(value).is_integer() else f"{value}"
    print(text)
    print(
        f"# {_fmt_bytes(value)} for {args.hours:g} h at {cfg.interval_s:g}s interval, "
        f"quality {cfg.quality:g}, {args.native_width}x{args.native_height} scale {cfg.scale:g}"
    )
    return 0


def cmd_gc(args: argparse.Namespace) -> int:
    root = resolve_storage_root(args.storage_root)
    cfg = load_config(root)
    days = args.retention_days if args.retention_days is not None else cfg.retention_days
    store = FrameStore(root)
    try:
        report = store.run_gc(RetentionPolicy(days))
    except PartialGc as exc:
        print(f"error: {exc}", file=sys.stderr)
        for path in exc.failed:
            print(f"  undeleted: {path}", file=sys.stderr)
        return 1
    print(
        f"segments_deleted={report.segments_deleted} blobs_deleted={report.blobs_deleted} "
        f"bytes_freed={report.bytes_freed}"
    )
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    root = resolve_storage_root(args.storage_root)
    stats = FrameStore(root).store_stats()
    print(json.dumps(stats.to_dict(), indent=2))
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    root = resolve_storage_root(args.storage_root)
    try:
        day = date.fromisoformat(args.date)
    except ValueError:
        print(f"error: not a YYYY-MM-DD date: {args.date!r}", file=sys.stderr)
        return 1
    dest = Path(args.dest) if args.dest else Path(f"export-{day.isoformat()}")
    store = FrameStore(root)
    try:
        store.export_day(day, dest)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    segment = FrameStore(dest).read_day(day)
    print(f"exported {len(segment)} record(s) for {day.isoformat()} to {dest}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    root = resolve_storage_root(args.storage_root)
    root.mkdir(parents=True, exist_ok=True)
    service_cfg = ServiceConfig(
        storage_root=root, host=args.host, port=args.port, read_only=args.read_only
    )
    ui_dir = Path(args.ui_dir) if args.ui_dir else None
    try:
        serve(service_cfg, ui_dir=ui_dir)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        pass
    return 0


# -- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="screenlapse",
        description="Record a visual history of the screen and reopen what it shows.",
    )
    parser.add_argument("--storage-root", help=f"data directory (or ${ENV_STORAGE_ROOT})")
    sub = parser.add_subparsers(dest="command", required=True)

    record = sub.add_parser("record", help="control the recorder")
    record_sub = record.add_subparsers(dest="record_command", required=True)

    start = record_sub.add_parser("start", help="record in the foreground until stopped")
    start.add_argument("--interval", type=float, help="seconds between captures")
    start.add_argument("--scale", type=float, help="resolution scale in (0, 1]")
    start.add_argument("--quality", type=float, help="compression quality in (0, 1]")
    start.add_argument("--retention-days", type=int, help="days of history to keep")
    start.add_argument("--app-switch", action="store_true", help="also capture on app switches")
    start.add_argument("--duration", type=float, help="stop after this many seconds")
    start.add_argument("--ticks", type=int, help="stop after this many capture ticks")
    start.add_argument("--script", help="synthetic source symbols, comma separated")
    start.add_argument("--seed", type=int, default=0, help="synthetic source seed")
    start.add_argument("--native-width", type=int, default=DEFAULT_NATIVE_W)
    start.add_argument("--native-height", type=int, default=DEFAULT_NATIVE_H)
    start.add_argument("--category-map", help="path to a category map file")
    start.set_defaults(func=cmd_record_start)

    stop = record_sub.add_parser("stop", help="signal a running recorder to stop")
    stop.set_defaults(func=cmd_record_stop)

    status = record_sub.add_parser("status", help="recorder and store status")
    status.set_defaults(func=cmd_record_status)

    estimate = sub.add_parser("estimate", help="conservative disk estimate for a recording length")
    estimate.add_argument("--hours", type=float, required=True)
    estimate.add_argument("--interval", type=float, help="override configured interval")
    estimate.add_argument("--scale", type=float, help="override configured scale")
    estimate.add_argument("--quality", type=float, help="override configured quality")
    estimate.add_argument("--retention-days", type=int, help=argparse.SUPPRESS)
    estimate.add_argument("--native-width", type=int, default=DEFAULT_NATIVE_W)
    estimate.add_argument("--native-height", type=int, default=DEFAULT_NATIVE_H)
    estimate.set_defaults(func=cmd_estimate)

    gc = sub.add_parser("gc", help="delete history older than the retention window")
    gc.add_argument("--retention-days", type=int, help="override configured retention")
    gc.set_defaults(func=cmd_gc)

    stats = sub.add_parser("stats", help="store counters as JSON")
    stats.set_defaults(func=cmd_stats)

    export = sub.add_parser("export", help="copy one day's journal and images to a directory")
    export.add_argument("--date", required=True, help="YYYY-MM-DD")
    export.add_argument("--dest", help="target directory (default export-<date>)")
    export.set_defaults(func=cmd_export)

    srv = sub.add_parser("serve", help="run the loopback HTTP service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8765)
    srv.add_argument("--read-only", action="store_true")
    srv.add_argument("--ui-dir", help="serve a built player UI from this directory")
    srv.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
