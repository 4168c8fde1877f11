"""Durable local storage for captured frames.

Two kinds of data live under the storage root:

* ``blobs/<hh>/<hash>.jpg``: compressed images addressed by the SHA-256 of
  the scaled raw pixel buffer (not of the encoded bytes, so identity is
  stable across encoder versions). Identical screens, consecutive or not,
  share one blob.
* ``journal/YYYY-MM-DD.jsonl``: one append-only line file per local calendar
  day, one JSON record per line. The day is taken from the record's own
  timestamp offset, which makes files self-describing across timezone
  changes.

Write order is blob first, journal line second: a crash can lose the line
but can never leave a line pointing at a half-written image. Journals are
read leniently, so a crash-truncated tail costs exactly that tail.

Retention is the privacy mechanism: only the most recent N days survive
garbage collection, and blobs no surviving day references are swept.
"""

from __future__ import annotations

import errno
import hashlib
import io
import json
import logging
import os
import shutil
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from pathlib import Path

from PIL import Image

from .config import CaptureConfig
from .frames import CaptureTrigger, RawFrame
from .registry import AppCategory

logger = logging.getLogger(__name__)

JOURNAL_DIR = "journal"
BLOB_DIR = "blobs"

# Bytes per pixel of JPG output as a linear function of quality. Calibrated
# so that q=0.8 at 1440x1080 costs ~694 KB per frame; deliberately generous,
# and the estimate takes no dedup credit, so real usage lands at or under it.
BYTES_PER_PIXEL_PER_QUALITY = 0.56

# Pillow quality scale tops out at 95 before compression stops being useful.
_MAX_ENCODER_QUALITY = 95


class StorageFull(OSError):
    """The disk under the storage root is out of space."""


class EncodeFailure(RuntimeError):
    """A frame could not be compressed; the frame is dropped, capture goes on."""


class CorruptJournal(RuntimeError):
    """A non-empty journal file yielded zero parseable records."""


class PartialGc(RuntimeError):
    """Some GC deletions failed; carries what succeeded and what survived."""

    def __init__(self, report: "GcReport", failed: list[Path]) -> None:
        super().__init__(f"gc left {len(failed)} path(s) undeleted; rerun is safe")
        self.report = report
        self.failed = failed


@dataclass(frozen=True)
class BlobRef:
    """Content address of one stored image plus its compressed size."""

    hash: str
    byte_size: int


@dataclass(frozen=True)
class FrameMeta:
    """Classified metadata the capture loop pairs with a frame."""

    app_id: str
    app_name: str
    category: AppCategory
    label: str
    locator: dict[str, str]
    trigger: CaptureTrigger


@dataclass(frozen=True)
class FrameRecord:
    """One journal entry. Field names match the wire format exactly."""

    ts: datetime
    blob: str
    w: int
    h: int
    app_id: str
    app_name: str
    category: AppCategory
    label: str
    locator: dict[str, str]
    trigger: CaptureTrigger

    def to_dict(self) -> dict:
        return {
            "ts": self.ts.isoformat(),
            "blob": self.blob,
            "w": self.w,
            "h": self.h,
            "app_id": self.app_id,
            "app_name": self.app_name,
            "category": self.category.value,
            "label": self.label,
            "locator": dict(self.locator),
            "trigger": self.trigger.value,
        }

    def to_json_line(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "FrameRecord":
        ts = datetime.fromisoformat(data["ts"])
        if ts.tzinfo is None:
            raise ValueError("record timestamp must carry a UTC offset")
        locator = data["locator"]
        if not isinstance(locator, dict):
            raise ValueError("locator must be an object")
        return cls(
            ts=ts,
            blob=str(data["blob"]),
            w=int(data["w"]),
            h=int(data["h"]),
            app_id=str(data["app_id"]),
            app_name=str(data["app_name"]),
            category=AppCategory(data["category"]),
            label=str(data["label"]),
            locator={str(k): str(v) for k, v in locator.items()},
            trigger=CaptureTrigger(data["trigger"]),
        )

    @classmethod
    def from_json_line(cls, line: str) -> "FrameRecord":
        return cls.from_dict(json.loads(line))


@dataclass
class DaySegment:
    """Ordered records of one local calendar day; the unit of retention."""

    date: date
    records: list[FrameRecord] = field(default_factory=list)
    sealed: bool = False
    skipped_count: int = 0

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class RetentionPolicy:
    retention_days: int


@dataclass(frozen=True)
class GcReport:
    segments_deleted: int = 0
    blobs_deleted: int = 0
    bytes_freed: int = 0

    def to_dict(self) -> dict:
        return {
            "segments_deleted": self.segments_deleted,
            "blobs_deleted": self.blobs_deleted,
            "bytes_freed": self.bytes_freed,
        }


@dataclass(frozen=True)
class StoreStats:
    blob_count: int
    journal_days: int
    total_bytes: int
    dedup_ratio: float

    def to_dict(self) -> dict:
        return {
            "blob_count": self.blob_count,
            "journal_days": self.journal_days,
            "total_bytes": self.total_bytes,
            "dedup_ratio": self.dedup_ratio,
        }


def estimate_disk(cfg: CaptureConfig, native_w: int, native_h: int, hours: float) -> float:
    """Conservative bytes needed to record for ``hours`` under ``cfg``.

    frames = hours * 3600 / interval; each frame is costed at
    BYTES_PER_PIXEL_PER_QUALITY * quality bytes per scaled pixel. No dedup
    credit is taken. Linear in frame count and in quality, exactly.
    """
    frames = hours * 3600.0 / cfg.interval_s
    bytes_per_frame = (
        BYTES_PER_PIXEL_PER_QUALITY
        * cfg.quality
        * (native_w * cfg.scale)
        * (native_h * cfg.scale)
    )
    return frames * bytes_per_frame


def _encode_jpeg(frame: RawFrame, quality: float) -> bytes:
    """Baseline JPG encode of the raw RGB buffer. Raises EncodeFailure."""
    q = max(1, min(_MAX_ENCODER_QUALITY, round(quality * _MAX_ENCODER_QUALITY)))
    try:
        img = Image.frombytes("RGB", (frame.width, frame.height), frame.pixels)
        buf = io.BytesIO()
        img.save(buf, format="JPEG", quality=q, progressive=False)
        return buf.getvalue()
    except StorageFull:
        raise
    except Exception as exc:
        raise EncodeFailure(f"could not encode {frame.width}x{frame.height} frame: {exc}") from exc


class FrameStore:
    """Single-writer, many-reader store rooted at one directory."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self.journal_root = self.root / JOURNAL_DIR
        self.blob_root = self.root / BLOB_DIR
        self.journal_root.mkdir(parents=True, exist_ok=True)
        self.blob_root.mkdir(parents=True, exist_ok=True)
        self._last_ts: dict[date, datetime] = {}

    # -- paths ---------------------------------------------------------

    def journal_path(self, day: date) -> Path:
        return self.journal_root / f"{day.isoformat()}.jsonl"

    def blob_path(self, digest: str) -> Path:
        return self.blob_root / digest[:2] / f"{digest}.jpg"

    def has_blob(self, digest: str) -> bool:
        return self.blob_path(digest).is_file()

    def dates(self) -> list[date]:
        """Days that have a journal, ascending."""
        days = []
        for p in self.journal_root.glob("*.jsonl"):
            try:
                days.append(date.fromisoformat(p.stem))
            except ValueError:
                continue
        return sorted(days)

    # -- writing -------------------------------------------------------

    def append(self, frame: RawFrame, meta: FrameMeta, cfg: CaptureConfig) -> FrameRecord:
        """Store a frame and journal its record; returns the record.

        The blob is written (or found, when the same pixels were seen
        before) and durably on disk before the journal line that references
        it. Raises StorageFull when the disk is out of space and
        EncodeFailure when compression fails; both leave the journal
        untouched.
        """
        digest = hashlib.sha256(frame.pixels).hexdigest()
        blob_file = self.blob_path(digest)
        if not blob_file.is_file():
            data = _encode_jpeg(frame, cfg.quality)
            self._write_blob(blob_file, data)

        if frame.captured_at.tzinfo is None:
            raise ValueError("frame timestamps must carry a UTC offset")
        day = frame.captured_at.date()
        last = self._last_ts.get(day)
        if last is not None and frame.captured_at <= last:
            raise ValueError(
                f"timestamps must strictly increase within a day segment "
                f"({frame.captured_at.isoformat()} after {last.isoformat()})"
            )

        record = FrameRecord(
            ts=frame.captured_at,
            blob=digest,
            w=frame.width,
            h=frame.height,
            app_id=meta.app_id,
            app_name=meta.app_name,
            category=meta.category,
            label=meta.label,
            locator=dict(meta.locator),
            trigger=meta.trigger,
        )
        self._append_line(self.journal_path(day), record.to_json_line())
        self._last_ts[day] = frame.captured_at
        return record

    def _write_blob(self, path: Path, data: bytes) -> None:
        # Temp-then-rename keeps blob writes idempotent by hash and ensures
        # a journal line never points at a partial file.
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        try:
            with open(tmp, "wb") as fh:
                fh.write(data)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, path)
        except OSError as exc:
            tmp.unlink(missing_ok=True)
            if exc.errno == errno.ENOSPC:
                raise StorageFull(exc.errno, f"no space left writing {path.name}") from exc
            raise

    def _append_line(self, path: Path, line: str) -> None:
        try:
            with open(path, "a", encoding="utf-8", newline="\n") as fh:
                fh.write(line + "\n")
        except OSError as exc:
            if exc.errno == errno.ENOSPC:
                raise StorageFull(exc.errno, f"no space left appending {path.name}") from exc
            raise

    # -- reading -------------------------------------------------------

    def read_day(self, day: date) -> DaySegment:
        """Parse one day's journal into an ordered, validated segment.

        Malformed lines (a crash-truncated tail, typically) are skipped and
        counted, never fatal. CorruptJournal is raised only when a non-empty
        file yields zero records.
        """
        path = self.journal_path(day)
        sealed = day < date.today()
        if not path.is_file():
            return DaySegment(date=day, records=[], sealed=sealed)
        text = path.read_text(encoding="utf-8")
        records: list[FrameRecord] = []
        skipped = 0
        lines = text.splitlines()
        for line in lines:
            if not line.strip():
                skipped += 1
                continue
            try:
                records.append(FrameRecord.from_json_line(line))
            except (ValueError, KeyError, TypeError):
                skipped += 1
        if lines and not records:
            raise CorruptJournal(f"{path.name}: none of {len(lines)} line(s) parsed")
        records.sort(key=lambda r: r.ts)
        return DaySegment(date=day, records=records, sealed=sealed, skipped_count=skipped)

    def blob_size(self, digest: str) -> int:
        path = self.blob_path(digest)
        return path.stat().st_size if path.is_file() else 0

    def blob_ref(self, digest: str) -> BlobRef:
        return BlobRef(hash=digest, byte_size=self.blob_size(digest))

    # -- retention -----------------------------------------------------

    def run_gc(self, policy: RetentionPolicy, today: date | None = None) -> GcReport:
        """Delete segments older than the retention window, then sweep blobs.

        Keeps exactly the ``retention_days`` most recent calendar days
        ending at ``today``. A blob is swept when no surviving journal
        references it, provided it either belonged to a deleted segment or
        predates today (so a blob the writer just wrote, ahead of its
        journal line, is never touched). Rerunning is a no-op; failures
        raise PartialGc and a rerun finishes the job.
        """
        if today is None:
            today = date.today()
        cutoff = today - timedelta(days=policy.retention_days - 1)
        doomed = [d for d in self.dates() if d < cutoff]

        doomed_refs: set[str] = set()
        for d in doomed:
            doomed_refs |= self._scan_refs(self.journal_path(d))

        failed: list[Path] = []
        segments_deleted = 0
        bytes_freed = 0
        for d in doomed:
            path = self.journal_path(d)
            size = path.stat().st_size
            try:
                path.unlink()
            except OSError:
                failed.append(path)
                continue
            segments_deleted += 1
            bytes_freed += size
            self._last_ts.pop(d, None)

        surviving_refs: set[str] = set()
        for d in self.dates():
            surviving_refs |= self._scan_refs(self.journal_path(d))

        today_start = datetime.combine(today, datetime.min.time()).timestamp()
        blobs_deleted = 0
        for blob_file in sorted(self.blob_root.glob("*/*.jpg")):
            digest = blob_file.stem
            if digest in surviving_refs:
                continue
            stat = blob_file.stat()
            if digest not in doomed_refs and stat.st_mtime >= today_start:
                continue  # freshly written, its journal line may be in flight
            try:
                blob_file.unlink()
            except OSError:
                failed.append(blob_file)
                continue
            blobs_deleted += 1
            bytes_freed += stat.st_size

        report = GcReport(
            segments_deleted=segments_deleted,
            blobs_deleted=blobs_deleted,
            bytes_freed=bytes_freed,
        )
        if failed:
            raise PartialGc(report, failed)
        return report

    def _scan_refs(self, path: Path) -> set[str]:
        """Blob hashes referenced by a journal, tolerating malformed lines."""
        refs: set[str] = set()
        if not path.is_file():
            return refs
        for line in path.read_text(encoding="utf-8").splitlines():
            try:
                blob = json.loads(line).get("blob")
            except (ValueError, AttributeError):
                continue
            if isinstance(blob, str) and blob:
                refs.add(blob)
        return refs

    # -- reporting -----------------------------------------------------

    def store_stats(self) -> StoreStats:
        """Exact counts from disk. total_bytes is the image payload."""
        blob_count = 0
        total_bytes = 0
        for blob_file in self.blob_root.glob("*/*.jpg"):
            blob_count += 1
            total_bytes += blob_file.stat().st_size
        journal_days = 0
        lines = 0
        for p in self.journal_root.glob("*.jsonl"):
            journal_days += 1
            lines += p.read_text(encoding="utf-8").count("\n")
        ratio = (lines / blob_count) if blob_count else 1.0
        return StoreStats(
            blob_count=blob_count,
            journal_days=journal_days,
            total_bytes=total_bytes,
            dedup_ratio=ratio,
        )

    def export_day(self, day: date, dest: str | Path) -> Path:
        """Copy one day's journal plus every blob it references to ``dest``.

        The export mirrors the store layout, so re-reading it with another
        FrameStore yields the same segment. The journal copy is byte-exact.
        """
        src = self.journal_path(day)
        if not src.is_file():
            raise FileNotFoundError(f"no journal for {day.isoformat()}")
        dest = Path(dest)
        out_journal = dest / JOURNAL_DIR / src.name
        out_journal.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(src, out_journal)
        missing = 0
        for digest in sorted(self._scan_refs(src)):
            blob_file = self.blob_path(digest)
            if not blob_file.is_file():
                missing += 1
                continue
            out_blob = dest / BLOB_DIR / digest[:2] / blob_file.name
            out_blob.parent.mkdir(parents=True, exist_ok=True)
            shutil.copy2(blob_file, out_blob)
        if missing:
            logger.warning("export of %s: %d referenced blob(s) missing", day, missing)
        return dest
