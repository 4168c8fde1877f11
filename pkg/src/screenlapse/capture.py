"""The capture loop: periodic and app-switch-triggered frame acquisition.

One logical writer drives everything. Each tick it polls the frontmost
application under a deadline (a hung provider can cost metadata, never a
frame), pulls a frame from the source, classifies it, and appends it to the
store. Clock and sleep are injectable, so tests run thousands of simulated
ticks in milliseconds against the same code path production uses.
"""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from typing import Callable, Iterable, Protocol

from .config import CaptureConfig
from .frames import CaptureTrigger, FrameSource, RawFrame, SourceUnavailable
from .registry import AppSnapshot, CategoryMap, classify, extract_locator
from .store import EncodeFailure, FrameMeta, FrameRecord, FrameStore, RetentionPolicy, StorageFull

logger = logging.getLogger(__name__)

# At most one app-switch capture per window; an interval tick scheduled
# inside the window after one is skipped rather than doubled up.
SWITCH_DEBOUNCE_S = 0.5

DEFAULT_META_TIMEOUT_S = 1.0

_ONE_MS = timedelta(milliseconds=1)


class ProviderTimeout(RuntimeError):
    """The metadata provider missed its deadline."""


class SinkFull(RuntimeError):
    """The store could not take the frame; the loop halts."""


class MetadataProvider(Protocol):
    def snapshot(self) -> AppSnapshot:
        """Describe the frontmost application right now."""
        ...


class FrameSink(Protocol):
    def append(self, frame: RawFrame, meta: FrameMeta, cfg: CaptureConfig) -> FrameRecord: ...


def poll_frontmost(meta: MetadataProvider, timeout_s: float | None = DEFAULT_META_TIMEOUT_S) -> AppSnapshot:
    """Poll the provider, returning the no-metadata snapshot on any failure.

    With a timeout the call runs on a daemon thread and is abandoned at the
    deadline; a provider that hangs or raises can never stall or kill the
    capture loop.
    """
    if timeout_s is None:
        try:
            snap = meta.snapshot()
        except Exception:
            return AppSnapshot.unavailable()
        return snap if snap is not None else AppSnapshot.unavailable()

    box: dict[str, AppSnapshot] = {}
    done = threading.Event()

    def _run() -> None:
        try:
            snap = meta.snapshot()
            if snap is not None:
                box["snap"] = snap
        except Exception:
            pass
        finally:
            done.set()

    worker = threading.Thread(target=_run, daemon=True, name="metadata-poll")
    worker.start()
    if not done.wait(timeout_s) or "snap" not in box:
        return AppSnapshot.unavailable()
    return box["snap"]


@dataclass
class ScriptedMetadataProvider:
    """Deterministic provider for tests and demos.

    Yields the scripted snapshots in order, repeating the last one. A None
    entry raises ProviderTimeout for that poll.
    """

    script: list[AppSnapshot | None]

    def __post_init__(self) -> None:
        self._pos = 0

    def snapshot(self) -> AppSnapshot:
        if not self.script:
            raise ProviderTimeout("empty script")
        entry = self.script[min(self._pos, len(self.script) - 1)]
        self._pos += 1
        if entry is None:
            raise ProviderTimeout("scripted timeout")
        return entry


class SwitchEvents(Protocol):
    def next_event(self, now: float, before: float) -> float | None:
        """Consume and return the earliest switch time in [now, before), if any."""
        ...


class SwitchScript:
    """Scripted frontmost-app switch times (seconds on the loop clock)."""

    def __init__(self, times: Iterable[float]) -> None:
        self._times = sorted(times)

    def next_event(self, now: float, before: float) -> float | None:
        for i, t in enumerate(self._times):
            if t >= before:
                return None
            if t >= now:
                del self._times[i]
                return t
        return None


class CaptureLoop:
    """Single-writer loop emitting one FrameRecord per tick.

    The stop signal may be set from any thread and takes effect at the next
    wakeup. Timestamps are stamped from the wall clock but forced strictly
    monotonic, so a clock regression mid-run cannot reorder the journal.
    """

    def __init__(
        self,
        cfg: CaptureConfig,
        source: FrameSource,
        meta: MetadataProvider,
        sink: FrameSink,
        category_map: CategoryMap,
        clock: Callable[[], float] = time.time,
        sleep: Callable[[float], None] | None = None,
        switch_events: SwitchEvents | None = None,
        meta_timeout_s: float | None = DEFAULT_META_TIMEOUT_S,
        debounce_s: float = SWITCH_DEBOUNCE_S,
    ) -> None:
        self.cfg = cfg
        self.source = source
        self.meta = meta
        self.sink = sink
        self.category_map = category_map
        self._clock = clock
        # The default sleep waits on the stop event, so stop() interrupts a
        # long interval instead of letting it run out.
        self._sleep = sleep if sleep is not None else (lambda s: self._stop.wait(s))
        self._switches = switch_events
        self._meta_timeout = meta_timeout_s
        self._debounce = debounce_s
        self._stop = threading.Event()
        self._last_ts: datetime | None = None
        self.records_emitted = 0

    def stop(self) -> None:
        self._stop.set()

    @property
    def stopped(self) -> bool:
        return self._stop.is_set()

    def run(self, max_ticks: int | None = None) -> None:
        """Run until the stop signal (or, mostly for tests, a tick budget).

        Raises SinkFull when the store reports it cannot take more data;
        every other per-frame failure is logged and survived.
        """
        next_tick = self._clock()
        ticks = 0
        last_switch_capture: float | None = None
        while not self._stop.is_set():
            if max_ticks is not None and ticks >= max_ticks:
                break
            now = self._clock()

            event_time = None
            if self._switches is not None and self.cfg.capture_on_app_switch:
                event_time = self._switches.next_event(now, next_tick)
            if event_time is not None:
                if event_time > now:
                    self._sleep(event_time - now)
                if self._stop.is_set():
                    break
                if last_switch_capture is None or (event_time - last_switch_capture) >= self._debounce:
                    self._capture(CaptureTrigger.APP_SWITCH)
                    last_switch_capture = event_time
                continue

            if next_tick > now:
                self._sleep(next_tick - now)
                if self._stop.is_set():
                    break
            if last_switch_capture is not None and (next_tick - last_switch_capture) < self._debounce:
                logger.debug("tick at %.3f debounced after app switch", next_tick)
            else:
                self._capture(CaptureTrigger.INTERVAL)
            ticks += 1
            next_tick += self.cfg.interval_s

    def _capture(self, trigger: CaptureTrigger) -> None:
        snap = poll_frontmost(self.meta, self._meta_timeout)
        try:
            frame = self.source.next_frame()
        except SourceUnavailable as exc:
            logger.warning("frame source unavailable: %s; retrying next tick", exc)
            return
        if frame is None:
            logger.warning("frame source unavailable; retrying next tick")
            return
        frame.captured_at = self._stamp()

        category, label = classify(self.category_map, snap.app_id)
        locator = extract_locator(category, snap) if snap.available else {}
        meta = FrameMeta(
            app_id=snap.app_id,
            app_name=snap.app_name,
            category=category,
            label=label,
            locator=locator,
            trigger=trigger,
        )
        try:
            record = self.sink.append(frame, meta, self.cfg)
        except EncodeFailure as exc:
            logger.error("frame dropped: %s", exc)
            return
        except StorageFull as exc:
            self._stop.set()
            raise SinkFull(str(exc)) from exc
        self._last_ts = record.ts
        self.records_emitted += 1

    def _stamp(self) -> datetime:
        """Wall-clock timestamp with offset, forced strictly increasing."""
        now = datetime.fromtimestamp(self._clock()).astimezone()
        if self._last_ts is not None and now <= self._last_ts:
            now = self._last_ts + _ONE_MS
        return now


class _GcOnDayChange:
    """Sink wrapper running retention GC when the journal day rolls over.

    GC only ever touches days before today, so it cannot race the append
    it piggybacks on.
    """

    def __init__(self, store: FrameStore, policy: RetentionPolicy) -> None:
        self._store = store
        self._policy = policy
        self._day: date | None = None

    def append(self, frame: RawFrame, meta: FrameMeta, cfg: CaptureConfig) -> FrameRecord:
        day = frame.captured_at.date()
        if self._day is not None and day != self._day:
            try:
                self._store.run_gc(self._policy, today=day)
            except Exception:
                logger.exception("day-rollover gc failed; capture continues")
        self._day = day
        return self._store.append(frame, meta, cfg)


class Recorder:
    """Owns a capture loop on a background thread.

    Runs retention GC at startup and on every day rollover, mirroring the
    ephemerality contract without a separate scheduler process.
    """

    def __init__(
        self,
        cfg: CaptureConfig,
        source: FrameSource,
        meta: MetadataProvider,
        store: FrameStore,
        category_map: CategoryMap,
        switch_events: SwitchEvents | None = None,
    ) -> None:
        self.cfg = cfg
        self.store = store
        policy = RetentionPolicy(cfg.retention_days)
        self._startup_policy = policy
        # A stopped loop stays stopped; restarting builds a fresh one.
        self._make_loop = lambda: CaptureLoop(
            cfg,
            source,
            meta,
            _GcOnDayChange(store, policy),
            category_map,
            switch_events=switch_events,
        )
        self.loop = self._make_loop()
        self._thread: threading.Thread | None = None
        self.started_at: datetime | None = None
        self.error: str | None = None

    @property
    def running(self) -> bool:
        return self._thread is not None and self._thread.is_alive()

    def start(self) -> None:
        if self.running:
            return
        try:
            self.store.run_gc(self._startup_policy)
        except Exception:
            logger.exception("startup gc failed; recording anyway")
        if self.loop.stopped:
            self.loop = self._make_loop()
        self.error = None
        self.started_at = datetime.now().astimezone()
        self._thread = threading.Thread(target=self._run, daemon=True, name="capture-loop")
        self._thread.start()

    def _run(self) -> None:
        try:
            self.loop.run()
        except SinkFull as exc:
            self.error = str(exc)
            logger.error("recording halted: %s", exc)

    def stop(self, timeout_s: float = 5.0) -> None:
        self.loop.stop()
        if self._thread is not None:
            self._thread.join(timeout_s)
            self._thread = None

    def status(self) -> dict:
        return {
            "running": self.running,
            "records_emitted": self.loop.records_emitted,
            "started_at": self.started_at.isoformat() if self.started_at else None,
            "error": self.error,
        }
