from __future__ import annotations

from datetime import date, datetime, time as dtime, timedelta
from pathlib import Path

import pytest

from screenlapse.config import CaptureConfig
from screenlapse.frames import CaptureTrigger, SyntheticFrameSource
from screenlapse.registry import AppCategory
from screenlapse.store import FrameMeta, FrameStore


class SimTime:
    """Fake clock for the capture loop: sleeping advances time instantly.

    Crossing ``stop_at`` fires ``on_stop`` (wired to loop.stop), which the
    loop notices right after the sleep returns.
    """

    def __init__(self, start: float = 1_754_000_000.0):
        self.now = start
        self.start = start
        self.stop_at: float | None = None
        self.on_stop = None

    def time(self) -> float:
        return self.now

    def sleep(self, seconds: float) -> None:
        self.now += seconds
        if self.stop_at is not None and self.now >= self.stop_at and self.on_stop:
            self.on_stop()


def make_frame(symbol: str, ts: datetime, native_w: int = 64, native_h: int = 48):
    """A deterministic small frame whose pixels depend only on ``symbol``."""
    source = SyntheticFrameSource(script=[symbol], native_w=native_w, native_h=native_h)
    frame = source.next_frame()
    frame.captured_at = ts
    return frame


def make_meta(
    category: AppCategory = AppCategory.NO_METADATA,
    label: str = "Application",
    locator: dict | None = None,
    app_id: str = "test.app",
    app_name: str = "Test App",
    trigger: CaptureTrigger = CaptureTrigger.INTERVAL,
) -> FrameMeta:
    return FrameMeta(
        app_id=app_id,
        app_name=app_name,
        category=category,
        label=label,
        locator=locator or {},
        trigger=trigger,
    )


def local_ts(day: date, hh: int = 9, mm: int = 0, ss: int = 0, ms: int = 0) -> datetime:
    """A wall-clock timestamp on ``day`` carrying the machine's UTC offset."""
    return datetime.combine(day, dtime(hh, mm, ss, ms * 1000)).astimezone()


def append_symbols(store: FrameStore, cfg: CaptureConfig, day: date, symbols: list[str]):
    """Append one record per symbol at one-second spacing; returns the records."""
    records = []
    for i, symbol in enumerate(symbols):
        ts = local_ts(day) + timedelta(seconds=i)
        records.append(store.append(make_frame(symbol, ts), make_meta(), cfg))
    return records


@pytest.fixture
def store_root(tmp_path: Path) -> Path:
    return tmp_path / "history"


@pytest.fixture
def cfg(store_root: Path) -> CaptureConfig:
    return CaptureConfig(storage_root=store_root)


@pytest.fixture
def store(store_root: Path) -> FrameStore:
    return FrameStore(store_root)


# -- acceptance reporting ------------------------------------------------

_acceptance_results: list[tuple[str, bool]] = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        name = report.nodeid.split("::")[-1].removeprefix("test_")
        _acceptance_results.append((name, report.passed))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed in _acceptance_results:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}")
