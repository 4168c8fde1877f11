"""Navigable view over one day's frames: play, scrub, step.

A Timeline is an immutable snapshot of a day segment taken at open time;
cursors are cheap immutable values, so every navigation op returns a new
cursor and is safe to call from anywhere. Playback rate is frames per
second over the stored sequence, not wall-time acceleration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from datetime import date, datetime
from typing import Literal

from .registry import AppCategory, primary_locator_text
from .store import BlobRef, FrameRecord, FrameStore

ALLOWED_SPEEDS = (1, 2, 5, 10, 20)
DEFAULT_SPEED = 10


class EmptyTimeline(ValueError):
    pass


class IndexOutOfRange(IndexError):
    pass


@dataclass(frozen=True)
class Timeline:
    date: date
    frames: tuple[FrameRecord, ...]

    @property
    def length(self) -> int:
        return len(self.frames)


@dataclass(frozen=True)
class TimelineCursor:
    index: int
    playing: bool = False
    speed: int = DEFAULT_SPEED

    def __post_init__(self) -> None:
        if self.speed not in ALLOWED_SPEEDS:
            raise ValueError(f"speed must be one of {ALLOWED_SPEEDS}, got {self.speed}")
        if self.index < 0:
            raise ValueError(f"index must be >= 0, got {self.index}")


@dataclass(frozen=True)
class FrameView:
    """What the player shows beside the image for one frame."""

    app_name: str
    category: AppCategory
    label: str
    locator_text: str
    ts: datetime


def open_timeline(store: FrameStore, day: date) -> tuple[Timeline, TimelineCursor | None]:
    """Load a day and position the cursor at its most recent frame, paused.

    An empty day is a valid state: the timeline has no frames and the
    cursor is None.
    """
    segment = store.read_day(day)
    tl = Timeline(date=day, frames=tuple(segment.records))
    if tl.length == 0:
        return tl, None
    return tl, TimelineCursor(index=tl.length - 1, playing=False, speed=DEFAULT_SPEED)


def scrub_index(length: int, fraction: float) -> int:
    """Pure index math behind :func:`scrub`; rounds half away from zero."""
    if length < 1:
        raise EmptyTimeline("cannot scrub an empty timeline")
    fraction = min(1.0, max(0.0, fraction))
    return int(math.floor(fraction * (length - 1) + 0.5))


def scrub(tl: Timeline, fraction: float) -> int:
    """Map a slider position in [0, 1] to a frame index."""
    return scrub_index(tl.length, fraction)


def step_index(length: int, index: int, direction: Literal["prev", "next"]) -> int:
    """Move one frame, clamped to [0, length - 1]."""
    if direction == "next":
        return min(length - 1, index + 1)
    if direction == "prev":
        return max(0, index - 1)
    raise ValueError(f"direction must be 'prev' or 'next', got {direction!r}")


def step(tl: Timeline, cursor: TimelineCursor, direction: Literal["prev", "next"]) -> TimelineCursor:
    if tl.length < 1:
        raise EmptyTimeline("cannot step an empty timeline")
    return replace(cursor, index=step_index(tl.length, cursor.index, direction))


def advance_index(length: int, index: int, speed: int, elapsed: float) -> int:
    """Playback advancement: whole frames only, clamped at the end."""
    if elapsed < 0:
        raise ValueError(f"elapsed must be >= 0, got {elapsed}")
    return min(length - 1, index + math.floor(elapsed * speed))


def tick_playback(tl: Timeline, cursor: TimelineCursor, elapsed: float) -> TimelineCursor:
    """Advance a playing cursor by ``elapsed`` seconds of playback.

    Reaching the last frame stops playback; there is no polling for frames
    appended after the timeline was opened.
    """
    if tl.length < 1:
        raise EmptyTimeline("cannot play an empty timeline")
    if not cursor.playing:
        return cursor
    new_index = advance_index(tl.length, cursor.index, cursor.speed, elapsed)
    playing = new_index < tl.length - 1
    return replace(cursor, index=new_index, playing=playing)


def set_speed(cursor: TimelineCursor, speed: int) -> TimelineCursor:
    return replace(cursor, speed=speed)


def set_playing(cursor: TimelineCursor, playing: bool) -> TimelineCursor:
    return replace(cursor, playing=playing)


def frame_at(tl: Timeline, index: int, store: FrameStore | None = None) -> tuple[BlobRef, FrameView]:
    """The blob reference and display view for one frame index."""
    if not (0 <= index < tl.length):
        raise IndexOutOfRange(f"index {index} outside [0, {tl.length - 1}]")
    record = tl.frames[index]
    size = store.blob_size(record.blob) if store is not None else 0
    view = FrameView(
        app_name=record.app_name,
        category=record.category,
        label=record.label,
        locator_text=primary_locator_text(record.category, record.locator),
        ts=record.ts,
    )
    return BlobRef(hash=record.blob, byte_size=size), view
