"""Frame acquisition primitives and the deterministic synthetic source.

Real screen grabbing is platform glue and lives out of tree; anything that
can hand the capture loop scaled RGB pixel buffers satisfies the
:class:`FrameSource` contract. The in-tree :class:`SyntheticFrameSource`
renders procedural frames from a seed and a symbol script, so every test and
demo run is bit-reproducible.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from typing import Callable, Protocol, Sequence, runtime_checkable

import numpy as np


class CaptureTrigger(str, Enum):
    INTERVAL = "interval"
    APP_SWITCH = "app_switch"


class SourceUnavailable(RuntimeError):
    """The frame source cannot deliver a frame right now."""


@dataclass
class RawFrame:
    """One captured frame, already scaled to the configured size.

    ``pixels`` is a packed RGB buffer of exactly width * height * 3 bytes.
    """

    captured_at: datetime
    pixels: bytes
    width: int
    height: int
    native_w: int
    native_h: int

    def __post_init__(self) -> None:
        expected = self.width * self.height * 3
        if len(self.pixels) != expected:
            raise ValueError(
                f"pixel buffer is {len(self.pixels)} bytes, expected {expected} "
                f"for {self.width}x{self.height} RGB"
            )


@runtime_checkable
class FrameSource(Protocol):
    """Contract the capture loop pulls frames from."""

    native_w: int
    native_h: int

    def next_frame(self) -> RawFrame | None:
        """Return the next frame, or None when the source is unavailable."""
        ...


def scaled_size(native_w: int, native_h: int, scale: float) -> tuple[int, int]:
    return round(native_w * scale), round(native_h * scale)


class SyntheticFrameSource:
    """Procedural frame source keyed by a seed and a symbol script.

    Each script entry names one frame's content; equal symbols render
    bit-identical pixel buffers (the dedup oracle relies on this). A ``None``
    entry simulates an unavailable source for that pull. The script repeats
    when exhausted. Scaling is nearest-neighbor sampling of the native
    pattern, so buffers are deterministic across platforms.
    """

    def __init__(
        self,
        script: Sequence[str | None],
        seed: int = 0,
        native_w: int = 640,
        native_h: int = 480,
        scale: float = 1.0,
        clock: Callable[[], datetime] | None = None,
    ) -> None:
        if not script:
            raise ValueError("script must contain at least one entry")
        self.script = list(script)
        self.seed = seed
        self.native_w = native_w
        self.native_h = native_h
        self.scale = scale
        self._clock = clock or (lambda: datetime.now().astimezone())
        self._pos = 0
        self._cache: dict[str, bytes] = {}

    def next_frame(self) -> RawFrame | None:
        symbol = self.script[self._pos % len(self.script)]
        self._pos += 1
        if symbol is None:
            return None
        w, h = scaled_size(self.native_w, self.native_h, self.scale)
        pixels = self._cache.get(symbol)
        if pixels is None:
            pixels = self._render(symbol, w, h)
            self._cache[symbol] = pixels
        return RawFrame(
            captured_at=self._clock(),
            pixels=pixels,
            width=w,
            height=h,
            native_w=self.native_w,
            native_h=self.native_h,
        )

    def _render(self, symbol: str, w: int, h: int) -> bytes:
        key = hashlib.sha256(f"{self.seed}:{symbol}".encode()).digest()
        kx, ky, p0 = key[0] % 7 + 1, key[1] % 5 + 1, key[2]
        # Nearest-neighbor sample grid over the native-resolution pattern.
        xs = (np.arange(w, dtype=np.int64) * self.native_w) // max(w, 1)
        ys = (np.arange(h, dtype=np.int64) * self.native_h) // max(h, 1)
        base = (xs[None, :] * kx + ys[:, None] * ky + p0) % 256
        rgb = np.stack(
            [base, (base + key[3]) % 256, (base + key[4]) % 256], axis=-1
        ).astype(np.uint8)
        return rgb.tobytes()
