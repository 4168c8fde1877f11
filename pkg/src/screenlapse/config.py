"""Recording configuration: user-tunable capture parameters and their hard bounds.

The bounds exist to keep the history useful while capping disk cost: frames
must stay recognizable (minimum scaled dimension) and the gap between frames
must stay short enough that activity is not lost (maximum interval).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace
from pathlib import Path

MAX_INTERVAL_S = 60.0
MIN_INTERVAL_S = 1.0
MIN_FRAME_DIM_PX = 320

# Fallback native size for estimates and the synthetic source.
DEFAULT_NATIVE_W = 1440
DEFAULT_NATIVE_H = 1080

CONFIG_FILENAME = "config.json"


class ConfigError(ValueError):
    """A recording parameter violates its allowed range."""


class IntervalTooLong(ConfigError):
    pass


class FrameTooSmall(ConfigError):
    pass


class BadRange(ConfigError):
    pass


@dataclass(frozen=True)
class CaptureConfig:
    """Recording parameters. ``storage_root`` is where journals and blobs live."""

    storage_root: Path
    interval_s: float = 10.0
    scale: float = 1.0
    quality: float = 0.8
    retention_days: int = 10
    capture_on_app_switch: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        d["storage_root"] = str(self.storage_root)
        return d


def validate_config(cfg: CaptureConfig, native_w: int, native_h: int) -> None:
    """Check every config invariant against the source's native resolution.

    Raises the :class:`ConfigError` subclass naming the violated bound;
    returns None when everything holds. Bounds are inclusive: 60 s and a
    320 px scaled minimum dimension are both accepted.
    """
    if native_w < 1 or native_h < 1:
        raise BadRange(f"native resolution must be positive, got {native_w}x{native_h}")
    if not (0.0 < cfg.scale <= 1.0):
        raise BadRange(f"scale must be in (0, 1], got {cfg.scale}")
    if not (0.0 < cfg.quality <= 1.0):
        raise BadRange(f"quality must be in (0, 1], got {cfg.quality}")
    if int(cfg.retention_days) < 1 or cfg.retention_days != int(cfg.retention_days):
        raise BadRange(f"retention_days must be an integer >= 1, got {cfg.retention_days}")
    if cfg.interval_s < MIN_INTERVAL_S:
        raise BadRange(f"interval_s must be >= {MIN_INTERVAL_S}, got {cfg.interval_s}")
    if cfg.interval_s > MAX_INTERVAL_S:
        raise IntervalTooLong(
            f"interval_s {cfg.interval_s} exceeds the {MAX_INTERVAL_S:.0f} s maximum"
        )
    scaled_min = round(min(native_w, native_h) * cfg.scale)
    if scaled_min < MIN_FRAME_DIM_PX:
        raise FrameTooSmall(
            f"scaled minimum dimension {scaled_min} px is below the "
            f"{MIN_FRAME_DIM_PX} px minimum"
        )


def config_path(storage_root: Path) -> Path:
    return Path(storage_root) / CONFIG_FILENAME


def load_config(storage_root: Path) -> CaptureConfig:
    """Read the persisted config under ``storage_root``, or defaults if absent."""
    root = Path(storage_root)
    cfg = CaptureConfig(storage_root=root)
    path = config_path(root)
    if not path.is_file():
        return cfg
    data = json.loads(path.read_text(encoding="utf-8"))
    fields = {
        k: data[k]
        for k in ("interval_s", "scale", "quality", "retention_days", "capture_on_app_switch")
        if k in data
    }
    return replace(cfg, **fields)


def save_config(cfg: CaptureConfig) -> Path:
    root = Path(cfg.storage_root)
    root.mkdir(parents=True, exist_ok=True)
    path = config_path(root)
    data = cfg.to_dict()
    del data["storage_root"]  # the file's location already names the root
    path.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
    return path
