"""screenlapse: a local-first visual history of the computer screen.

Records periodic (and app-switch-triggered) frames with frontmost-app
metadata, stores them deduplicated with an N-day retention window, and lets
a player scrub the history and reopen whatever a frame shows.
"""

from .config import CaptureConfig, ConfigError, validate_config
from .frames import CaptureTrigger, RawFrame, SyntheticFrameSource
from .registry import (
    AppCategory,
    AppSnapshot,
    CategoryMap,
    classify,
    default_category_map,
    extract_locator,
    load_category_map,
)
from .store import (
    BlobRef,
    DaySegment,
    FrameMeta,
    FrameRecord,
    FrameStore,
    GcReport,
    RetentionPolicy,
    StoreStats,
    estimate_disk,
)
from .timeline import Timeline, TimelineCursor, frame_at, open_timeline, scrub, step, tick_playback
from .retrieval import (
    ActionKind,
    RecordingLauncher,
    RetrievalAction,
    derive_action,
    derive_folder_action,
    execute,
)
from .capture import CaptureLoop, Recorder, ScriptedMetadataProvider, SwitchScript, poll_frontmost

__version__ = "0.1.0"

__all__ = [
    "AppCategory",
    "AppSnapshot",
    "ActionKind",
    "BlobRef",
    "CaptureConfig",
    "CaptureLoop",
    "CaptureTrigger",
    "CategoryMap",
    "ConfigError",
    "DaySegment",
    "FrameMeta",
    "FrameRecord",
    "FrameStore",
    "GcReport",
    "RawFrame",
    "Recorder",
    "RecordingLauncher",
    "RetentionPolicy",
    "RetrievalAction",
    "ScriptedMetadataProvider",
    "StoreStats",
    "SwitchScript",
    "SyntheticFrameSource",
    "Timeline",
    "TimelineCursor",
    "classify",
    "default_category_map",
    "derive_action",
    "derive_folder_action",
    "estimate_disk",
    "execute",
    "extract_locator",
    "frame_at",
    "load_category_map",
    "open_timeline",
    "poll_frontmost",
    "scrub",
    "step",
    "tick_playback",
    "validate_config",
    "__version__",
]
