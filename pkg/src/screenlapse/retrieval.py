"""One-click reopening of whatever a frame shows.

A frame's category decides what "open" means: a browser frame reopens its
URL, a document frame its file, a project frame its project root, and
anything without a usable locator falls back to launching the application.
Execution goes through a pluggable launcher so tests record intents instead
of touching the desktop.
"""

from __future__ import annotations

import logging
import os
import subprocess
import sys
import webbrowser
from dataclasses import dataclass, field
from enum import Enum
from typing import Protocol

from .registry import AppCategory
from .store import FrameRecord

logger = logging.getLogger(__name__)


class ActionKind(str, Enum):
    OPEN_URL = "open_url"
    OPEN_FILE = "open_file"
    OPEN_ENCLOSING_FOLDER = "open_enclosing_folder"
    OPEN_PROJECT = "open_project"
    LAUNCH_APP = "launch_app"


class NotApplicable(ValueError):
    """The requested action variant does not exist for this frame."""


class OpenTargetMissing(FileNotFoundError):
    """The recorded path no longer exists; surfaced, never repaired."""

    def __init__(self, target: str) -> None:
        super().__init__(f"target no longer at recorded path: {target}")
        self.target = target


class LaunchError(RuntimeError):
    """The launcher adapter failed to perform the action."""


@dataclass(frozen=True)
class RetrievalAction:
    """Executable intent derived from a frame. Serializes as kind/target/app_hint."""

    kind: ActionKind
    target: str
    app_hint: str

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "target": self.target, "app_hint": self.app_hint}

    @classmethod
    def from_dict(cls, data: dict) -> "RetrievalAction":
        return cls(
            kind=ActionKind(data["kind"]),
            target=str(data["target"]),
            app_hint=str(data["app_hint"]),
        )


class Launcher(Protocol):
    def execute(self, action: RetrievalAction) -> None:
        """Perform the action; raise LaunchError on failure."""
        ...


@dataclass
class RecordingLauncher:
    """Test default: records actions verbatim in call order, touches nothing."""

    calls: list[RetrievalAction] = field(default_factory=list)

    def execute(self, action: RetrievalAction) -> None:
        self.calls.append(action)


class SystemLauncher:
    """Hands actions to the desktop via the system default handler.

    app_hint is available for adapters that want to route to the original
    application; this launcher does not.
    """

    def execute(self, action: RetrievalAction) -> None:
        try:
            if action.kind is ActionKind.OPEN_URL:
                webbrowser.open(action.target)
                return
            if action.kind is ActionKind.LAUNCH_APP:
                self._open(action.app_hint)
                return
            self._open(action.target)
        except Exception as exc:
            raise LaunchError(f"{action.kind.value} failed: {exc}") from exc

    @staticmethod
    def _open(target: str) -> None:
        if sys.platform == "darwin":
            subprocess.run(["open", target], check=True)
        elif os.name == "nt":
            os.startfile(target)  # type: ignore[attr-defined]
        else:
            subprocess.run(["xdg-open", target], check=True)


def derive_action(record: FrameRecord) -> RetrievalAction:
    """The one action a frame's Open button performs. Total: every record
    yields an action, degrading to launch_app when the locator is unusable."""
    locator = record.locator
    if record.category is AppCategory.WEB_BROWSER and locator.get("url"):
        return RetrievalAction(ActionKind.OPEN_URL, locator["url"], record.app_id)
    if record.category is AppCategory.DOCUMENT_EDITOR and locator.get("file_path"):
        return RetrievalAction(ActionKind.OPEN_FILE, locator["file_path"], record.app_id)
    if record.category is AppCategory.PROJECT_BASED and locator.get("project_root"):
        return RetrievalAction(ActionKind.OPEN_PROJECT, locator["project_root"], record.app_id)
    return RetrievalAction(ActionKind.LAUNCH_APP, "", record.app_id)


def derive_folder_action(record: FrameRecord) -> RetrievalAction:
    """Open the enclosing folder of a document frame's file.

    Only document_editor frames with a recorded path have one; anything
    else raises NotApplicable.
    """
    if record.category is not AppCategory.DOCUMENT_EDITOR:
        raise NotApplicable(f"no folder to open for category {record.category.value}")
    path = record.locator.get("file_path", "")
    if not path:
        raise NotApplicable("document frame has no recorded file path")
    parent = os.path.dirname(path) or "/"
    return RetrievalAction(ActionKind.OPEN_ENCLOSING_FOLDER, parent, record.app_id)


_PATH_KINDS = frozenset(
    {ActionKind.OPEN_FILE, ActionKind.OPEN_ENCLOSING_FOLDER, ActionKind.OPEN_PROJECT}
)


def execute(action: RetrievalAction, launcher: Launcher) -> None:
    """Run an action through the launcher.

    Local-path targets are checked for existence first and OpenTargetMissing
    is raised before the launcher is ever called; URLs are dispatched without
    validation, dead links being the browser's problem.
    """
    if action.kind in _PATH_KINDS:
        if not action.target or not os.path.exists(action.target):
            raise OpenTargetMissing(action.target)
    launcher.execute(action)
