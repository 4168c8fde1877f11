"""Application category registry.

Maps a frontmost application to one of four categories, picks the locator
fields worth keeping for that category, and supplies the display label the
player shows next to the locator. The rule table is a plain text file kept
apart from the code so it can be refreshed without touching the engine.
"""

from __future__ import annotations

import fnmatch
import warnings
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import IO, Iterable

LABEL_PAGE_URL = "Page URL"
LABEL_FILE_DIRECTORY = "File Directory"
LABEL_PROJECT = "Project"
LABEL_APPLICATION = "Application"


class AppCategory(str, Enum):
    WEB_BROWSER = "web_browser"
    DOCUMENT_EDITOR = "document_editor"
    PROJECT_BASED = "project_based"
    NO_METADATA = "no_metadata"


# Labels hard-coupled to their category; the loader rejects rules that differ.
REQUIRED_LABELS = {
    AppCategory.WEB_BROWSER: LABEL_PAGE_URL,
    AppCategory.DOCUMENT_EDITOR: LABEL_FILE_DIRECTORY,
}

FALLBACK = (AppCategory.NO_METADATA, LABEL_APPLICATION)


class MalformedMap(ValueError):
    """The category map document failed to parse."""

    def __init__(self, line_no: int, message: str) -> None:
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class DuplicateRuleWarning(UserWarning):
    pass


@dataclass(frozen=True)
class AppSnapshot:
    """Frontmost-application identity plus raw locator candidates.

    ``available`` is False when the provider could not deliver metadata;
    the frame is still recorded, just without anything to reopen.
    """

    app_id: str = ""
    app_name: str = ""
    window_title: str = ""
    url: str = ""
    page_title: str = ""
    file_path: str = ""
    project_root: str = ""
    available: bool = True

    @classmethod
    def unavailable(cls) -> "AppSnapshot":
        return cls(app_id="unknown", app_name="unknown", available=False)


@dataclass(frozen=True)
class CategoryRule:
    pattern: str
    category: AppCategory
    label: str


@dataclass(frozen=True)
class CategoryMap:
    version: int
    rules: tuple[CategoryRule, ...] = ()
    warnings: tuple[str, ...] = ()


def classify(cmap: CategoryMap, app_id: str) -> tuple[AppCategory, str]:
    """First matching rule wins; unmatched ids fall back to no_metadata.

    Total and pure: any string input yields a (category, label) pair.
    """
    folded = app_id.lower()
    for rule in cmap.rules:
        if fnmatch.fnmatchcase(folded, rule.pattern.lower()):
            return rule.category, rule.label
    return FALLBACK


def extract_locator(category: AppCategory, snapshot: AppSnapshot) -> dict[str, str]:
    """Project the category-appropriate locator out of a snapshot.

    Missing fields produce an empty locator of the right shape, never an
    error; reopening then degrades to launching the app.
    """
    if category is AppCategory.WEB_BROWSER:
        return {
            "url": snapshot.url or "",
            "page_title": snapshot.page_title or snapshot.window_title or "",
        }
    if category is AppCategory.DOCUMENT_EDITOR:
        path = snapshot.file_path or ""
        name = Path(path).name if path else ""
        return {"file_path": path, "file_name": name}
    if category is AppCategory.PROJECT_BASED:
        return {"project_root": snapshot.project_root or ""}
    return {}


def primary_locator_text(category: AppCategory, locator: dict[str, str]) -> str:
    """The single locator string shown beside the label in the player."""
    if category is AppCategory.WEB_BROWSER:
        return locator.get("url", "")
    if category is AppCategory.DOCUMENT_EDITOR:
        return locator.get("file_path", "")
    if category is AppCategory.PROJECT_BASED:
        return locator.get("project_root", "")
    return ""


def load_category_map(source: str | Path | IO[str] | Iterable[str]) -> CategoryMap:
    """Parse a category map document.

    Format: UTF-8, LF line endings, ``#`` comments, first content line
    ``version <int>``, then one rule per line ``pattern<TAB>category<TAB>label``.
    An empty document yields an empty map (everything classifies as
    no_metadata). Duplicate patterns keep the first rule and surface a
    :class:`DuplicateRuleWarning`.
    """
    if isinstance(source, (str, Path)):
        lines = Path(source).read_text(encoding="utf-8").splitlines()
    elif hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        lines = [ln.rstrip("\n") for ln in source]

    version: int | None = None
    rules: list[CategoryRule] = []
    seen: dict[str, int] = {}
    warn_msgs: list[str] = []

    for line_no, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if version is None:
            parts = line.split()
            if len(parts) != 2 or parts[0] != "version":
                raise MalformedMap(line_no, f"expected 'version <int>', got {line!r}")
            try:
                version = int(parts[1])
            except ValueError:
                raise MalformedMap(line_no, f"version must be an integer, got {parts[1]!r}")
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise MalformedMap(
                line_no, f"expected 'pattern<TAB>category<TAB>label', got {line!r}"
            )
        pattern, category_s, label = (f.strip() for f in fields)
        try:
            category = AppCategory(category_s)
        except ValueError:
            raise MalformedMap(line_no, f"unknown category {category_s!r}")
        required = REQUIRED_LABELS.get(category)
        if required is not None and label != required:
            raise MalformedMap(
                line_no, f"category {category.value} requires label {required!r}, got {label!r}"
            )
        key = pattern.lower()
        if key in seen:
            msg = f"duplicate pattern {pattern!r} at line {line_no}; first rule (line {seen[key]}) wins"
            warn_msgs.append(msg)
            warnings.warn(DuplicateRuleWarning(msg), stacklevel=2)
            continue
        seen[key] = line_no
        rules.append(CategoryRule(pattern=pattern, category=category, label=label))

    return CategoryMap(version=version or 0, rules=tuple(rules), warnings=tuple(warn_msgs))


def default_category_map() -> CategoryMap:
    """The rule table shipped with the package."""
    ref = resources.files("screenlapse.data").joinpath("default_category_map.txt")
    with ref.open("r", encoding="utf-8") as fh:
        return load_category_map(fh)
