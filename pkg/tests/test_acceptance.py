"""Acceptance suite: one test per release criterion, at stated tolerances.

Each test prints a PASS/FAIL line in the terminal summary (see conftest).
Criteria with a runtime budget assert it with a wall clock.
"""

from __future__ import annotations

import hashlib
import threading
import time
from datetime import date, timedelta

import pytest
import requests
from hypothesis import given, settings, strategies as st

from screenlapse.capture import CaptureLoop, ScriptedMetadataProvider
from screenlapse.config import CaptureConfig, FrameTooSmall, IntervalTooLong, validate_config
from screenlapse.frames import SyntheticFrameSource
from screenlapse.registry import (
    AppCategory,
    AppSnapshot,
    classify,
    default_category_map,
    extract_locator,
)
from screenlapse.retrieval import (
    ActionKind,
    NotApplicable,
    RecordingLauncher,
    derive_action,
    derive_folder_action,
    execute,
)
from screenlapse.service import (
    BindRefusedNonLoopback,
    ServiceConfig,
    ServiceState,
    create_server,
)
from screenlapse.store import (
    FrameMeta,
    FrameRecord,
    FrameStore,
    RetentionPolicy,
    estimate_disk,
)
from screenlapse.timeline import advance_index, open_timeline, scrub_index, step_index

from conftest import SimTime, append_symbols, local_ts, make_frame, make_meta

GB = 1e9


def test_estimator_calibration(tmp_path):
    """10 s / 1440x1080 / q 0.8 / 80 h lands in [18 GB, 22 GB]; linearity exact."""
    started = time.monotonic()
    cfg = CaptureConfig(storage_root=tmp_path, interval_s=10, scale=1.0, quality=0.8)
    value = estimate_disk(cfg, 1440, 1080, 80)
    assert 18 * GB <= value <= 22 * GB

    half_interval = CaptureConfig(storage_root=tmp_path, interval_s=5, quality=0.8)
    assert estimate_disk(half_interval, 1440, 1080, 80) == 2 * value
    half_quality = CaptureConfig(storage_root=tmp_path, interval_s=10, quality=0.4)
    assert estimate_disk(half_quality, 1440, 1080, 80) == value / 2
    assert time.monotonic() - started < 1.0


def test_dedup_thousand_static_ticks_and_mixed_oracle(tmp_path):
    """1,000 ticks of a static screen: 1 blob, 1,000 lines, ratio 1000.0."""
    started = time.monotonic()
    root = tmp_path / "static"
    cfg = CaptureConfig(storage_root=root, interval_s=1.0)
    store = FrameStore(root)
    source = SyntheticFrameSource(script=["static"], native_w=640, native_h=480)
    sim = SimTime()
    loop = CaptureLoop(
        cfg, source, ScriptedMetadataProvider([AppSnapshot(app_id="x", app_name="X")]),
        store, default_category_map(), clock=sim.time, sleep=sim.sleep,
    )
    loop.run(max_ticks=1000)
    stats = store.store_stats()
    assert stats.blob_count == 1
    journal = next(store.journal_root.glob("*.jsonl"))
    assert journal.read_text().count("\n") == 1000
    assert stats.dedup_ratio == 1000.0

    # mixed script: blob count must equal the independent hash-set oracle
    script = ["a", "b", "a", "c", "b", "d", "a", "e", "e", "c"] * 3
    mixed_root = tmp_path / "mixed"
    mixed_cfg = CaptureConfig(storage_root=mixed_root, interval_s=1.0)
    mixed_store = FrameStore(mixed_root)
    mixed_source = SyntheticFrameSource(script=script, native_w=640, native_h=480)
    sim2 = SimTime()
    CaptureLoop(
        mixed_cfg, mixed_source, ScriptedMetadataProvider([AppSnapshot(app_id="x", app_name="X")]),
        mixed_store, default_category_map(), clock=sim2.time, sleep=sim2.sleep,
    ).run(max_ticks=len(script))
    oracle_source = SyntheticFrameSource(script=script, native_w=640, native_h=480)
    oracle = {hashlib.sha256(oracle_source.next_frame().pixels).hexdigest() for _ in script}
    assert mixed_store.store_stats().blob_count == len(oracle)
    assert time.monotonic() - started < 10.0


def test_retention_gc_fifteen_days_window_ten(tmp_path):
    """Exactly 5 of 15 segments deleted; shared blobs survive; rerun no-op."""
    started = time.monotonic()
    store = FrameStore(tmp_path)
    cfg = CaptureConfig(storage_root=tmp_path)
    today = date(2026, 6, 20)
    days = [today - timedelta(days=i) for i in range(15)]
    # every day gets its own frame plus one blob shared across all days
    for d in days:
        append_symbols(store, cfg, d, [f"unique-{d.isoformat()}", "shared-wallpaper"])

    # reference-counting oracle, computed before anything is deleted
    refs_by_day = {d: store._scan_refs(store.journal_path(d)) for d in days}
    doomed = {d for d in days if d < today - timedelta(days=9)}
    survivor_refs = set().union(*(refs_by_day[d] for d in days if d not in doomed))
    doomed_refs = set().union(*(refs_by_day[d] for d in doomed))
    expect_swept = doomed_refs - survivor_refs

    report = store.run_gc(RetentionPolicy(10), today=today)
    assert report.segments_deleted == 5
    assert report.blobs_deleted == len(expect_swept) == 5
    shared = next(iter(survivor_refs & doomed_refs))
    assert store.has_blob(shared)
    for digest in expect_swept:
        assert not store.has_blob(digest)

    second = store.run_gc(RetentionPolicy(10), today=today)
    assert (second.segments_deleted, second.blobs_deleted, second.bytes_freed) == (0, 0, 0)
    assert time.monotonic() - started < 5.0


def test_journal_robustness_truncated_tail(tmp_path):
    """100 records; a mid-byte truncation costs exactly the final line."""
    started = time.monotonic()
    store = FrameStore(tmp_path)
    cfg = CaptureConfig(storage_root=tmp_path)
    day = date(2026, 3, 14)
    written = append_symbols(store, cfg, day, [f"s{i % 7}" for i in range(100)])

    round_trip = store.read_day(day)
    assert round_trip.records == written
    assert round_trip.skipped_count == 0

    path = store.journal_path(day)
    raw = path.read_bytes()
    path.write_bytes(raw[:-9])  # crash mid final line
    segment = store.read_day(day)
    assert len(segment) == 99
    assert segment.skipped_count == 1
    assert segment.records == written[:99]
    assert time.monotonic() - started < 5.0


def test_segmentation_midnight_boundary_and_export(tmp_path):
    """23:59:59 and 00:00:01 land in different segments; exports re-read equal."""
    root = tmp_path / "history"
    store = FrameStore(root)
    cfg = CaptureConfig(storage_root=root)
    day1 = date(2026, 3, 14)
    day2 = day1 + timedelta(days=1)
    store.append(make_frame("late", local_ts(day1, 23, 59, 59)), make_meta(), cfg)
    store.append(make_frame("early", local_ts(day2, 0, 0, 1)), make_meta(), cfg)
    assert len(store.read_day(day1)) == 1
    assert len(store.read_day(day2)) == 1

    for day in (day1, day2):
        dest = tmp_path / f"export-{day.isoformat()}"
        store.export_day(day, dest)
        exported = FrameStore(dest)
        assert exported.read_day(day).records == store.read_day(day).records
        assert (dest / "journal" / f"{day.isoformat()}.jsonl").read_bytes() == \
            store.journal_path(day).read_bytes()


def test_config_bounds_inclusive(tmp_path):
    """61 s and 319 px rejected; 60 s and 320 px accepted."""
    with pytest.raises(IntervalTooLong):
        validate_config(CaptureConfig(storage_root=tmp_path, interval_s=61), 1440, 1080)
    validate_config(CaptureConfig(storage_root=tmp_path, interval_s=60), 1440, 1080)
    with pytest.raises(FrameTooSmall):
        validate_config(CaptureConfig(storage_root=tmp_path, scale=319 / 1080), 1920, 1080)
    validate_config(CaptureConfig(storage_root=tmp_path, scale=320 / 1080), 1920, 1080)


def test_category_label_action_matrix(tmp_path):
    """(label, action kind) per category, via the real classify/derive path."""
    cmap = default_category_map()
    doc = tmp_path / "report.key"
    doc.write_text("x")
    cases = [
        ("org.mozilla.firefox", AppSnapshot(app_id="org.mozilla.firefox", app_name="Firefox",
                                            url="https://example.com/article", page_title="Article"),
         "Page URL", ActionKind.OPEN_URL, "https://example.com/article"),
        ("com.microsoft.Word", AppSnapshot(app_id="com.microsoft.Word", app_name="Word",
                                           file_path=str(doc)),
         "File Directory", ActionKind.OPEN_FILE, str(doc)),
        ("com.jetbrains.PyCharm", AppSnapshot(app_id="com.jetbrains.PyCharm", app_name="PyCharm",
                                              project_root=str(tmp_path)),
         "Project", ActionKind.OPEN_PROJECT, str(tmp_path)),
        ("com.apple.Chess", AppSnapshot(app_id="com.apple.Chess", app_name="Chess"),
         "Application", ActionKind.LAUNCH_APP, ""),
    ]

    launcher = RecordingLauncher()
    expected_log = []
    records = []
    for app_id, snap, want_label, want_kind, want_target in cases:
        category, label = classify(cmap, app_id)
        assert label == want_label
        locator = extract_locator(category, snap)
        record = FrameRecord(
            ts=local_ts(date(2026, 3, 14)), blob="0" * 64, w=640, h=480,
            app_id=app_id, app_name=snap.app_name, category=category, label=label,
            locator=locator, trigger=make_meta().trigger,
        )
        records.append(record)
        action = derive_action(record)
        assert action.kind is want_kind
        assert action.target == want_target
        execute(action, launcher)
        expected_log.append(action)

    assert launcher.calls == expected_log

    # the folder variant exists for the document frame and nothing else
    folder = derive_folder_action(records[1])
    assert folder.kind is ActionKind.OPEN_ENCLOSING_FOLDER
    assert folder.target == str(doc.parent)
    for other in (records[0], records[2], records[3]):
        with pytest.raises(NotApplicable):
            derive_folder_action(other)


class TestTimelineMath:
    """Property tests over randomized lengths up to 1e5."""

    @settings(max_examples=300, deadline=None)
    @given(
        length=st.integers(1, 100_000),
        f1=st.floats(0.0, 1.0),
        f2=st.floats(0.0, 1.0),
    )
    def test_scrub_monotone_and_bounded(self, length, f1, f2):
        lo, hi = sorted([f1, f2])
        i_lo, i_hi = scrub_index(length, lo), scrub_index(length, hi)
        assert 0 <= i_lo <= i_hi <= length - 1
        assert scrub_index(length, 0.0) == 0
        assert scrub_index(length, 1.0) == length - 1

    @settings(max_examples=300, deadline=None)
    @given(length=st.integers(1, 100_000), data=st.data())
    def test_step_clamps(self, length, data):
        index = data.draw(st.integers(0, length - 1))
        assert 0 <= step_index(length, index, "next") <= length - 1
        assert 0 <= step_index(length, index, "prev") <= length - 1

    @settings(max_examples=300, deadline=None)
    @given(
        length=st.integers(1, 100_000),
        ticks=st.lists(
            st.tuples(st.sampled_from([1, 2, 5, 10, 20]), st.floats(0.0, 60.0)),
            max_size=30,
        ),
    )
    def test_playback_bound_safe(self, length, ticks):
        index = 0
        for speed, elapsed in ticks:
            index = advance_index(length, index, speed, elapsed)
            assert 0 <= index <= length - 1

    def test_initial_cursor_is_most_recent_frame(self, tmp_path):
        store = FrameStore(tmp_path)
        cfg = CaptureConfig(storage_root=tmp_path)
        day = date(2026, 3, 14)
        append_symbols(store, cfg, day, [f"s{i % 5}" for i in range(500)])
        tl, cursor = open_timeline(store, day)
        assert tl.length == 500
        assert cursor.index == 499
        assert cursor.playing is False


def test_service_loopback_and_side_effect_free_reads(tmp_path):
    """Non-loopback refused; 100 mixed GETs change nothing; bad open is 404."""
    for host in ("0.0.0.0", "10.0.0.5"):
        with pytest.raises(BindRefusedNonLoopback):
            create_server(ServiceConfig(storage_root=tmp_path, host=host, port=0))

    root = tmp_path / "history"
    store = FrameStore(root)
    cfg = CaptureConfig(storage_root=root)
    day = date(2026, 3, 14)
    append_symbols(store, cfg, day, ["a", "b", "c"])
    launcher = RecordingLauncher()
    service_cfg = ServiceConfig(storage_root=root, host="127.0.0.1", port=0)
    state = ServiceState(service_cfg, store, cfg, default_category_map(), launcher)
    server = create_server(service_cfg, state)
    thread = threading.Thread(target=lambda: server.serve_forever(poll_interval=0.02), daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{server.server_address[1]}"
    try:
        before = requests.get(base + "/stats").json()["stats"]
        paths = [
            "/dates",
            f"/timeline/{day.isoformat()}",
            f"/frame/{day.isoformat()}/0/meta",
            f"/frame/{day.isoformat()}/1/image",
            "/estimate?hours=80",
            "/config",
            "/stats",
        ]
        for i in range(100):
            assert requests.get(base + paths[i % len(paths)]).status_code == 200
        after = requests.get(base + "/stats").json()["stats"]
        assert after == before

        r = requests.post(base + "/open", json={"frame_id": "2026-01-01/3"})
        assert r.status_code == 404
        assert launcher.calls == []
    finally:
        server.shutdown()
        server.server_close()
