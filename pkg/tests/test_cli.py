from __future__ import annotations

import json
from datetime import date

import pytest

from screenlapse.cli import main, resolve_storage_root
from screenlapse.config import CaptureConfig
from screenlapse.store import FrameStore, estimate_disk

from conftest import append_symbols

DAY = date(2026, 3, 14)


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


class TestStorageRootResolution:
    def test_flag_wins(self, monkeypatch, tmp_path):
        monkeypatch.setenv("SCREENLAPSE_STORAGE_ROOT", str(tmp_path / "env"))
        assert resolve_storage_root(str(tmp_path / "flag")) == tmp_path / "flag"

    def test_env_override(self, monkeypatch, tmp_path):
        monkeypatch.setenv("SCREENLAPSE_STORAGE_ROOT", str(tmp_path / "env"))
        assert resolve_storage_root(None) == tmp_path / "env"

    def test_default_under_home(self, monkeypatch):
        monkeypatch.delenv("SCREENLAPSE_STORAGE_ROOT", raising=False)
        assert resolve_storage_root(None).name == ".screenlapse"


class TestEstimate:
    def test_prints_the_number_estimate_disk_returns(self, tmp_path, capsys):
        code, out, _ = run(
            ["--storage-root", str(tmp_path), "estimate", "--hours", "80"], capsys
        )
        assert code == 0
        printed = float(out.splitlines()[0])
        cfg = CaptureConfig(storage_root=tmp_path)
        assert printed == estimate_disk(cfg, 1440, 1080, 80)
        assert 18e9 <= printed <= 22e9
        assert "GB" in out

    def test_overrides_apply(self, tmp_path, capsys):
        code, out, _ = run(
            ["--storage-root", str(tmp_path), "estimate", "--hours", "80",
             "--interval", "20"], capsys
        )
        assert code == 0
        cfg = CaptureConfig(storage_root=tmp_path, interval_s=20)
        assert float(out.splitlines()[0]) == estimate_disk(cfg, 1440, 1080, 80)

    def test_missing_hours_is_usage_error(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--storage-root", str(tmp_path), "estimate"])
        assert exc.value.code == 2

    def test_invalid_config_is_runtime_error(self, tmp_path, capsys):
        code, _, err = run(
            ["--storage-root", str(tmp_path), "estimate", "--hours", "80",
             "--interval", "61"], capsys
        )
        assert code == 1
        assert "60" in err


class TestGcAndStats:
    def test_gc_on_empty_store_reports_zeros(self, tmp_path, capsys):
        code, out, _ = run(["--storage-root", str(tmp_path), "gc"], capsys)
        assert code == 0
        assert "segments_deleted=0 blobs_deleted=0 bytes_freed=0" in out

    def test_gc_deletes_stale_days(self, tmp_path, capsys):
        store = FrameStore(tmp_path)
        cfg = CaptureConfig(storage_root=tmp_path)
        append_symbols(store, cfg, DAY, ["old"])
        code, out, _ = run(["--storage-root", str(tmp_path), "gc"], capsys)
        assert code == 0
        assert "segments_deleted=1" in out

    def test_stats_json(self, tmp_path, capsys):
        store = FrameStore(tmp_path)
        cfg = CaptureConfig(storage_root=tmp_path)
        append_symbols(store, cfg, DAY, ["a", "a", "b"])
        code, out, _ = run(["--storage-root", str(tmp_path), "stats"], capsys)
        assert code == 0
        stats = json.loads(out)
        assert stats["blob_count"] == 2
        assert stats["dedup_ratio"] == 1.5


class TestExport:
    def test_export_round_trip(self, tmp_path, capsys):
        root = tmp_path / "history"
        store = FrameStore(root)
        cfg = CaptureConfig(storage_root=root)
        append_symbols(store, cfg, DAY, ["a", "b", "a"])
        dest = tmp_path / "out"
        code, out, _ = run(
            ["--storage-root", str(root), "export", "--date", DAY.isoformat(),
             "--dest", str(dest)], capsys
        )
        assert code == 0
        assert "3 record(s)" in out
        original = store.journal_path(DAY).read_bytes()
        assert (dest / "journal" / f"{DAY.isoformat()}.jsonl").read_bytes() == original
        assert FrameStore(dest).read_day(DAY).records == store.read_day(DAY).records

    def test_export_absent_date_fails(self, tmp_path, capsys):
        code, _, err = run(
            ["--storage-root", str(tmp_path), "export", "--date", "2026-01-01"], capsys
        )
        assert code == 1
        assert "no journal" in err

    def test_export_bad_date_fails(self, tmp_path, capsys):
        code, _, err = run(
            ["--storage-root", str(tmp_path), "export", "--date", "someday"], capsys
        )
        assert code == 1


class TestRecord:
    def test_record_start_bounded_by_ticks(self, tmp_path, capsys):
        code, out, _ = run(
            ["--storage-root", str(tmp_path), "record", "start",
             "--ticks", "1", "--script", "a", "--native-width", "640",
             "--native-height", "480"], capsys
        )
        assert code == 0
        assert "stopped after 1 records" in out
        store = FrameStore(tmp_path)
        assert len(store.dates()) == 1
        assert not (tmp_path / "recorder.pid").exists()

    def test_record_start_rejects_bad_config(self, tmp_path, capsys):
        code, _, err = run(
            ["--storage-root", str(tmp_path), "record", "start",
             "--ticks", "1", "--scale", "0.2"], capsys
        )
        assert code == 1
        assert "320" in err

    def test_record_status_when_stopped(self, tmp_path, capsys):
        code, out, _ = run(["--storage-root", str(tmp_path), "record", "status"], capsys)
        assert code == 0
        assert "stopped" in out

    def test_record_stop_without_pidfile(self, tmp_path, capsys):
        code, _, err = run(["--storage-root", str(tmp_path), "record", "stop"], capsys)
        assert code == 1
        assert "no recorder" in err

    def test_unknown_command_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["--storage-root", str(tmp_path), "transmogrify"])
        assert exc.value.code == 2
