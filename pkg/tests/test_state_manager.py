import pytest

from padic_schrodinger.state_manager import SweepStore


def point_columns(**overrides):
    columns = {
        "p": 101,
        "B": "1",
        "N": 60,
        "tol": "1/1000000000000",
        "E": "200/101",
        "bracket_lo": "3/2",
        "bracket_hi": "5/2",
        "initial_lo": "3/2",
        "initial_hi": "5/2",
        "residual": "1.5e-40",
        "iterations": 40,
    }
    columns.update(overrides)
    return columns


@pytest.fixture
def store(tmp_path):
    with SweepStore(tmp_path / "nested" / "sweeps.db") as store:
        yield store


def test_run_lifecycle(store):
    store.create_run("run1", "grid.json", "abc", 3)
    run = store.get_run("run1")
    assert run["status"] == "in_progress"
    assert run["point_count"] == 3
    assert run["completed_at"] is None

    store.mark_run_complete("run1")
    run = store.get_run("run1")
    assert run["status"] == "completed"
    assert run["completed_at"] is not None


def test_failed_status(store):
    store.create_run("run1", "grid.json", "abc", 1)
    store.mark_run_complete("run1", "failed")
    assert store.get_run("run1")["status"] == "failed"


def test_unknown_status_rejected(store):
    import sqlite3

    store.create_run("run1", "grid.json", "abc", 1)
    with pytest.raises(sqlite3.IntegrityError):
        store.mark_run_complete("run1", "paused")


def test_points_are_found_across_runs(store):
    store.create_run("run1", "grid.json", "abc", 1)
    store.record_point("fp1", "run1", point_columns())
    store.create_run("run2", "grid.json", "abc", 1)

    row = store.find_point("fp1")
    assert row["run_id"] == "run1"
    assert row["E"] == "200/101"
    assert row["residual"] == "1.5e-40"
    assert store.find_point("missing") is None
    assert store.count_points_for_run("run1") == 1
    assert store.count_points_for_run("run2") == 0


def test_record_replaces_same_fingerprint(store):
    store.create_run("run1", "grid.json", "abc", 1)
    store.create_run("run2", "grid.json", "abc", 1)
    store.record_point("fp1", "run1", point_columns())
    store.record_point("fp1", "run2", point_columns(E="199/101"))
    row = store.find_point("fp1")
    assert row["run_id"] == "run2"
    assert row["E"] == "199/101"


def test_list_runs_newest_first(store):
    store.create_run("run1", "a.json", "abc", 1)
    store.create_run("run2", "b.json", "def", 2)
    runs = store.list_all_runs()
    assert {r["run_id"] for r in runs} == {"run1", "run2"}
    assert runs[0]["started_at"] >= runs[1]["started_at"]


def test_get_missing_run(store):
    assert store.get_run("nope") is None


def test_close_is_idempotent(tmp_path):
    store = SweepStore(tmp_path / "sweeps.db")
    store.close()
    store.close()
    assert store.conn is None
