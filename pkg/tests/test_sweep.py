import io
import json
from fractions import Fraction

import pytest
from rich.console import Console

from padic_schrodinger.schrodinger_solver import (
    BracketError,
    EigenResult,
    asymptotic_E,
    default_bracket,
)
from padic_schrodinger.state_manager import SweepStore
from padic_schrodinger.sweep import (
    CSV_HEADER,
    GridPoint,
    SweepRunner,
    SweepSettings,
    build_grid,
    build_settings,
    result_from_row,
    result_record,
    stored_columns,
    write_csv,
    write_json,
)
from padic_schrodinger.utils import load_config
from padic_schrodinger.validator import ValidationError


def fake_solve(point, settings):
    center = asymptotic_E(point.p, point.B)
    E = center + Fraction(1, point.p**3)
    return EigenResult(
        p=point.p,
        B=point.B,
        E=E,
        bracket=(E - settings.tol / 2, E + settings.tol / 2),
        initial_bracket=default_bracket(point.p, point.B),
        determinant_residual=Fraction(-3, 10**40),
        truncation=point.N,
        asymptotic=center,
        iterations=12,
    )


@pytest.fixture
def config(tmp_path):
    return load_config(tmp_path / "absent.json")


@pytest.fixture
def db_path(tmp_path):
    return tmp_path / "state" / "sweeps.db"


@pytest.fixture
def fake_solver(mocker):
    return mocker.patch("padic_schrodinger.sweep.solve_point", side_effect=fake_solve)


def make_runner(grid, db_path, config, **kwargs):
    return SweepRunner(grid, db_path, config, console=Console(file=io.StringIO()), **kwargs)


GRID = {"primes": [101, 53], "couplings": ["1", "-1"], "truncations": [20]}


class TestGrid:
    def test_sorted_by_coupling_prime_truncation(self):
        data = {"primes": [101, 53], "couplings": ["1", "-1"], "truncations": [60, 20]}
        points = build_grid(data, 60)
        assert len(points) == 8
        assert points[0] == GridPoint(Fraction(-1), 53, 20)
        assert points[1] == GridPoint(Fraction(-1), 53, 60)
        assert points[-1] == GridPoint(Fraction(1), 101, 60)

    def test_default_truncation(self):
        points = build_grid({"primes": [5], "couplings": ["1/2"]}, 45)
        assert points == [GridPoint(Fraction(1, 2), 5, 45)]

    def test_settings_fall_back_to_config(self, config):
        settings = build_settings({"primes": [5], "couplings": ["1"]}, config)
        assert settings == SweepSettings(tol=Fraction(1, 10**12), bracket=None, scan_points=0)

    def test_settings_from_grid(self, config):
        data = {
            "primes": [5],
            "couplings": ["2"],
            "tolerance": "1/1000",
            "bracket": {"lo": "1/2", "hi": 3},
            "scan_points": 8,
        }
        settings = build_settings(data, config)
        assert settings.tol == Fraction(1, 1000)
        assert settings.bracket == (Fraction(1, 2), Fraction(3))
        assert settings.scan_points == 8


class TestRunner:
    def test_records_in_grid_order(self, write_grid, db_path, config, fake_solver):
        records = make_runner(write_grid(GRID), db_path, config).run()
        order = [(r["B"], r["p"]) for r in records]
        assert order == [("-1", 53), ("-1", 101), ("1", 53), ("1", 101)]
        assert fake_solver.call_count == 4
        assert not any(r["cached"] for r in records)
        assert records[2]["asymptotic"] == "104/53"
        assert records[2]["residual"] == "-3e-40"

    def test_rerun_reuses_cache(self, write_grid, db_path, config, fake_solver):
        grid = write_grid(GRID)
        first = make_runner(grid, db_path, config).run()
        runner = make_runner(grid, db_path, config)
        second = runner.run()

        assert fake_solver.call_count == 4
        assert runner.stats["reused"] == 4
        assert runner.stats["solved"] == 0
        assert all(r["cached"] for r in second)
        strip = lambda rs: [{k: v for k, v in r.items() if k != "cached"} for r in rs]
        assert strip(first) == strip(second)

    def test_force_resolves(self, write_grid, db_path, config, fake_solver):
        grid = write_grid(GRID)
        make_runner(grid, db_path, config).run()
        records = make_runner(grid, db_path, config, force=True).run()
        assert fake_solver.call_count == 8
        assert not any(r["cached"] for r in records)

    def test_new_tolerance_is_a_new_point(self, write_grid, db_path, config, fake_solver):
        make_runner(write_grid(GRID), db_path, config).run()
        changed = dict(GRID, tolerance="1/1000")
        make_runner(write_grid(changed, "grid2.json"), db_path, config).run()
        assert fake_solver.call_count == 8

    def test_partial_overlap(self, write_grid, db_path, config, fake_solver):
        make_runner(write_grid(GRID), db_path, config).run()
        wider = dict(GRID, primes=[53, 101, 211])
        runner = make_runner(write_grid(wider, "grid2.json"), db_path, config)
        runner.run()
        assert runner.stats == {"solved": 2, "reused": 4, "duration": runner.stats["duration"]}

    def test_failure_marks_run_failed(self, write_grid, db_path, config, mocker):
        mocker.patch(
            "padic_schrodinger.sweep.solve_point",
            side_effect=BracketError("no sign change", Fraction(1), Fraction(2)),
        )
        with pytest.raises(BracketError):
            make_runner(write_grid(GRID), db_path, config).run()
        with SweepStore(db_path) as store:
            runs = store.list_all_runs()
        assert [r["status"] for r in runs] == ["failed"]

    def test_invalid_grid_raises_before_solving(self, write_grid, db_path, config, fake_solver):
        with pytest.raises(ValidationError):
            make_runner(write_grid({"primes": [9], "couplings": ["1"]}), db_path, config).run()
        fake_solver.assert_not_called()
        assert not db_path.exists()

    def test_run_recorded_as_completed(self, write_grid, db_path, config, fake_solver):
        runner = make_runner(write_grid(GRID), db_path, config)
        runner.run()
        with SweepStore(db_path) as store:
            run = store.get_run(runner.run_id)
            assert run["status"] == "completed"
            assert run["point_count"] == 4
            assert store.count_points_for_run(runner.run_id) == 4


def test_stored_point_rebuilds_result():
    point = GridPoint(Fraction(1), 101, 20)
    settings = SweepSettings(tol=Fraction(1, 10**6))
    result = fake_solve(point, settings)
    row = stored_columns(result, settings)
    rebuilt = result_from_row(row)
    assert rebuilt.E == result.E
    assert rebuilt.bracket == result.bracket
    assert rebuilt.initial_bracket == result.initial_bracket
    assert rebuilt.asymptotic == result.asymptotic
    assert result_record(rebuilt, True)["scaled_error"] == result_record(result)["scaled_error"]


def test_csv_output():
    settings = SweepSettings(Fraction(1, 10**6))
    record = result_record(fake_solve(GridPoint(Fraction(1), 53, 20), settings))
    unsupported = dict(record, B="2", asymptotic=None, scaled_error=None)
    handle = io.StringIO()
    write_csv([record, unsupported], handle)
    lines = handle.getvalue().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert lines[1].startswith("53,1,20,")
    assert lines[2].endswith(",,")


def test_json_output_is_compact():
    settings = SweepSettings(Fraction(1, 10**6))
    record = result_record(fake_solve(GridPoint(Fraction(-1), 53, 20), settings))
    handle = io.StringIO()
    write_json([record], handle)
    text = handle.getvalue()
    assert ": " not in text
    assert json.loads(text) == [record]


@pytest.mark.slow
def test_parallel_matches_serial(write_grid, tmp_path, config):
    grid = write_grid(
        {"primes": [53, 101], "couplings": ["1"], "truncations": [20], "tolerance": "1e-6"}
    )
    serial = make_runner(grid, tmp_path / "a.db", config, workers=1).run()
    parallel = make_runner(grid, tmp_path / "b.db", config, workers=2).run()
    assert serial == parallel
