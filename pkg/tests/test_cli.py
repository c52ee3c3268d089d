import csv
import json
from fractions import Fraction

import pytest

from padic_schrodinger import __version__
from padic_schrodinger.cli import main
from padic_schrodinger.sweep import CSV_HEADER
from padic_schrodinger.utils import parse_rational, render_decimal, render_rational

from .test_sweep import GRID, fake_solve


@pytest.fixture
def invoke(runner, config_file):
    def _invoke(*args):
        return runner.invoke(main, ["-c", str(config_file), *args])

    return _invoke


def output_json(result):
    assert result.exit_code == 0, result.output
    return json.loads(result.output)


def test_version(runner):
    result = runner.invoke(main, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.output


class TestExpand:
    def test_digits(self, invoke):
        assert output_json(invoke("expand", "4/3", "--p", "5", "--digits", "3")) == {
            "valuation": 0,
            "digits": [3, 3, 1],
        }

    def test_zero(self, invoke):
        assert output_json(invoke("expand", "0", "--p", "5")) == {"zero": True}

    def test_composite_modulus(self, invoke):
        assert invoke("expand", "1", "--p", "4").exit_code == 1

    def test_unparseable_rational(self, invoke):
        assert invoke("expand", "x/y", "--p", "5").exit_code == 1


def test_norm(invoke):
    assert output_json(invoke("norm", "1919/810", "--p", "5")) == {
        "valuation": -1,
        "norm": "5",
        "integral": False,
    }


def test_norm_of_zero(invoke):
    payload = output_json(invoke("norm", "0", "--p", "3"))
    assert payload["valuation"] is None
    assert payload["norm"] == "0"


class TestIntegrate:
    def test_moment(self, invoke):
        payload = output_json(invoke("integrate", "--p", "5", "--moment-zp", "2"))
        assert payload == {"value_rational": "25/31", "value_decimal": "0.806451612903226"}

    def test_measures(self, invoke):
        shell = output_json(invoke("integrate", "--p", "2", "--shell=-1"))
        ball = output_json(invoke("integrate", "--p", "5", "--ball", "2"))
        assert shell["value_rational"] == "1/4"
        assert ball["value_rational"] == "1/25"

    @pytest.mark.parametrize("exponent", ["2", "5"])
    def test_emitted_values_reparse_to_the_same_text(self, invoke, exponent):
        payload = output_json(invoke("integrate", "--p", "7", "--moment-zp", exponent))
        exact = parse_rational(payload["value_rational"])
        assert render_rational(exact) == payload["value_rational"]
        assert render_decimal(exact) == payload["value_decimal"]
        assert render_decimal(parse_rational(payload["value_decimal"])) == payload["value_decimal"]

    def test_oracle(self, invoke):
        payload = output_json(invoke("integrate", "--p", "5", "--oracle-power", "2"))
        value = Fraction(payload["value_rational"])
        assert abs(value - Fraction(25, 31)) <= Fraction(1, 10**29)
        assert payload["terms"] > 1

    def test_divergent_moment_is_a_domain_error(self, invoke):
        assert invoke("integrate", "--p", "5", "--moment-zp=-1").exit_code == 2

    def test_divergent_oracle(self, invoke):
        assert invoke("integrate", "--p", "5", "--oracle-power=-1").exit_code == 3

    @pytest.mark.parametrize(
        "args", [[], ["--ball", "0", "--shell", "0"]], ids=["none", "two"]
    )
    def test_needs_exactly_one_mode(self, invoke, args):
        assert invoke("integrate", "--p", "5", *args).exit_code == 1


class TestDalpha:
    def test_f0_verified(self, invoke):
        payload = output_json(
            invoke("dalpha", "--p", "5", "--alpha", "2", "--f", "0", "--at-shell", "0", "--verify")
        )
        assert payload["value_rational"] == "25/31"
        assert payload["match"] is True
        assert payload["analytically_continued"] is False

    def test_monomial(self, invoke):
        payload = output_json(invoke("dalpha", "--p", "5", "--alpha", "2", "--monomial", "4"))
        assert payload["exponent"] == 2
        assert Fraction(payload["coefficient"]) == Fraction(-487500, 781) / Fraction(-750, 31)

    def test_resonance(self, invoke):
        assert invoke("dalpha", "--p", "5", "--monomial", "2").exit_code == 2

    def test_verify_needs_shell(self, invoke):
        assert invoke("dalpha", "--p", "5", "--f", "0", "--verify").exit_code == 1

    def test_g_minus_one_outside_is_null(self, invoke):
        payload = output_json(invoke("dalpha", "--p", "5", "--g=-1"))
        assert payload["outside"] is None


class TestSemigroup:
    def test_holds(self, invoke):
        assert output_json(
            invoke("semigroup", "--p", "5", "--alpha", "1", "--beta", "1", "--n", "4")
        ) == {"holds": True}

    def test_inconclusive(self, invoke):
        result = invoke("semigroup", "--p", "5", "--alpha", "1", "--beta", "1", "--n", "2")
        assert result.exit_code == 2


class TestSolve:
    def test_attractive_coupling(self, invoke):
        payload = output_json(
            invoke("solve", "--p", "101", "--B=-1", "--N", "40", "--tol", "1e-40")
        )
        assert payload["truncation"] == 40
        assert "N" not in payload and "cached" not in payload
        assert payload["B"] == "-1"
        lo, hi = (Fraction(end) for end in payload["bracket"])
        assert hi - lo < Fraction(1, 10**40)
        assert abs(Fraction(payload["E_rational"])) < Fraction(1, 10**30)

    def test_no_sign_change(self, invoke):
        result = invoke(
            "solve", "--p", "101", "--B", "1", "--N", "20", "--lo", "3/2", "--hi", "19/10"
        )
        assert result.exit_code == 4

    def test_zero_coupling(self, invoke):
        assert invoke("solve", "--p", "101", "--B", "0").exit_code == 2

    def test_half_bracket(self, invoke):
        assert invoke("solve", "--p", "101", "--B", "1", "--lo", "1").exit_code == 1

    def test_unsupported_coupling_needs_bracket(self, invoke):
        assert invoke("solve", "--p", "101", "--B", "2", "--N", "5").exit_code == 2


class TestNaive:
    def test_coefficients(self, invoke):
        payload = output_json(invoke("naive", "--p", "5", "--B", "1", "--terms", "3"))
        assert payload["coefficients"][0] == "1"
        assert payload["coefficients"][1] == "-781/20150"
        assert payload["region_bound"] == "25"
        assert payload["convergent_everywhere"] is False

    def test_partial_sums_outside_region(self, invoke):
        payload = output_json(
            invoke("naive", "--p", "5", "--B", "1", "--terms", "10", "--at-shell", "1")
        )
        assert payload["converges"] is False
        assert len(payload["partial_sums_decimal"]) == 11


class TestSweep:
    def test_csv_file(self, invoke, write_grid, tmp_path, mocker):
        mocker.patch("padic_schrodinger.sweep.solve_point", side_effect=fake_solve)
        out = tmp_path / "out" / "results.csv"
        result = invoke("sweep", "--grid", str(write_grid(GRID)), "-o", str(out))
        assert result.exit_code == 0, result.output
        with open(out, newline="") as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == CSV_HEADER
        assert [row[:3] for row in rows[1:]] == [
            ["53", "-1", "20"],
            ["101", "-1", "20"],
            ["53", "1", "20"],
            ["101", "1", "20"],
        ]

    def test_json_file_and_cache(self, invoke, write_grid, tmp_path, mocker):
        solver = mocker.patch("padic_schrodinger.sweep.solve_point", side_effect=fake_solve)
        grid = str(write_grid(GRID))
        out = tmp_path / "results.json"
        assert invoke("sweep", "-g", grid, "--format", "json", "-o", str(out)).exit_code == 0
        assert invoke("sweep", "-g", grid, "--format", "json", "-o", str(out)).exit_code == 0
        records = json.loads(out.read_text())
        assert solver.call_count == 4
        assert all(record["cached"] for record in records)

    def test_invalid_grid(self, invoke, write_grid):
        grid = write_grid({"primes": [6], "couplings": ["1"]})
        assert invoke("sweep", "--grid", str(grid)).exit_code == 1

    def test_bracket_failure(self, invoke, write_grid, tmp_path, mocker):
        from padic_schrodinger.schrodinger_solver import BracketError

        mocker.patch(
            "padic_schrodinger.sweep.solve_point",
            side_effect=BracketError("no sign change", Fraction(1), Fraction(2)),
        )
        result = invoke("sweep", "--grid", str(write_grid(GRID)), "-o", str(tmp_path / "x.csv"))
        assert result.exit_code == 4

    def test_missing_grid_file(self, invoke, tmp_path):
        assert invoke("sweep", "--grid", str(tmp_path / "absent.json")).exit_code == 1


class TestListRuns:
    def test_without_database(self, invoke, tmp_path):
        result = invoke("list-runs", "--state-db", str(tmp_path / "none.db"))
        assert result.exit_code == 0
        assert "No runs found" in result.output

    def test_after_sweep(self, invoke, write_grid, tmp_path, mocker):
        mocker.patch("padic_schrodinger.sweep.solve_point", side_effect=fake_solve)
        invoke("sweep", "--grid", str(write_grid(GRID)), "-o", str(tmp_path / "r.csv"))
        result = invoke("list-runs")
        assert result.exit_code == 0
        assert "Sweep Runs" in result.output
