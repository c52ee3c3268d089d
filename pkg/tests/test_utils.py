import json
import logging
from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from padic_schrodinger.fingerprint import generate_fingerprint
from padic_schrodinger.utils import (
    compute_file_hash,
    format_duration,
    generate_run_id,
    load_config,
    parse_rational,
    render_decimal,
    render_rational,
    setup_logging,
)


class TestRationals:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("1/2", Fraction(1, 2)),
            ("-3", Fraction(-3)),
            ("0.25", Fraction(1, 4)),
            ("1e-12", Fraction(1, 10**12)),
            (" 7/21 ", Fraction(1, 3)),
            (5, Fraction(5)),
        ],
    )
    def test_parse(self, text, expected):
        assert parse_rational(text) == expected

    @pytest.mark.parametrize("text", ["abc", "1/0", "nan", ""])
    def test_parse_rejects(self, text):
        with pytest.raises(ValueError):
            parse_rational(text)

    def test_render(self):
        assert render_rational(Fraction(6, 4)) == "3/2"
        assert render_rational(Fraction(-4, 2)) == "-2"
        assert render_decimal(Fraction(25, 31)) == "0.806451612903226"
        assert render_decimal(Fraction(0)) == "0"

    def test_render_decimal_of_huge_rational(self):
        tiny = Fraction(1, 3 * 10**5000)
        assert Decimal(render_decimal(tiny)) == Decimal("3.33333333333333e-5001")

    @pytest.mark.parametrize(
        "q,text",
        [
            (Fraction(1999999999999999999, 10**19), "0.2"),
            (Fraction(10**20 - 1, 10), "1e+19"),
            (Fraction(-1, 8), "-0.125"),
            (Fraction(100), "100"),
        ],
    )
    def test_render_decimal_drops_trailing_zeros(self, q, text):
        assert render_decimal(q) == text


def test_format_duration():
    assert format_duration(12.34) == "12.3s"
    assert format_duration(222) == "3m 42s"
    assert format_duration(3 * 3600 + 61) == "3h 1m 1s"


def test_run_ids_are_timestamps():
    run_id = generate_run_id()
    assert len(run_id) == len("20240101_120000_000000")
    assert run_id[8] == "_"


def test_file_hash(tmp_path):
    path = tmp_path / "grid.json"
    path.write_text('{"primes": [5]}')
    first = compute_file_hash(path)
    assert len(first) == 64
    path.write_text('{"primes": [7]}')
    assert compute_file_hash(path) != first


class TestConfig:
    def test_defaults_when_missing(self, tmp_path):
        config = load_config(tmp_path / "absent.json")
        assert config["truncation"] == 60
        assert config["solve_tolerance"] == "1e-12"
        assert config["workers"] == 1

    def test_overrides(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"truncation": 30, "workers": 4}))
        config = load_config(path)
        assert config["truncation"] == 30
        assert config["workers"] == 4
        assert config["tail_tolerance"] == "1e-30"

    def test_unreadable_file_gives_defaults(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("{not json")
        assert load_config(path)["truncation"] == 60


def test_setup_logging_writes_debug_file(tmp_path):
    log_file = tmp_path / "logs" / "run.log"
    setup_logging("ERROR", log_file=log_file, enable_color=False)
    logging.getLogger("padic_schrodinger.test").debug("recorded in file only")
    for handler in logging.getLogger().handlers:
        handler.flush()
    assert "recorded in file only" in log_file.read_text()
    logging.getLogger().handlers.clear()


class TestFingerprint:
    def test_stable_and_normalised(self):
        a = generate_fingerprint(101, Fraction(1), 60, Fraction(1, 10**12))
        b = generate_fingerprint(101, parse_rational("1"), 60, parse_rational("1e-12"))
        assert a == b
        assert len(a) == 64

    def test_every_parameter_matters(self):
        base = generate_fingerprint(101, Fraction(1), 60, Fraction(1, 10**12))
        assert generate_fingerprint(103, Fraction(1), 60, Fraction(1, 10**12)) != base
        assert generate_fingerprint(101, Fraction(-1), 60, Fraction(1, 10**12)) != base
        assert generate_fingerprint(101, Fraction(1), 40, Fraction(1, 10**12)) != base
        assert generate_fingerprint(101, Fraction(1), 60, Fraction(1, 10**9)) != base
        bracketed = generate_fingerprint(
            101, Fraction(1), 60, Fraction(1, 10**12), (Fraction(1), Fraction(3))
        )
        assert bracketed != base
        assert generate_fingerprint(101, Fraction(1), 60, Fraction(1, 10**12), None, 8) != base


RATIONALS = st.fractions(max_denominator=10**30).filter(lambda q: abs(q.numerator) < 10**40)


@given(q=RATIONALS)
def test_rational_text_round_trips(q):
    text = render_rational(q)
    assert parse_rational(text) == q
    assert render_rational(parse_rational(text)) == text


@given(q=RATIONALS)
def test_decimal_text_round_trips(q):
    text = render_decimal(q)
    assert render_decimal(parse_rational(text)) == text
