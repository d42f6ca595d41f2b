import json
import pathlib
from fractions import Fraction

import pytest

from hblcert.formats import (
    ParseError,
    parse_candidates,
    parse_datum,
    parse_presentation,
    parse_rational,
    serialize_datum,
    serialize_presentation,
)
from hblcert.fixtures import ALL_FIXTURES
from hblcert.linalg import span
from hblcert.presentation import verify_presentation

FIXTURE_DIR = pathlib.Path(__file__).resolve().parents[1] / "fixtures"


def test_rational_reduction_and_grammar():
    assert str(parse_rational("2/4")) == "1/2"
    assert str(parse_rational("-3")) == "-3"
    assert str(parse_rational("0")) == "0"
    for bad in ("1.5", "1/0", "1/-2", "a", "", "1//2", "1e3"):
        with pytest.raises(ParseError, match="malformed rational"):
            parse_rational(bad)


def test_fixture_files_round_trip_byte_identically():
    for name, (make_datum, make_pres) in ALL_FIXTURES.items():
        datum_text = (FIXTURE_DIR / f"{name}.datum.json").read_text()
        assert serialize_datum(parse_datum(datum_text)) == datum_text
        assert parse_datum(datum_text) == make_datum()

        pres_text = (FIXTURE_DIR / f"{name}.presentation.json").read_text()
        parsed = parse_presentation(pres_text)
        assert serialize_presentation(parsed) == pres_text
        assert parsed == make_pres()


def test_parse_presentation_accepts_scrambled_ids_and_unreduced_entries():
    text = json.dumps({
        "vertices": [
            {"id": "top", "basis": [["2", "0"], ["0", "2"]]},
            {"id": "origin", "basis": []},
            {"id": "mid", "basis": [["4/4", "0"]]},
        ],
        "edges": [
            {"from": "mid", "to": "top", "theta": ["2/4"]},
            {"from": "origin", "to": "mid", "theta": ["1/2"]},
        ],
    })
    pres = parse_presentation(text)
    assert pres.graph.vertices[1] == span([[1, 0]], 2)
    assert pres.theta.values == ((Fraction(1, 2),), (Fraction(1, 2),))


def test_parse_errors_name_the_problem():
    with pytest.raises(ParseError, match="unknown vertex id 'ghost'"):
        parse_presentation(json.dumps({
            "vertices": [{"id": "a", "basis": [["1"]]}],
            "edges": [{"from": "a", "to": "ghost", "theta": ["1"]}],
        }))
    with pytest.raises(ParseError, match="ragged"):
        parse_datum(json.dumps({
            "dim": 2,
            "maps": [{"name": "p", "rows": [["1", "0"], ["1"]]}],
            "exponents": ["1"],
        }))
    with pytest.raises(ParseError, match="line 1"):
        parse_datum("{not json")
    with pytest.raises(ParseError, match="exponent"):
        parse_datum(json.dumps({
            "dim": 1, "maps": [{"rows": [["1"]]}], "exponents": ["3/2"],
        }))


def test_parse_candidates():
    text = "# comment line\n1 0 0; 0 1 0\n\n0 0 2\n"
    subs = parse_candidates(text, 3)
    assert subs == [span([[1, 0, 0], [0, 1, 0]], 3), span([[0, 0, 1]], 3)]
    with pytest.raises(ParseError, match="line 1"):
        parse_candidates("1 0\n", 3)


def test_datum_serialization_preserves_map_order():
    datum = ALL_FIXTURES["r6"][0]()
    obj = json.loads(serialize_datum(datum))
    assert [m["name"] for m in obj["maps"]] == ["pi1", "pi2", "pi3", "pi4"]


def test_parsed_fixture_presentations_verify():
    for name, (make_datum, _) in ALL_FIXTURES.items():
        datum = parse_datum((FIXTURE_DIR / f"{name}.datum.json").read_text())
        pres = parse_presentation((FIXTURE_DIR / f"{name}.presentation.json").read_text())
        assert verify_presentation(datum, pres).valid
