import json
import pathlib
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import LATTICES, char_vectors, plane, rationals
from stabwalls.charge import StabilityPoint
from stabwalls.lattice import CharVector, InputError
from stabwalls.serialize import (
    ChartSpec,
    Problem,
    WallReport,
    caps_from,
    char_from,
    char_to,
    content_hash,
    dumps,
    parse_rat,
    point_from,
    point_to,
    problem_from,
    problem_to,
    report_from,
    report_to,
    surface_from,
    surface_to,
)
from stabwalls.walls import Caps, chamber_of, enumerate_wall_classes

DATA = pathlib.Path(__file__).parent / "data"


@given(char_vectors(2))
def test_char_round_trip(v):
    assert char_from(json.loads(json.dumps(char_to(v)))) == v


def test_char_list_form():
    assert char_from([2, 1, 0, "-3"]) == CharVector.of(2, (1, 0), -3)


@pytest.mark.parametrize("name", sorted(LATTICES))
def test_surface_round_trip(name):
    L = LATTICES[name]()
    assert surface_from(json.loads(json.dumps(surface_to(L)))) == L


@given(st.lists(rationals(), min_size=1, max_size=1), rationals(1, 9), rationals(1, 9))
def test_point_round_trip(beta, w, q):
    sp = StabilityPoint(tuple(beta), (w,), q, "tag")
    assert point_from(point_to(sp)) == sp


@pytest.mark.parametrize("fname", ["gieseker.json", "blowup_k0.json"])
def test_problem_round_trip(fname):
    p = problem_from(json.loads((DATA / fname).read_text()))
    again = problem_from(json.loads(dumps(problem_to(p))))
    assert again == p


def test_problem_defaults():
    p = problem_from({"surface": surface_to(plane()), "v": {"r": 1, "c1": [0], "s": 0}})
    assert p.chart == ChartSpec() and p.caps == Caps() and p.point is None


def test_report_round_trip(P2):
    v = CharVector.of(2, (1,), -3)
    walls = enumerate_wall_classes(v, (-1,), (1,), P2).walls
    ch = chamber_of(v, StabilityPoint((-1,), (1,), 9), walls, P2)
    rep = WallReport(list(walls), [ch], {"caps": Caps().as_dict()}, False, None, ["n"])
    d = json.loads(dumps(report_to(rep)))
    back = report_from(d)
    assert [w.v1 for w in back.walls] == [w.v1 for w in walls]
    assert [w.locus for w in back.walls] == [w.locus for w in walls]
    assert back.chambers == [ch]
    assert report_to(back) == d


@pytest.mark.parametrize("bad", [0.5, True, "x/y", "1/0", None, [1]])
def test_parse_rat_refuses(bad):
    with pytest.raises(InputError):
        parse_rat(bad)


def test_parse_rat_accepts():
    assert parse_rat("-3/6") == Fraction(-1, 2)
    assert parse_rat(4) == 4


def test_caps():
    c = caps_from({"r1": 3, "den": 2, "dsq": "10"})
    assert (c.r1, c.den, c.dsq) == (3, 2, 10)
    with pytest.raises(InputError):
        caps_from({"rank": 3})
    with pytest.raises(InputError):
        caps_from([1])


@pytest.mark.parametrize(
    "d",
    [
        [],
        {"v": {"r": 1, "c1": [0], "s": 0}},
        {"schema": 2, "surface": {}, "v": {}},
        {"surface": {"gram": [[1]], "H": [1], "K": [-3]}, "v": {"r": 1, "c1": [0], "s": 0}},
        {"surface": {"gram": [[1]], "H": [1], "K": [-3], "chiO": 1}, "v": {"r": 1, "c1": [0, 0], "s": 0}},
        {"surface": {"gram": [[1]], "H": [1], "K": [-3], "chiO": 1}, "v": {"r": 1, "c1": [0], "s": 0}, "n": "1/2"},
    ],
)
def test_bad_problems(d):
    with pytest.raises(InputError):
        problem_from(d)


def test_report_schema_checked():
    with pytest.raises(InputError):
        report_from({"schema": 7})


def test_dumps_and_hash_are_key_order_free():
    a = {"b": 1, "a": [1, 2]}
    b = {"a": [1, 2], "b": 1}
    assert dumps(a) == dumps(b)
    assert content_hash(a) == content_hash(b) != content_hash({"a": [2, 1], "b": 1})


def test_problem_type():
    p = problem_from(json.loads((DATA / "gieseker.json").read_text()))
    assert isinstance(p, Problem) and p.r0 == 1 and p.mu == 1 and p.n == 2
