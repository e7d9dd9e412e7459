import json

import numpy as np
import pytest

from doublepoint.errors import PointNotOnStratum, ValidationError
from doublepoint.ingest import linear_germ_pair, load_document, load_germ_pair
from doublepoint.linalg import Subspace

from germs import lambda_r4, standard_r4, with_changes


def test_valid_parametric_pair():
    gp = load_germ_pair(standard_r4())
    assert (gp.n, gp.k1, gp.k2) == (2, 2, 2)
    assert gp.warnings == []
    assert gp.strata[0].tangent(gp.base_point).equals(Subspace(np.eye(4)[:, :2]))


def test_valid_implicit_pair():
    gp = load_germ_pair(standard_r4("implicit"))
    assert gp.strata[1].tangent(gp.base_point).equals(Subspace(np.eye(4)[:, 2:]))


@pytest.mark.parametrize("change, message", [
    ({"omega": [["0", "1", "1", "0"], ["1", "0", "0", "1"], ["-1", "0", "0", "0"], ["0", "-1", "0", "0"]]},
     "skew"),
    ({"omega": [["0"] * 4] * 4}, "singular"),
    ({"n": 0}, "positive integer"),
    ({"base_point": [0, 0, 0]}, "base_point"),
    ({"coords": ["x", "x", "y", "z"]}, "distinct"),
    ({"omega": [["0", "0", "1", "0"], ["0", "0", "0", "q"], ["-1", "0", "0", "0"], ["0", "-1", "0", "0"]]},
     "undeclared"),
])
def test_validation_errors(change, message):
    with pytest.raises(ValidationError, match=message):
        load_germ_pair(with_changes(standard_r4(), **change))


def test_parametrization_must_hit_base_point():
    doc = standard_r4()
    doc["strata"][0]["exprs"] = ["a1 + 1", "a2", "0", "0"]
    with pytest.raises(ValidationError, match="does not map 0 to base_point"):
        load_germ_pair(doc)


def test_implicit_must_vanish_and_be_regular():
    doc = standard_r4("implicit")
    doc["strata"][0]["exprs"] = ["y1 - 1", "y2"]
    with pytest.raises(ValidationError, match="do not vanish"):
        load_germ_pair(doc)
    doc["strata"][0]["exprs"] = ["y1^2", "y2"]
    with pytest.raises(ValidationError, match="full-rank"):
        load_germ_pair(doc)


def test_parse_error_reported_as_validation():
    doc = standard_r4()
    doc["omega"][0][2] = "1 +"
    with pytest.raises(ValidationError, match=r"omega\[0\]\[2\].*offset 3"):
        load_germ_pair(doc)


def test_unequal_dims_need_even_sum():
    doc = with_changes(standard_r4(), k1=1, k2=2)
    del doc["k"]
    with pytest.raises(ValidationError, match="even"):
        load_germ_pair(doc)


def test_closedness_warning():
    doc = lambda_r4("(2 + x1)")
    gp = load_germ_pair(doc)
    assert len(gp.warnings) == 1 and "not closed" in gp.warnings[0]
    # (1 + x2) dx2^dy2 is closed, so a non-constant coefficient alone draws no warning
    closed = standard_r4()
    closed["omega"][1][3], closed["omega"][3][1] = "1 + x2", "-(1 + x2)"
    assert load_germ_pair(closed).warnings == []


def test_curve_tangent():
    # stratum y = x^2 in R^2 has tangent d/dx at 0
    doc = {"n": 1, "k": 1, "coords": ["x", "y"], "base_point": [0, 0],
           "omega": [["0", "1"], ["-1", "0"]],
           "strata": [{"kind": "implicit", "exprs": ["y - x^2"]},
                      {"kind": "parametric", "exprs": ["0", "t"], "vars": ["t"]}]}
    gp = load_germ_pair(doc)
    assert gp.strata[0].tangent(gp.base_point).equals(Subspace(np.array([[1.0], [0.0]])))


def test_locate_and_off_stratum():
    gp = load_germ_pair(standard_r4())
    s1 = gp.strata[0]
    assert np.allclose(s1.locate([0.3, -0.2, 0, 0]), [0.3, -0.2])
    with pytest.raises(PointNotOnStratum):
        s1.locate([0, 0, 1, 0])


def test_document_roundtrip():
    gp = load_document(json.dumps(standard_r4()))
    doc = gp.to_doc()
    again = load_germ_pair(doc)
    assert np.array_equal(again.omega.at(again.base_point), gp.omega.at(gp.base_point))


def test_linear_germ_pair():
    rng = np.random.default_rng(1)
    mu = np.array([[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]], dtype=float)
    u1 = Subspace.span(rng.standard_normal((4, 1)))
    u2 = Subspace.span(rng.standard_normal((4, 1)))
    gp = linear_germ_pair(mu, u1, u2)
    assert gp.strata[0].tangent(gp.base_point).equals(u1)
    assert gp.strata[1].tangent(gp.base_point).equals(u2)
