"""Small hand-written germ-pair documents shared by the tests."""
import copy


def standard_r4(kind="parametric"):
    """Constant standard form on R^4 (x1, x2, y1, y2); S1 = {y = 0}, S2 = {x = 0}."""
    doc = {
        "n": 2,
        "k": 2,
        "coords": ["x1", "x2", "y1", "y2"],
        "base_point": [0, 0, 0, 0],
        "omega": [["0", "0", "1", "0"], ["0", "0", "0", "1"], ["-1", "0", "0", "0"], ["0", "-1", "0", "0"]],
    }
    if kind == "parametric":
        doc["strata"] = [{"kind": "parametric", "exprs": ["a1", "a2", "0", "0"], "vars": ["a1", "a2"]},
                         {"kind": "parametric", "exprs": ["0", "0", "b1", "b2"], "vars": ["b1", "b2"]}]
    else:
        doc["strata"] = [{"kind": "implicit", "exprs": ["y1", "y2"]},
                         {"kind": "implicit", "exprs": ["x1", "x2"]}]
    return doc


def lambda_r4(lam, kind="parametric"):
    """Normal form dx1^dy1 + dx2^dy2 + dx1^dx2 + dy1^dy2/lam, written by hand."""
    doc = standard_r4(kind)
    doc["omega"] = [["0", "1", "1", "0"], ["-1", "0", "0", "1"],
                    ["-1", "0", "0", f"1/{lam}"], ["0", "-1", f"-1/{lam}", "0"]]
    return doc


def with_changes(doc, **changes):
    out = copy.deepcopy(doc)
    out.update(changes)
    return out
