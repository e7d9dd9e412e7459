"""Synthesis of the normal-form tuples and their round-trip verification.

Coordinates are ordered ``x1..xm, y1..ym, u1..up, v1..vp``. The strata are
the coordinate subspaces ``{y = u = v = 0}`` / ``{x = u = v = 0}`` when
``k <= n`` and ``{y = 0}`` / ``{x = 0}`` when ``k > n``; the form is

    sum dx_i ^ dy_i + sum du_i ^ dv_i
      + sum dx_{2i-1} ^ dx_{2i} + sum dy_{2i-1} ^ dy_{2i} / lambda_i

with a conjugate pair ``a +- bi`` realified into one 4x4 block whose
``y``-Gram is ``Lambda^-1 J`` for the rotation-scaling matrix ``Lambda``.
"""
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import (EvaluationError, InvalidSpec, ParseError, RoundtripFailure,
                     ValidationError)
from .expr import compile_exprs, free_vars, parse_expression, to_text
from .ingest import load_germ_pair
from .invariants import _K4, analyze, s_value
from .linalg import DEFAULT_TOL

CASES = ("k1", "k-le-n-s1", "k-le-n", "functional", "single-lambda-high", "k-2n-1")

# conditions from the first column of the normal-form table, per case
REQUIRED = {
    "k1": ("G2", "G3"),
    "k-le-n-s1": ("G1", "G2", "G3", "G4", "G5"),
    "k-le-n": ("G1", "G2", "G3", "G4", "G5", "G6"),
    "functional": ("G1", "G2", "G3", "G4", "G5", "G6"),
    "single-lambda-high": ("G1", "G2", "G3", "G4", "G5", "G7"),
    "k-2n-1": ("G1", "G3"),
}


def case_for(k, n):
    """Default table row for stratum dimension ``k`` in ``R^2n``."""
    if not 1 <= k <= 2 * n - 1:
        raise InvalidSpec(f"k must lie in [1, {2 * n - 1}]")
    if k == 1:
        return "k1"
    if k == 2 * n - 1:
        return "k-2n-1"
    if k <= n:
        return "k-le-n-s1" if k in (2, 3) else "k-le-n"
    return "single-lambda-high" if k >= 2 * n - 3 else "functional"


def _allowed(case, k, n):
    if case == "k-le-n":
        return 2 <= k <= n
    return case == case_for(k, n)


@dataclass(frozen=True)
class NormalFormSpec:
    n: int
    k: int
    case: str = None
    lambdas: tuple = ()
    hamiltonians: tuple = ()

    @classmethod
    def from_doc(cls, doc):
        if not isinstance(doc, dict):
            raise InvalidSpec("spec must be a JSON object")
        lambdas = []
        for v in doc.get("lambdas", []):
            if isinstance(v, (list, tuple)) and len(v) == 2:
                lambdas.append(complex(float(v[0]), float(v[1])))
            elif isinstance(v, dict):
                lambdas.append(complex(float(v.get("re", 0.0)), float(v.get("im", 0.0))))
            elif isinstance(v, (int, float)) and not isinstance(v, bool):
                lambdas.append(complex(float(v), 0.0))
            else:
                raise InvalidSpec(f"cannot read characteristic number {v!r}")
        try:
            n, k = int(doc["n"]), int(doc["k"])
        except (KeyError, TypeError, ValueError):
            raise InvalidSpec("spec needs integer 'n' and 'k'") from None
        return cls(n, k, doc.get("case"), tuple(lambdas), tuple(doc.get("hamiltonians", ())))

    def to_doc(self):
        doc = {"n": self.n, "k": self.k, "case": self.resolved_case}
        if self.lambdas:
            doc["lambdas"] = [[z.real, z.imag] for z in map(complex, self.lambdas)]
        if self.hamiltonians:
            doc["hamiltonians"] = list(self.hamiltonians)
        return doc

    @property
    def resolved_case(self):
        return self.case if self.case is not None else case_for(self.k, self.n)

    @property
    def s(self):
        return s_value(self.n, self.k)

    @property
    def block_size(self):
        """Size m of the x and y blocks."""
        if self.resolved_case in ("k1", "k-2n-1"):
            return 1
        return self.k if self.k <= self.n else 2 * self.n - self.k

    def coords(self):
        m = self.block_size
        p = self.n - m
        return ([f"x{i + 1}" for i in range(m)] + [f"y{i + 1}" for i in range(m)]
                + [f"u{i + 1}" for i in range(p)] + [f"v{i + 1}" for i in range(p)])

    def q_names(self):
        """Names of the coordinates on Q (``u`` and ``v``), empty when ``k <= n``."""
        if self.k <= self.n:
            return []
        p = self.n - self.block_size
        return [f"u{i + 1}" for i in range(p)] + [f"v{i + 1}" for i in range(p)]


def _blocks(spec):
    """Validate the payload; returns a list of ('real', lam) / ('pair', lam) / ('field', expr)."""
    n, k = spec.n, spec.k
    if n < 1:
        raise InvalidSpec("n must be positive")
    case = spec.resolved_case
    if case not in CASES:
        raise InvalidSpec(f"unknown case tag {case!r}")
    if not _allowed(case, k, n):
        raise InvalidSpec(f"case {case!r} does not match k={k}, n={n}")
    s = spec.s
    if s == 0:
        if spec.lambdas or spec.hamiltonians:
            raise InvalidSpec(f"case {case!r} carries no invariants")
        return []
    if spec.lambdas and spec.hamiltonians:
        raise InvalidSpec("give either lambdas or hamiltonians, not both")
    if spec.hamiltonians:
        if k <= n:
            raise InvalidSpec("characteristic Hamiltonians exist only for k > n")
        if len(spec.hamiltonians) != s:
            raise InvalidSpec(f"expected {s} Hamiltonians, got {len(spec.hamiltonians)}")
        allowed = set(spec.q_names())
        out = []
        for text in spec.hamiltonians:
            try:
                e = parse_expression(text)
            except ParseError as exc:
                raise InvalidSpec(f"Hamiltonian {text!r}: {exc}") from exc
            extra = free_vars(e) - allowed
            if extra:
                raise InvalidSpec(f"Hamiltonian {text!r} uses {sorted(extra)}; allowed: {sorted(allowed)}")
            try:
                h0 = compile_exprs([e], sorted(allowed))(np.zeros(len(allowed)))[0]
            except EvaluationError as exc:
                raise InvalidSpec(f"Hamiltonian {text!r}: {exc}") from exc
            if h0 == 0.0:
                raise InvalidSpec(f"Hamiltonian {text!r} vanishes at the base point")
            if h0 == 1.0:
                raise InvalidSpec(f"Hamiltonian {text!r} equals 1 at the base point, where the form degenerates")
            out.append(("field", e))
        return out
    lams = [complex(z) for z in spec.lambdas]
    if len(lams) != s:
        raise InvalidSpec(f"expected {s} characteristic numbers, got {len(lams)}")
    if any(z == 0 for z in lams):
        raise InvalidSpec("characteristic numbers must be nonzero")
    if any(z == 1 for z in lams):
        # the x/y block has Pfaffian 1/lambda - 1
        raise InvalidSpec("a characteristic number equal to 1 makes the form degenerate")
    out = []
    rest = list(lams)
    while rest:
        z = rest.pop(0)
        if z.imag == 0.0:
            out.append(("real", z.real))
            continue
        if case in ("single-lambda-high",):
            raise InvalidSpec("a single characteristic number must be real")
        j = next((i for i, w in enumerate(rest) if abs(w - z.conjugate()) <= 1e-12 * (1 + abs(z))), None)
        if j is None:
            raise InvalidSpec(f"conjugate of {z} is missing")
        rest.pop(j)
        out.append(("pair", complex(z.real, abs(z.imag))))
    return out


def _num(x):
    return repr(float(x))


def synthesize_doc(spec):
    """Germ-pair document of the normal form described by ``spec``."""
    blocks = _blocks(spec)
    n, k = spec.n, spec.k
    m = spec.block_size
    p = n - m
    coords = spec.coords()
    dim = 2 * n
    idx = {c: i for i, c in enumerate(coords)}
    omega = [["0"] * dim for _ in range(dim)]

    def put(a, b, text):
        i, j = idx[a], idx[b]
        omega[i][j] = text
        omega[j][i] = f"-({text})" if not text.replace(".", "", 1).isdigit() else f"-{text}"

    for i in range(1, m + 1):
        put(f"x{i}", f"y{i}", "1")
    for i in range(1, p + 1):
        put(f"u{i}", f"v{i}", "1")
    pos = 1
    for kind, value in blocks:
        if kind == "real":
            put(f"x{pos}", f"x{pos + 1}", "1")
            put(f"y{pos}", f"y{pos + 1}", f"1/{_num(value)}")
            pos += 2
        elif kind == "field":
            put(f"x{pos}", f"x{pos + 1}", "1")
            put(f"y{pos}", f"y{pos + 1}", f"1/({to_text(value)})")
            pos += 2
        else:
            a, b = value.real, value.imag
            j4 = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))
            lam = a * np.eye(4) + b * _K4
            ygram = np.linalg.solve(lam, j4)
            ygram = 0.5 * (ygram - ygram.T)
            names_x = [f"x{pos + t}" for t in range(4)]
            names_y = [f"y{pos + t}" for t in range(4)]
            for r in range(4):
                for c in range(4):
                    if j4[r, c] != 0.0:
                        omega[idx[names_x[r]]][idx[names_x[c]]] = _num(j4[r, c])
                    if ygram[r, c] != 0.0:
                        omega[idx[names_y[r]]][idx[names_y[c]]] = _num(ygram[r, c])
            pos += 4

    xs = [f"x{i + 1}" for i in range(m)]
    ys = [f"y{i + 1}" for i in range(m)]
    uv = coords[2 * m:]
    if k <= n and spec.resolved_case != "k-2n-1":
        s1, s2 = ys + uv, xs + uv
    else:
        s1, s2 = ys, xs
    return {
        "n": n,
        "k": k,
        "coords": coords,
        "base_point": [0.0] * dim,
        "omega": omega,
        "strata": [{"kind": "implicit", "exprs": s1, "vars": coords},
                   {"kind": "implicit", "exprs": s2, "vars": coords}],
    }


def synthesize(spec, tol=DEFAULT_TOL):
    try:
        return load_germ_pair(synthesize_doc(spec), tol)
    except ValidationError as exc:
        raise InvalidSpec(f"synthesized tuple is invalid: {exc}") from exc


def _abs_gap(expected, got):
    """Largest absolute difference under the best one-to-one matching."""
    expected = np.asarray(expected, dtype=complex)
    got = np.asarray(got, dtype=complex)
    if expected.size != got.size:
        return float("inf")
    if expected.size == 0:
        return 0.0
    cost = np.abs(np.subtract.outer(expected, got))
    r, c = linear_sum_assignment(cost)
    return float(np.max(cost[r, c]))


def roundtrip_verify(spec, tol=DEFAULT_TOL, max_residual=1e-8, points_per_axis=5, radius=0.2):
    """Synthesize, recompute every invariant and compare with the payload."""
    from .hamiltonians import sample_hamiltonians

    blocks = _blocks(spec)
    gp = synthesize(spec, tol)
    case = spec.resolved_case
    a = analyze(gp, tol=tol)
    report = {
        "case": case,
        "n": spec.n,
        "k": spec.k,
        "s": spec.s,
        "genericity": {name: c.holds for name, c in a.report.conditions.items()},
        "residuals": {},
        "warnings": list(gp.warnings),
    }
    hard = [g for g in REQUIRED[case] if g != "G7"]
    failed = a.report.failures(hard + ["reduction"])
    if failed:
        raise RoundtripFailure(f"genericity condition {failed[0]} fails on the synthesized tuple")
    if "G7" in REQUIRED[case] and not a.report.holds(["G7"]):
        report["warnings"].append("G7 fails: the characteristic Hamiltonian is singular at the base point")

    recovered = a.numbers.collapsed if a.numbers is not None else np.zeros(0, dtype=complex)
    report["recovered"] = [[float(z.real), float(z.imag)] for z in recovered]
    if recovered.size != spec.s:
        raise RoundtripFailure(f"recovered {recovered.size} characteristic numbers, expected {spec.s}")

    if blocks and blocks[0][0] == "field":
        names = spec.q_names()
        exprs = [b[1] for b in blocks]
        fn = compile_exprs(exprs, names)
        expected0 = fn(np.zeros(len(names)))
        gap = _abs_gap(expected0, recovered)
        report["residuals"]["base_values"] = gap
        report["expected"] = [[float(v), 0.0] for v in expected0]
        if gap > max_residual:
            raise RoundtripFailure(f"base values differ from H(0) by {gap:.3g}")
        fld = sample_hamiltonians(gp, points_per_axis=points_per_axis, radius=radius, tol=tol)
        # chart parameters are the u, v coordinates themselves on this normal form
        pivots = fld.grid["pivots"]
        if pivots != names:
            raise RoundtripFailure(f"chart coordinates {pivots} are not {names}")
        worst = 0.0
        for t, vals in zip(fld.params, fld.values):
            want = fn(t)
            got = np.asarray(vals, dtype=complex)
            if np.any(np.isnan(got)):
                raise RoundtripFailure(f"grid point {t.tolist()} was excluded")
            # branches are labelled by the base-value order, H by payload order
            order = np.argsort(expected0, kind="stable")
            worst = max(worst, float(np.max(np.abs(got - want[order]))))
        report["residuals"]["field"] = worst
        report["field_flags"] = list(fld.flags)
        if worst > max_residual:
            raise RoundtripFailure(f"sampled branches differ from the Hamiltonians by {worst:.3g}")
    else:
        expected = []
        for kind, value in blocks:
            if kind == "real":
                expected.append(complex(value))
            else:
                expected += [complex(value), complex(value).conjugate()]
        report["expected"] = [[z.real, z.imag] for z in expected]
        gap = _abs_gap(expected, recovered)
        report["residuals"]["lambdas"] = gap
        if gap > max_residual:
            raise RoundtripFailure(f"characteristic numbers differ from the payload by {gap:.3g}")
    return report
