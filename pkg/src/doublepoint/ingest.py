"""Germ-pair documents: parsing, validation and the in-memory model.

A document is a JSON object::

    {"n": 2, "k": 2,                      # or "k1": .., "k2": ..
     "coords": ["x1", "x2", "y1", "y2"],
     "base_point": [0, 0, 0, 0],
     "omega": [["0", "1", "1", "0"], ...],   # omega(d/dc_i, d/dc_j)
     "strata": [{"kind": "parametric", "exprs": [...], "vars": [...]},
                {"kind": "implicit", "exprs": [...]}]}

``omega`` holds the Gram matrix of the 2-form in the coordinate basis:
entry (i, j) is the coefficient function omega(d/dc_i, d/dc_j).
"""
import json
import re
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

from .errors import EvaluationError, ParseError, PointNotOnStratum, ValidationError
from .expr import compile_exprs, diff, free_vars, parse_expression, to_text
from .linalg import DEFAULT_TOL, Subspace, check_skew, null_space, numerical_rank


def _parse_all(texts, where):
    out = []
    for i, t in enumerate(texts):
        try:
            out.append(parse_expression(t))
        except ParseError as exc:
            raise ValidationError(f"{where}[{i}]: {exc}") from exc
    return tuple(out)


class StratumGerm:
    """One branch through the double point, parametric or implicit."""

    def __init__(self, kind, exprs, vars, coords, dim, tol=DEFAULT_TOL):
        if kind not in ("parametric", "implicit"):
            raise ValidationError(f"unknown stratum kind {kind!r}")
        self.kind = kind
        self.exprs = tuple(exprs)
        self.vars = tuple(vars)
        self.coords = tuple(coords)
        self.dim = dim
        self.tol = tol
        names = self.vars if kind == "parametric" else self.coords
        self._names = names
        self._value = compile_exprs(self.exprs, names, tol.rank_tol)
        jac = [diff(e, v) for e in self.exprs for v in names]
        self._jac = compile_exprs(jac, names, tol.rank_tol)
        self._shape = (len(self.exprs), len(names))

    @property
    def ambient_dim(self):
        return len(self.coords)

    def value(self, args):
        """phi(params) for parametric strata, F(point) for implicit ones."""
        return self._value(args)

    def jacobian(self, args):
        return self._jac(args).reshape(self._shape)

    def locate(self, point, guess=None, max_iter=50):
        """Parameters of ``point`` (parametric) by Gauss-Newton inversion."""
        if self.kind != "parametric":
            raise TypeError("locate applies to parametric strata only")
        point = np.asarray(point, dtype=float)
        a = np.zeros(self.dim) if guess is None else np.asarray(guess, dtype=float).copy()
        scale = 1.0 + np.max(np.abs(point), initial=0.0)
        for _ in range(max_iter):
            r = self.value(a) - point
            if np.max(np.abs(r), initial=0.0) <= 1e-12 * scale:
                return a
            step, *_ = np.linalg.lstsq(self.jacobian(a), r, rcond=None)
            a = a - step
        r = self.value(a) - point
        if np.max(np.abs(r), initial=0.0) <= 1e-9 * scale:
            return a
        raise PointNotOnStratum(f"point not on stratum (residual {np.max(np.abs(r)):.3g})")

    def tangent(self, point, params=None):
        """Tangent space at an ambient point as a :class:`Subspace`."""
        if self.kind == "parametric":
            if params is None:
                params = self.locate(point)
            jac = self.jacobian(params)
            if numerical_rank(jac, self.tol) == jac.shape[1]:
                return Subspace(jac, self.tol)
            return Subspace.span(jac, self.tol)
        point = np.asarray(point, dtype=float)
        residual = np.max(np.abs(self.value(point)), initial=0.0)
        if residual > 1e-9 * (1.0 + np.max(np.abs(point), initial=0.0)):
            raise PointNotOnStratum(f"implicit equations do not vanish (residual {residual:.3g})")
        basis = null_space(self.jacobian(point), self.tol, cols=self.ambient_dim)
        if basis.shape[1]:
            # normalize to the identity on the best-conditioned rows, so coordinate
            # subspaces get coordinate vectors whatever the SVD signs were
            _, _, piv = scipy.linalg.qr(basis.T, pivoting=True)
            rows = np.sort(piv[:basis.shape[1]])
            basis = np.linalg.solve(basis[rows].T, basis.T).T
        return Subspace(basis, self.tol)

    def to_doc(self):
        out = {"kind": self.kind, "exprs": [to_text(e) for e in self.exprs]}
        out["vars"] = list(self.vars) if self.kind == "parametric" else list(self.coords)
        return out


class TwoFormGerm:
    """Skew matrix of coefficient expressions in the ambient coordinates."""

    def __init__(self, exprs, coords, tol=DEFAULT_TOL):
        self.exprs = tuple(tuple(row) for row in exprs)
        self.coords = tuple(coords)
        self.size = len(self.coords)
        flat = [e for row in self.exprs for e in row]
        self._value = compile_exprs(flat, self.coords, tol.rank_tol)

    def at(self, point):
        return self._value(point).reshape(self.size, self.size)

    @cached_property
    def _derivs(self):
        flat = [diff(e, c) for row in self.exprs for e in row for c in self.coords]
        return compile_exprs(flat, self.coords)

    def exterior_derivative(self, point):
        """Coefficients ``(d omega)_{abc}`` at ``point``, from exact derivatives."""
        n = self.size
        d = self._derivs(point).reshape(n, n, n)  # d[b, c, a] = d_a omega_bc
        da = np.transpose(d, (2, 0, 1))  # da[a, b, c]
        return da + np.transpose(da, (1, 2, 0)) + np.transpose(da, (2, 0, 1))

    def to_doc(self):
        return [[to_text(e) for e in row] for row in self.exprs]


@dataclass
class GermPair:
    n: int
    k1: int
    k2: int
    coords: tuple
    base_point: np.ndarray
    omega: TwoFormGerm
    strata: tuple
    tol: object = DEFAULT_TOL
    warnings: list = field(default_factory=list)

    @property
    def dims(self):
        return self.k1 if self.k1 == self.k2 else (self.k1, self.k2)

    @property
    def equal_dims(self):
        return self.k1 == self.k2

    def to_doc(self):
        doc = {"n": self.n}
        if self.equal_dims:
            doc["k"] = self.k1
        else:
            doc["k1"], doc["k2"] = self.k1, self.k2
        doc["coords"] = list(self.coords)
        doc["base_point"] = [float(x) for x in self.base_point]
        doc["omega"] = self.omega.to_doc()
        doc["strata"] = [s.to_doc() for s in self.strata]
        return doc


def _require(cond, message):
    if not cond:
        raise ValidationError(message)


def _int_field(doc, key):
    value = doc.get(key)
    _require(isinstance(value, int) and not isinstance(value, bool) and value > 0,
             f"'{key}' must be a positive integer")
    return value


def load_germ_pair(doc, tol=DEFAULT_TOL):
    """Validate a decoded document and build a :class:`GermPair`.

    Raises :class:`ValidationError` naming the first violated check.
    """
    _require(isinstance(doc, dict), "document must be a JSON object")
    n = _int_field(doc, "n")
    dim = 2 * n
    if "k" in doc:
        k1 = k2 = _int_field(doc, "k")
    else:
        k1, k2 = _int_field(doc, "k1"), _int_field(doc, "k2")
        _require(k1 < k2, "k1 must be smaller than k2 (use 'k' for equal dimensions)")
        _require((k1 + k2) % 2 == 0, "k1 + k2 must be even")
    _require(1 <= k1 and k2 <= dim - 1, f"stratum dimensions must lie in [1, {dim - 1}]")

    coords = doc.get("coords")
    if coords is None:
        coords = [f"c{i + 1}" for i in range(dim)]
    _require(isinstance(coords, list) and len(coords) == dim and all(isinstance(c, str) for c in coords),
             f"'coords' must list {dim} names")
    _require(len(set(coords)) == dim, "'coords' names must be distinct")
    for c in coords:
        _require(re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", c) is not None,
                 f"coordinate name {c!r} is not an identifier")

    base = doc.get("base_point")
    _require(isinstance(base, list) and len(base) == dim, f"'base_point' must have {dim} entries")
    try:
        base = np.array([float(x) for x in base])
    except (TypeError, ValueError):
        raise ValidationError("'base_point' entries must be numbers") from None
    _require(np.all(np.isfinite(base)), "'base_point' entries must be finite")

    rows = doc.get("omega")
    _require(isinstance(rows, list) and len(rows) == dim
             and all(isinstance(r, list) and len(r) == dim for r in rows),
             f"'omega' must be a {dim}x{dim} array")
    omega_exprs = [_parse_all(r, f"omega[{i}]") for i, r in enumerate(rows)]
    for i, row in enumerate(omega_exprs):
        for j, e in enumerate(row):
            extra = free_vars(e) - set(coords)
            _require(not extra, f"omega[{i}][{j}] uses undeclared identifier(s) {sorted(extra)}")
    omega = TwoFormGerm(omega_exprs, coords, tol)

    try:
        w0 = omega.at(base)
    except EvaluationError as exc:
        raise ValidationError(f"omega cannot be evaluated at base_point: {exc}") from exc
    _require(check_skew(w0, tol), "omega is not skew-symmetric at base_point")
    _require(numerical_rank(w0, tol) == dim, "omega is singular at base_point")

    strata_docs = doc.get("strata")
    _require(isinstance(strata_docs, list) and len(strata_docs) == 2, "'strata' must hold two objects")
    strata = []
    for idx, (sd, k) in enumerate(zip(strata_docs, (k1, k2))):
        where = f"strata[{idx}]"
        _require(isinstance(sd, dict), f"{where} must be an object")
        kind = sd.get("kind")
        _require(kind in ("parametric", "implicit"), f"{where}.kind must be 'parametric' or 'implicit'")
        texts = sd.get("exprs")
        _require(isinstance(texts, list), f"{where}.exprs must be a list")
        exprs = _parse_all(texts, f"{where}.exprs")
        if kind == "parametric":
            names = sd.get("vars")
            _require(isinstance(names, list) and len(names) == k and all(isinstance(v, str) for v in names),
                     f"{where}.vars must list {k} parameter names")
            _require(len(set(names)) == k, f"{where}.vars must be distinct")
            _require(len(exprs) == dim, f"{where}: a parametric stratum needs {dim} expressions")
        else:
            names = coords
            given = sd.get("vars")
            _require(given is None or list(given) == list(coords),
                     f"{where}.vars of an implicit stratum must equal 'coords'")
            _require(len(exprs) == dim - k, f"{where}: an implicit stratum of dimension {k} needs {dim - k} equations")
        for j, e in enumerate(exprs):
            extra = free_vars(e) - set(names)
            _require(not extra, f"{where}.exprs[{j}] uses undeclared identifier(s) {sorted(extra)}")
        stratum = StratumGerm(kind, exprs, names, coords, k, tol)
        try:
            if kind == "parametric":
                at0 = stratum.value(np.zeros(k))
                _require(np.max(np.abs(at0 - base)) <= 1e-9 * (1 + np.max(np.abs(base))),
                         f"{where}: parametrization does not map 0 to base_point")
                jac = stratum.jacobian(np.zeros(k))
                _require(numerical_rank(jac, tol) == k, f"{where}: parametrization is not immersive at 0")
            else:
                res = stratum.value(base)
                _require(np.max(np.abs(res), initial=0.0) <= 1e-9 * (1 + np.max(np.abs(base))),
                         f"{where}: equations do not vanish at base_point")
                _require(numerical_rank(stratum.jacobian(base), tol) == dim - k,
                         f"{where}: equations do not have full-rank Jacobian at base_point")
        except EvaluationError as exc:
            raise ValidationError(f"{where}: {exc}") from exc
        strata.append(stratum)

    gp = GermPair(n, k1, k2, tuple(coords), base, omega, tuple(strata), tol)
    dw = np.max(np.abs(omega.exterior_derivative(base)), initial=0.0)
    if dw > tol.rank_tol * max(1.0, float(np.max(np.abs(w0)))):
        gp.warnings.append(f"omega is not closed at base_point: max |d omega| = {dw:.3e}")
    return gp


def load_document(text, tol=DEFAULT_TOL):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc}") from exc
    return load_germ_pair(doc, tol)


def load_file(path, tol=DEFAULT_TOL):
    with open(path, encoding="utf-8") as fh:
        return load_document(fh.read(), tol)


def linear_germ_pair(mu, u1, u2, base_point=None, tol=DEFAULT_TOL):
    """Germ pair with constant form ``mu`` and strata the affine spans of ``u1``, ``u2``."""
    mu = np.asarray(mu, dtype=float)
    dim = mu.shape[0]
    base = np.zeros(dim) if base_point is None else np.asarray(base_point, dtype=float)
    coords = [f"c{i + 1}" for i in range(dim)]

    def param(sub, prefix):
        b = sub.basis
        names = [f"{prefix}{j + 1}" for j in range(b.shape[1])]
        exprs = []
        for i in range(dim):
            terms = [f"{float(b[i, j])!r}*{names[j]}" for j in range(b.shape[1]) if b[i, j] != 0.0]
            const = repr(float(base[i]))
            exprs.append(" + ".join([const] + terms))
        return {"kind": "parametric", "exprs": exprs, "vars": names}

    doc = {"n": dim // 2, "coords": coords, "base_point": base.tolist(),
           "omega": [[repr(float(x)) for x in row] for row in mu],
           "strata": [param(u1, "a"), param(u2, "b")]}
    if u1.dim == u2.dim:
        doc["k"] = u1.dim
    else:
        doc["k1"], doc["k2"] = u1.dim, u2.dim
    return load_germ_pair(doc, tol)
