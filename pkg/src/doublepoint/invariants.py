"""Linearization, reduced linearization and characteristic numbers of a double point.

The pipeline for a germ pair at a point ``p``:

1. :func:`linearize` evaluates the form and both tangent spaces at ``p``;
2. :func:`check_genericity` measures the open rank conditions;
3. :func:`reduce` builds ``(W, sigma, U1, U2)`` from the case-dependent
   formula for ``W``;
4. :func:`characteristic_numbers` takes the spectrum of the transfer
   operator ``T1 = pi1 o pi2|U1`` and, independently, of
   ``A^-1 B / 4`` after normalizing the cross block ``C`` to the identity.

Both stratum dimensions are carried as ``(k1, k2)``; the equal-dimension
case is ``k1 == k2`` and shares every code path.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import (DegenerateSpectrum, DegenerateSplitting, DimensionMismatch, DoublePointError,
                     EvaluationError,
                     GenericityViolation, OutOfRange, RouteMismatch, SingularC, SingularForm,
                     UnpairedEigenvalue)
from .linalg import (DEFAULT_TOL, Subspace, check_skew, eigen_multiset, gram_rank, intersect,
                     multiset_distance, multiset_equal, null_space, numerical_rank, skew_complement,
                     span_sum, symmetrize_conjugates)

INFINITY = float("inf")


def s_value(n, k1, k2=None):
    """Number of characteristic numbers ``min([k1/2], [(2n - k2)/2])``."""
    k2 = k1 if k2 is None else k2
    return max(0, min(k1 // 2, (2 * n - k2) // 2))


def moduli_count(dims, n):
    """Number of moduli for generic double points; ``inf`` marks functional moduli."""
    k1, k2 = (dims, dims) if np.isscalar(dims) else tuple(dims)
    k1, k2 = int(k1), int(k2)
    if n < 1 or not (1 <= k1 <= k2 <= 2 * n - 1):
        raise OutOfRange(f"need 1 <= k1 <= k2 <= 2n-1, got k=({k1}, {k2}), n={n}")
    if k1 != k2 and (k1 + k2) % 2:
        raise OutOfRange("k1 + k2 must be even")
    s = s_value(n, k1, k2)
    if k1 + k2 <= 2 * n or s <= 1:
        return s
    return INFINITY


# ------------------------------------------------------------------ data

@dataclass(frozen=True)
class LinearTuple:
    """Tangent data ``(R^2n, mu, U1 u U2)`` at one point."""

    mu: np.ndarray
    u1: Subspace
    u2: Subspace

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        if mu.shape != (self.u1.ambient_dim,) * 2 or self.u2.ambient_dim != mu.shape[0]:
            raise ValueError("form and subspace dimensions disagree")
        if mu.shape[0] % 2:
            raise ValueError("ambient dimension must be even")
        object.__setattr__(self, "mu", mu)

    @property
    def ambient_dim(self):
        return self.mu.shape[0]

    @property
    def n(self):
        return self.mu.shape[0] // 2

    @property
    def k1(self):
        return self.u1.dim

    @property
    def k2(self):
        return self.u2.dim

    def transformed(self, L):
        """Image under the linear map ``v -> L^-1 v`` (pulls ``mu`` back by ``L``).

        If ``L^T mu L == mu`` the result is an equivalent tuple.
        """
        L = np.asarray(L, dtype=float)
        Linv = np.linalg.inv(L)
        mu = L.T @ self.mu @ L
        return LinearTuple(0.5 * (mu - mu.T), Subspace.span(Linv @ self.u1.basis),
                           Subspace.span(Linv @ self.u2.basis))


@dataclass(frozen=True)
class ReducedLinearization:
    """``(W, sigma, U1, U2)``; ``u1``/``u2`` are bases in W-coordinates."""

    w: np.ndarray
    sigma: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    s: int

    @property
    def is_zero(self):
        return self.s == 0


@dataclass(frozen=True)
class Condition:
    holds: bool
    measured: object
    required: object
    note: str = ""


@dataclass
class GenericityReport:
    conditions: dict = field(default_factory=dict)

    def add(self, name, holds, measured, required, note=""):
        self.conditions[name] = Condition(bool(holds), measured, required, note)

    def __getitem__(self, name):
        return self.conditions[name]

    def __contains__(self, name):
        return name in self.conditions

    def holds(self, names=None):
        names = self.conditions if names is None else names
        return all(self.conditions[n].holds for n in names if n in self.conditions)

    def failures(self, names=None):
        names = list(self.conditions) if names is None else names
        return [n for n in names if n in self.conditions and not self.conditions[n].holds]


@dataclass(frozen=True)
class CharNumbers:
    raw: np.ndarray
    collapsed: np.ndarray
    distinct_count: int
    formula_route: np.ndarray
    route_gap: float


@dataclass(frozen=True)
class Verdict:
    status: str  # "Equivalent" | "NotEquivalent" | "Undetermined"
    rule: str
    reason: str = ""
    details: dict = field(default_factory=dict)


# ---------------------------------------------------------- linearization

def linearize(gp, point=None, params=None, tol=None):
    """Evaluate the form and both tangent spaces at ``point`` (default: base point).

    ``params`` optionally supplies the parameters of ``point`` on each
    parametric stratum, skipping the Newton inversion.
    """
    tol = gp.tol if tol is None else tol
    at_base = point is None
    point = gp.base_point if at_base else np.asarray(point, dtype=float)
    try:
        mu = gp.omega.at(point)
    except EvaluationError as exc:
        raise SingularForm(f"form cannot be evaluated at {point}: {exc}") from exc
    if not check_skew(mu, tol):
        raise SingularForm("form is not skew-symmetric at the point")
    mu = 0.5 * (mu - mu.T)
    if numerical_rank(mu, tol) != mu.shape[0]:
        raise SingularForm("form is degenerate at the point")
    tangents = []
    for i, stratum in enumerate(gp.strata):
        p = None
        if stratum.kind == "parametric":
            if params is not None and params[i] is not None:
                p = params[i]
            elif at_base:
                p = np.zeros(stratum.dim)
        tangents.append(stratum.tangent(point, p))
    return LinearTuple(mu, tangents[0], tangents[1])


def _kernel_line(mu, t):
    """Kernel of the form restricted to an odd-dimensional ``t`` (a line under G1)."""
    q = t.orthonormal()
    g = q.T @ mu @ q
    _, _, vt = np.linalg.svd(0.5 * (g - g.T))
    return Subspace(q @ vt[-1][:, None])


def _names(lt):
    mark = "'" if lt.k1 != lt.k2 else ""
    return {g: g + mark for g in ("G1", "G2", "G3", "G4", "G5", "G6", "G7")} | {"G8": "G8"}


def _linear_conditions(lt, tol):
    """Rank conditions G1-G5 (and G8 for unequal dimensions)."""
    mu, t1, t2 = lt.mu, lt.u1, lt.u2
    n, k1, k2 = lt.n, lt.k1, lt.k2
    dim = 2 * n
    big = k1 + k2 > dim
    nm = _names(lt)
    rep = GenericityReport()

    r1, r2 = gram_rank(mu, t1, tol), gram_rank(mu, t2, tol)
    g1 = (r1 == 2 * (k1 // 2)) and (r2 == 2 * (k2 // 2))
    rep.add(nm["G1"], g1, [r1, r2], [2 * (k1 // 2), 2 * (k2 // 2)], "rank of omega on each stratum")

    cap = intersect(t1, t2, tol=tol)
    tot = span_sum(t1, t2, tol=tol)
    if big:
        rep.add(nm["G2"], tot.dim == dim, tot.dim, dim, "dim(T1 + T2)")
        r3 = gram_rank(mu, cap, tol)
        need = k1 + k2 - dim
        rep.add(nm["G3"], r3 == need and cap.dim == need, r3, need, "rank of omega on T1 & T2")
    else:
        rep.add(nm["G2"], cap.dim == 0, cap.dim, 0, "dim(T1 & T2)")
        r3 = gram_rank(mu, tot, tol)
        rep.add(nm["G3"], r3 == k1 + k2, r3, k1 + k2, "rank of omega on T1 + T2")

    if k1 % 2:
        if g1:
            plane = span_sum(_kernel_line(mu, t1), _kernel_line(mu, t2), tol=tol)
            r4 = gram_rank(mu, plane, tol)
            rep.add(nm["G4"], r4 == 2, r4, 2, "rank of omega on l1 + l2")
        else:
            rep.add(nm["G4"], False, None, 2, "kernel lines undefined because G1 fails")

    comp1 = skew_complement(t1, mu, tol)
    r5 = span_sum(comp1, t2, tol=tol).dim
    rep.add(nm["G5"], r5 == dim, r5, dim, "dim(T1^omega + T2)")

    if k1 != k2:
        r8 = gram_rank(mu, intersect(comp1, t2, tol=tol), tol)
        rep.add("G8", r8 == k2 - k1, r8, k2 - k1, "rank of omega on T1^omega & T2")
    return rep


def check_genericity_linear(lt, tol=DEFAULT_TOL):
    """All pointwise conditions (G1-G6, G8) of a linear tuple."""
    rep, _, _ = analyze_linear(lt, tol)
    return rep


def analyze_linear(lt, tol=DEFAULT_TOL):
    """Genericity report plus, when possible, the reduction and its numbers."""
    rep = _linear_conditions(lt, tol)
    nm = _names(lt)
    s = s_value(lt.n, lt.k1, lt.k2)
    rl = cn = None
    if rep.holds():
        try:
            rl = reduce(lt, tol)
            cn = characteristic_numbers(rl, tol)
        except (GenericityViolation, DegenerateSplitting, SingularC) as exc:
            rep.add("reduction", False, None, None, str(exc))
    if s >= 2:
        if cn is None:
            rep.add(nm["G6"], False, None, s, "characteristic numbers unavailable")
        else:
            rep.add(nm["G6"], cn.distinct_count == s, cn.distinct_count, s,
                    "number of distinct characteristic numbers")
    return rep, rl, cn


# -------------------------------------------------------------- reduction

def _w_space(lt, tol):
    mu, t1, t2 = lt.mu, lt.u1, lt.u2
    big = lt.k1 + lt.k2 > lt.ambient_dim
    if big:
        w = skew_complement(intersect(t1, t2, tol=tol), mu, tol)
    else:
        w = span_sum(t1, t2, tol=tol)
    if lt.k1 != lt.k2:
        w = intersect(w, span_sum(t1, skew_complement(t2, mu, tol), tol=tol), tol=tol)
    if lt.k1 % 2:
        lines = span_sum(_kernel_line(mu, t1), _kernel_line(mu, t2), tol=tol)
        w = intersect(w, skew_complement(lines, mu, tol), tol=tol)
    return w


def reduce(lt, tol=DEFAULT_TOL):
    """Reduced linearization with its dimension and transversality certificates.

    Raises :class:`GenericityViolation` naming the failed property:
    (a) dim W = 4s, (b) sigma nonsingular, (c) U1, U2 transversal symplectic
    of dimension 2s, (d) U1^sigma transversal to U2.
    """
    s = s_value(lt.n, lt.k1, lt.k2)
    w = _w_space(lt, tol)
    if w.dim != 4 * s:
        raise GenericityViolation(f"(a) dim W = {w.dim}, expected 4s = {4 * s}")
    if s == 0:
        e = np.zeros((0, 0))
        return ReducedLinearization(np.zeros((lt.ambient_dim, 0)), e, e, e, 0)
    wb = w.orthonormal()
    sigma = wb.T @ lt.mu @ wb
    sigma = 0.5 * (sigma - sigma.T)
    if gram_rank(lt.mu, w, tol) != 4 * s:
        raise GenericityViolation("(b) sigma is degenerate on W")
    u1 = intersect(lt.u1, w, tol=tol)
    u2 = intersect(lt.u2, w, tol=tol)
    if u1.dim != 2 * s or u2.dim != 2 * s:
        raise GenericityViolation(f"(c) dim U1, U2 = {u1.dim}, {u2.dim}, expected {2 * s}")
    if gram_rank(lt.mu, u1, tol) != 2 * s or gram_rank(lt.mu, u2, tol) != 2 * s:
        raise GenericityViolation("(c) sigma is degenerate on U1 or U2")
    if intersect(u1, u2, tol=tol).dim != 0:
        raise GenericityViolation("(c) U1 and U2 are not transversal")
    # keep the caller's tangent basis whenever the whole tangent space survives
    b1 = lt.u1.basis if u1.dim == lt.k1 else u1.orthonormal()
    b2 = lt.u2.basis if u2.dim == lt.k2 else u2.orthonormal()
    p1 = wb.T @ b1
    p2 = wb.T @ b2
    c1 = Subspace(null_space(p1.T @ sigma, tol, cols=4 * s))
    if intersect(c1, Subspace(p2), tol=tol).dim != 0:
        raise GenericityViolation("(d) U1^sigma meets U2")
    return ReducedLinearization(wb, sigma, p1, p2, s)


def reduced_from_abc(A, B, C):
    """Reduced linearization in the coordinate form built from ``(A, B, C)``.

    W = R^4s with coordinates (x, y); U1 = span(d/dx), U2 = span(d/dy) and
    sigma(dx_i, dx_j) = -2 A_ij, sigma(dy_i, dy_j) = 2 (B^-1)_ij,
    sigma(dx_i, dy_j) = C_ij.
    """
    A, B, C = (np.asarray(m, dtype=float) for m in (A, B, C))
    m = A.shape[0]
    sigma = np.block([[-2.0 * A, C], [-C.T, 2.0 * np.linalg.inv(B)]])
    sigma = 0.5 * (sigma - sigma.T)
    eye = np.eye(2 * m)
    return ReducedLinearization(eye, sigma, eye[:, :m], eye[:, m:], m // 2)


# ----------------------------------------------------- operators and ABC

def _projector(p, sigma, tol):
    """Rows mapping W-coordinates to U-coordinates along U^sigma."""
    dim, m = p.shape
    comp = null_space(p.T @ sigma, tol, cols=dim)
    split = np.hstack([p, comp])
    if comp.shape[1] != dim - m or numerical_rank(split, tol) != dim:
        raise DegenerateSplitting("W is not the direct sum of U and its skew complement")
    return np.linalg.solve(split, np.eye(dim))[:m]


def transfer_operators(rl, tol=DEFAULT_TOL):
    """Matrices of ``T1 = pi1 o pi2|U1`` and ``T2 = pi2 o pi1|U2`` in the stored bases."""
    if rl.is_zero:
        return np.zeros((0, 0)), np.zeros((0, 0))
    pi1 = _projector(rl.u1, rl.sigma, tol)
    pi2 = _projector(rl.u2, rl.sigma, tol)
    t1 = pi1 @ rl.u2 @ pi2 @ rl.u1
    t2 = pi2 @ rl.u1 @ pi1 @ rl.u2
    return t1, t2


def extract_abc(rl, tol=DEFAULT_TOL):
    """Blocks ``(A, B, C)`` of sigma in the stored bases of U1 and U2."""
    if rl.is_zero:
        e = np.zeros((0, 0))
        return e, e, e
    s1 = rl.u1.T @ rl.sigma @ rl.u1
    s2 = rl.u2.T @ rl.sigma @ rl.u2
    A = -0.25 * (s1 - s1.T)
    half = 0.25 * (s2 - s2.T)
    if numerical_rank(half, tol) != half.shape[0]:
        raise GenericityViolation("sigma is degenerate on U2")
    B = np.linalg.inv(half)
    B = 0.5 * (B - B.T)
    C = rl.u1.T @ rl.sigma @ rl.u2
    if numerical_rank(C, tol) != C.shape[0]:
        raise SingularC("cross block C is singular (U1^sigma meets U2)")
    return A, B, C


extract_ABC = extract_abc


def c_normalize(rl, tol=DEFAULT_TOL):
    """Equivalent reduced linearization whose cross block is the identity.

    The basis of U1 is replaced by ``U1 C^-T`` so that
    ``sigma(new_x_i, y_j) = delta_ij``.
    """
    if rl.is_zero:
        return rl
    _, _, C = extract_abc(rl, tol)
    p1 = rl.u1 @ np.linalg.inv(C).T
    return ReducedLinearization(rl.w, rl.sigma, p1, rl.u2, rl.s)


def pair_eigenvalues(raw, tol=DEFAULT_TOL):
    """Collapse a spectrum whose values come in (numerical) pairs.

    Entries are visited in (real, imag) order; each one is matched with its
    nearest remaining neighbour and the pair must lie within
    ``eig_pair_tol`` (relative). A failure raises rather than forcing a pair.
    """
    rest = sorted((complex(v) for v in raw), key=lambda z: (z.real, z.imag))
    if len(rest) % 2:
        raise UnpairedEigenvalue("odd number of eigenvalues")
    out = []
    while rest:
        v = rest.pop(0)
        j = min(range(len(rest)), key=lambda i: abs(rest[i] - v))
        w = rest.pop(j)
        if abs(w - v) > tol.eig_pair_tol * (1.0 + abs(v)):
            raise UnpairedEigenvalue(f"eigenvalue {v} has no partner within tolerance (nearest {w})")
        out.append(0.5 * (v + w))
    return symmetrize_conjugates(out, tol)


def count_distinct(values, tol=DEFAULT_TOL):
    """Clusters under single linkage with radius ``eig_distinct_tol`` (relative)."""
    vals = list(np.asarray(values, dtype=complex))
    parent = list(range(len(vals)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            if abs(vals[i] - vals[j]) <= tol.eig_distinct_tol * (1.0 + max(abs(vals[i]), abs(vals[j]))):
                parent[find(i)] = find(j)
    return len({find(i) for i in range(len(vals))})


def formula_spectrum(rl, tol=DEFAULT_TOL):
    """Spectrum of ``A^-1 B / 4`` after C-normalization."""
    if rl.is_zero:
        return np.zeros(0, dtype=complex)
    A, B, _ = extract_abc(c_normalize(rl, tol), tol)
    return eigen_multiset(0.25 * np.linalg.solve(A, B), tol)


def characteristic_numbers(rl, tol=DEFAULT_TOL):
    """Eigenvalues of ``T1``, cross-checked against the ``A^-1 B / 4`` formula."""
    if rl.is_zero:
        e = np.zeros(0, dtype=complex)
        return CharNumbers(e, e, 0, e, 0.0)
    t1, _ = transfer_operators(rl, tol)
    raw = eigen_multiset(t1, tol)
    formula = formula_spectrum(rl, tol)
    gap = multiset_distance(raw, formula)
    if gap > tol.eig_pair_tol:
        raise RouteMismatch(f"transfer-operator and formula spectra differ by {gap:.3g}")
    collapsed = pair_eigenvalues(raw, tol)
    return CharNumbers(raw, collapsed, count_distinct(collapsed, tol), formula, gap)


# ------------------------------------------------------ congruence witness

_J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
_D = np.diag([1.0, -1.0])
_K4 = np.block([[np.zeros((2, 2)), -_D], [_D, np.zeros((2, 2))]])


def canonical_block(mu):
    """Canonical skew pair ``(A, B)`` with ``A^-1 B`` having eigenvalue ``mu`` twice
    (and ``conj(mu)`` twice when ``mu`` is not real)."""
    mu = complex(mu)
    if mu.imag == 0.0:
        return _J2.copy(), mu.real * _J2
    J4 = np.kron(np.eye(2), _J2)
    lam = mu.real * np.eye(4) + abs(mu.imag) * _K4
    return J4, J4 @ lam


def _smallest_right_vectors(m, count):
    _, _, vt = np.linalg.svd(m)
    return vt[-count:].T


def canonical_congruence(A, B, reps=None, tol=DEFAULT_TOL):
    """Matrix ``S`` with ``S^T A S`` and ``S^T B S`` in block canonical form.

    Blocks follow ``reps`` (one entry per real eigenvalue of ``A^-1 B`` and one
    per conjugate pair, given with positive imaginary part); by default they
    are sorted by (real, imag). Returns ``(S, reps)``.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    size = A.shape[0]
    M = np.linalg.solve(A, B)
    collapsed = pair_eigenvalues(eigen_multiset(M, tol), tol)
    if count_distinct(collapsed, tol) != collapsed.size:
        raise DegenerateSpectrum("A^-1 B has fewer than s distinct eigenvalues")
    own = [z for z in collapsed if z.imag >= 0.0]
    if reps is None:
        reps = sorted(own, key=lambda z: (z.real, z.imag))
    else:
        reps = list(reps)
        cost = np.abs(np.subtract.outer(np.asarray(reps), np.asarray(own)))
        _, cols = linear_sum_assignment(cost)
        reps = [own[c] for c in cols]
    columns = []
    for mu in reps:
        if mu.imag == 0.0:
            v = _smallest_right_vectors(M - mu.real * np.eye(size), 2)
            av = v.T @ A @ v
            columns.append(np.column_stack([v[:, 0], v[:, 1] / av[0, 1]]))
            continue
        a, b = mu.real, mu.imag
        quad = M @ M - 2.0 * a * M + abs(mu) ** 2 * np.eye(size)
        v = _smallest_right_vectors(quad, 4)
        av = v.T @ A @ v
        kv = (v.T @ M @ v - a * np.eye(4)) / b
        e1 = np.array([1.0, 0.0, 0.0, 0.0])
        e3 = kv @ e1
        rows = np.vstack([e1 @ av, e1 @ av @ kv])
        e2, *_ = np.linalg.lstsq(rows, np.array([1.0, 0.0]), rcond=None)
        e4 = -kv @ e2
        columns.append(v @ np.column_stack([e1, e2, e3, e4]))
    return np.hstack(columns), reps


def congruence_witness(A1, B1, A2, B2, tol=DEFAULT_TOL):
    """Nonsingular ``R`` with ``R^T A1 R = A2`` and ``R^T B1 R = B2``, or ``None``."""
    l1 = eigen_multiset(np.linalg.solve(A1, B1), tol)
    l2 = eigen_multiset(np.linalg.solve(A2, B2), tol)
    if not multiset_equal(l1, l2, tol):
        return None
    s1, reps = canonical_congruence(A1, B1, tol=tol)
    s2, _ = canonical_congruence(A2, B2, reps=reps, tol=tol)
    return s1 @ np.linalg.inv(s2)


def congruence_residual(R, A1, A2):
    return float(np.linalg.norm(R.T @ A1 @ R - A2) / np.linalg.norm(A2))


def linear_equivalence_witness(rl1, rl2, tol=DEFAULT_TOL):
    """Congruence between the C-normalized ``(A, B)`` pairs of two reductions."""
    if rl1.s != rl2.s:
        return None
    if rl1.is_zero:
        return np.zeros((0, 0))
    for rl in (rl1, rl2):
        cn = characteristic_numbers(rl, tol)
        if cn.distinct_count < rl.s:
            raise DegenerateSpectrum("fewer than s distinct characteristic numbers")
    A1, B1, _ = extract_abc(c_normalize(rl1, tol), tol)
    A2, B2, _ = extract_abc(c_normalize(rl2, tol), tol)
    return congruence_witness(A1, B1, A2, B2, tol)


# ---------------------------------------------------------- germ level

@dataclass
class Analysis:
    """Everything computed for one germ pair at its base point."""

    report: GenericityReport
    reduced: object = None
    numbers: object = None


def analyze(gp, point=None, tol=None, with_g7=True):
    tol = gp.tol if tol is None else tol
    lt = linearize(gp, point, tol=tol)
    rep, rl, cn = analyze_linear(lt, tol)
    out = Analysis(rep, rl, cn)
    s = s_value(gp.n, gp.k1, gp.k2)
    big = gp.k1 + gp.k2 > 2 * gp.n
    if with_g7 and big and s == 1 and point is None:
        from .hamiltonians import check_g7_at_base

        name = _names(lt)["G7"]
        if cn is None:
            rep.add(name, False, None, "dH(p) != 0", "characteristic number unavailable")
        else:
            try:
                g7 = check_g7_at_base(gp, tol=tol)
                rep.add(name, g7["holds"], [float(x) for x in g7["gradient"]], "dH(p) != 0",
                        f"gradient norm threshold {g7['threshold']:.3g}")
            except DoublePointError as exc:
                rep.add(name, False, None, "dH(p) != 0", f"Hamiltonian sampling failed: {exc}")
    return out


def check_genericity(gp, point=None, tol=None):
    return analyze(gp, point, tol).report


def _required(k1, k2, n, s):
    """Classification rule that applies and the conditions it needs.

    Rule names get the suffix ``-unequal`` when ``k1 != k2``.
    """
    prime = k1 != k2
    mark = "'" if prime else ""
    suffix = "-unequal" if prime else ""
    base = [g + mark for g in ("G1", "G2", "G3", "G4", "G5")] + (["G8"] if prime else [])
    big = k1 + k2 > 2 * n
    if s == 0:
        if prime:
            return "zero-tuple" + suffix, base
        return ("zero-tuple-curve" if k1 == 1 else "zero-tuple-hypersurface"), ["G2", "G3"]
    if not big:
        return "characteristic-numbers" + suffix, base + ["G6" + mark]
    if s == 1:
        return "single-hamiltonian" + suffix, base + ["G7" + mark]
    return "functional-moduli" + suffix, base + ["G6" + mark]


def _fmt(values):
    return [[float(z.real), float(z.imag)] for z in values]


def decide_equivalence(gp1, gp2, tol=None):
    """Decide equivalence of two germ pairs where a classification rule applies."""
    tol = gp1.tol if tol is None else tol
    if (gp1.n, gp1.k1, gp1.k2) != (gp2.n, gp2.k1, gp2.k2):
        raise DimensionMismatch(f"(n, k1, k2) differ: {(gp1.n, gp1.k1, gp1.k2)} vs {(gp2.n, gp2.k1, gp2.k2)}")
    n, k1, k2 = gp1.n, gp1.k1, gp1.k2
    s = s_value(n, k1, k2)
    rule, required = _required(k1, k2, n, s)
    analyses = [analyze(gp, tol=tol) for gp in (gp1, gp2)]
    for label, a in zip(("first", "second"), analyses):
        failed = a.report.failures(required + ["reduction"])
        if failed:
            return Verdict("Undetermined", rule, f"genericity condition {failed[0]} fails for the {label} germ",
                           {"failed": failed, "tuple": label})
    if s == 0:
        return Verdict("Equivalent", rule, "zero reduced linearization", {"s": 0})
    l1, l2 = (a.numbers.collapsed for a in analyses)
    details = {"s": s, "first": _fmt(l1), "second": _fmt(l2)}
    same = multiset_equal(l1, l2, tol)
    big = k1 + k2 > 2 * n
    if not big or s == 1:
        status = "Equivalent" if same else "NotEquivalent"
        return Verdict(status, rule, "characteristic numbers compared", details)
    if not same:
        return Verdict("NotEquivalent", rule, "characteristic Hamiltonians differ at the base point", details)
    return Verdict("Undetermined", rule, "functional moduli: matching base values do not decide equivalence",
                   details)
