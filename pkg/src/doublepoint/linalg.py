"""Tolerance-controlled dense linear algebra over explicit bases.

All geometric predicates used elsewhere (transversality, kernel
dimensions, nondegeneracy of restricted forms) reduce to
:func:`numerical_rank`, so a single relative threshold governs them.
"""
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .errors import NoConvergence, SingularForm


@dataclass(frozen=True)
class ToleranceConfig:
    rank_tol: float = 1e-9
    eig_pair_tol: float = 1e-6
    eig_distinct_tol: float = 1e-6

    def __post_init__(self):
        for name in ("rank_tol", "eig_pair_tol", "eig_distinct_tol"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be strictly positive, got {value!r}")
        if self.rank_tol >= 1:
            raise ValueError("rank_tol must be < 1")


DEFAULT_TOL = ToleranceConfig()


def _as_matrix(m):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def numerical_rank(m, tol=DEFAULT_TOL):
    """Number of singular values above ``rank_tol`` times the largest one."""
    m = _as_matrix(m)
    if m.size == 0:
        return 0
    sv = np.linalg.svd(m, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.count_nonzero(sv > tol.rank_tol * sv[0]))


def _range_basis(m, tol):
    """Orthonormal basis of the column span of ``m``."""
    m = _as_matrix(m)
    if m.shape[1] == 0:
        return np.zeros((m.shape[0], 0))
    u, sv, _ = np.linalg.svd(m, full_matrices=False)
    if sv.size == 0 or sv[0] == 0.0:
        return np.zeros((m.shape[0], 0))
    r = int(np.count_nonzero(sv > tol.rank_tol * sv[0]))
    return u[:, :r]


def null_space(m, tol=DEFAULT_TOL, cols=None):
    """Orthonormal basis of the right kernel of ``m``.

    ``cols`` is the number of unknowns and is only needed when ``m`` has
    no rows.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    ncols = m.shape[1] if cols is None else cols
    if m.shape[0] == 0 or ncols == 0:
        return np.eye(ncols)
    _, sv, vt = np.linalg.svd(m, full_matrices=True)
    if sv[0] == 0.0:
        return np.eye(ncols)
    r = int(np.count_nonzero(sv > tol.rank_tol * sv[0]))
    return vt[r:].T.copy()


class Subspace:
    """A linear subspace of R^N given by the columns of ``basis``.

    The basis is kept as supplied; algorithms that need an orthonormal
    one call :meth:`orthonormal`.
    """

    __slots__ = ("_basis",)

    def __init__(self, basis, tol=DEFAULT_TOL):
        basis = _as_matrix(basis)
        if basis.shape[0] == 0:
            raise ValueError("ambient dimension must be positive")
        if basis.shape[1] > basis.shape[0]:
            raise ValueError("more basis vectors than ambient dimension")
        if numerical_rank(basis, tol) != basis.shape[1]:
            raise ValueError("basis columns are not linearly independent")
        basis = basis.copy()
        basis.setflags(write=False)
        self._basis = basis

    @classmethod
    def span(cls, vectors, tol=DEFAULT_TOL):
        """Subspace spanned by the (possibly dependent) columns of ``vectors``."""
        return cls(_range_basis(vectors, tol), tol)

    @classmethod
    def zero(cls, ambient_dim):
        return cls(np.zeros((ambient_dim, 0)))

    @classmethod
    def whole(cls, ambient_dim):
        return cls(np.eye(ambient_dim))

    @property
    def basis(self):
        return self._basis

    @property
    def ambient_dim(self):
        return self._basis.shape[0]

    @property
    def dim(self):
        return self._basis.shape[1]

    def orthonormal(self):
        if self.dim == 0:
            return self._basis
        q, _ = np.linalg.qr(self._basis)
        return q

    def contains(self, other, tol=DEFAULT_TOL):
        if other.dim == 0:
            return True
        stacked = np.hstack([self.orthonormal(), other.orthonormal()])
        return numerical_rank(stacked, tol) == self.dim

    def equals(self, other, tol=DEFAULT_TOL):
        """Span equality, decided by mutual containment."""
        return (self.ambient_dim == other.ambient_dim and self.dim == other.dim
                and self.contains(other, tol) and other.contains(self, tol))

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})"


def check_skew(omega, tol=DEFAULT_TOL):
    omega = _as_matrix(omega)
    if omega.shape[0] != omega.shape[1]:
        raise ValueError("form matrix must be square")
    scale = max(1.0, float(np.max(np.abs(omega))) if omega.size else 1.0)
    return bool(np.max(np.abs(omega + omega.T), initial=0.0) <= tol.rank_tol * scale)


def skew_complement(u, omega, tol=DEFAULT_TOL):
    """Skew-orthogonal complement ``{v : omega(v, w) = 0 for all w in u}``."""
    omega = _as_matrix(omega)
    n = omega.shape[0]
    if omega.shape != (n, n) or n != u.ambient_dim:
        raise ValueError("form and subspace sizes differ")
    if numerical_rank(omega, tol) != n:
        raise SingularForm("form is singular; skew complement undefined")
    if u.dim == 0:
        return Subspace.whole(n)
    # omega(v, w) = v^T Omega w, so v must annihilate the columns of Omega @ U
    constraints = (omega @ u.orthonormal()).T
    return Subspace(null_space(constraints, tol, cols=n), tol)


def subspace_combine(op, u, v, tol=DEFAULT_TOL):
    """``op`` is ``"sum"`` or ``"intersect"``."""
    if u.ambient_dim != v.ambient_dim:
        raise ValueError("subspaces live in different ambient spaces")
    n = u.ambient_dim
    if op == "sum":
        return Subspace(_range_basis(np.hstack([u.orthonormal(), v.orthonormal()]), tol), tol)
    if op == "intersect":
        if u.dim == 0 or v.dim == 0:
            return Subspace.zero(n)
        uo, vo = u.orthonormal(), v.orthonormal()
        coeffs = null_space(np.hstack([uo, -vo]), tol)
        if coeffs.shape[1] == 0:
            return Subspace.zero(n)
        return Subspace(_range_basis(uo @ coeffs[: u.dim], tol), tol)
    raise ValueError(f"unknown subspace operation {op!r}")


def intersect(*spaces, tol=DEFAULT_TOL):
    out = spaces[0]
    for s in spaces[1:]:
        out = subspace_combine("intersect", out, s, tol)
    return out


def span_sum(*spaces, tol=DEFAULT_TOL):
    out = spaces[0]
    for s in spaces[1:]:
        out = subspace_combine("sum", out, s, tol)
    return out


def restricted_gram(omega, u):
    """Gram matrix ``G[i, j] = omega(b_i, b_j)`` on the basis of ``u``, exactly skew."""
    omega = _as_matrix(omega)
    b = u.basis
    g = b.T @ omega @ b
    return 0.5 * (g - g.T)


def gram_rank(omega, u, tol=DEFAULT_TOL):
    """Rank of the form restricted to ``u``, measured on an orthonormal basis."""
    if u.dim == 0:
        return 0
    q = u.orthonormal()
    g = q.T @ _as_matrix(omega) @ q
    # relative to the form itself so a restriction that vanishes reads as rank 0
    scale = np.linalg.norm(omega, 2)
    if scale == 0.0:
        return 0
    sv = np.linalg.svd(g, compute_uv=False)
    return int(np.count_nonzero(sv > tol.rank_tol * scale))


def symmetrize_conjugates(values, tol=DEFAULT_TOL):
    """Make a nearly conjugate-closed list exactly conjugate-closed.

    Values whose imaginary part is within ``eig_pair_tol`` of zero become
    real. Every other value is matched with the nearest remaining
    candidate for its conjugate, and the pair is replaced by the average
    and its exact conjugate. Output is sorted by (real, imag).
    """
    vals = [complex(v) for v in values]
    out = []
    pending = []
    for v in vals:
        if abs(v.imag) <= tol.eig_pair_tol * (1.0 + abs(v)):
            out.append(complex(v.real, 0.0))
        else:
            pending.append(v)
    upper = sorted((v for v in pending if v.imag > 0), key=lambda z: (z.real, z.imag))
    lower = [v for v in pending if v.imag < 0]
    if len(upper) != len(lower):
        raise NoConvergence("spectrum of a real matrix is not conjugate-closed")
    for v in upper:
        j = min(range(len(lower)), key=lambda i: abs(lower[i] - v.conjugate()))
        w = lower.pop(j)
        if abs(w - v.conjugate()) > tol.eig_pair_tol * (1.0 + abs(v)):
            raise NoConvergence(f"no conjugate partner for eigenvalue {v}")
        mean = 0.5 * (v + w.conjugate())
        out.append(mean)
        out.append(mean.conjugate())
    out.sort(key=lambda z: (z.real, z.imag))
    return np.array(out, dtype=complex)


def eigen_multiset(m, tol=DEFAULT_TOL):
    """All eigenvalues of a real square matrix, exactly conjugate-closed."""
    m = _as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError("eigenvalues need a square matrix")
    if m.shape[0] == 0:
        return np.zeros(0, dtype=complex)
    try:
        vals = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    if not np.all(np.isfinite(vals)):
        raise NoConvergence("eigensolver returned non-finite values")
    return symmetrize_conjugates(vals, tol)


def multiset_equal(a, b, tol=DEFAULT_TOL, pair_tol=None):
    """True iff a perfect matching exists with relative distance within tolerance.

    The radius for a candidate pair is ``pair_tol * (1 + max(|x|, |y|))``,
    which keeps the relation symmetric in its arguments.
    """
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        return False
    if a.size == 0:
        return True
    eps = tol.eig_pair_tol if pair_tol is None else pair_tol
    dist = np.abs(a[:, None] - b[None, :])
    radius = eps * (1.0 + np.maximum(np.abs(a)[:, None], np.abs(b)[None, :]))
    adj = csr_matrix((dist <= radius).astype(np.int8))
    match = maximum_bipartite_matching(adj, perm_type="column")
    return bool(np.all(match >= 0))


def multiset_distance(a, b):
    """Smallest possible largest relative gap over all perfect matchings.

    Used for residual reporting; ``inf`` when the sizes differ.
    """
    from scipy.optimize import linear_sum_assignment

    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        return float("inf")
    if a.size == 0:
        return 0.0
    rel = np.abs(a[:, None] - b[None, :]) / (1.0 + np.maximum(np.abs(a)[:, None], np.abs(b)[None, :]))
    # bottleneck assignment: binary search over the sorted candidate gaps
    cand = np.unique(rel)
    lo, hi = 0, cand.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        cost = np.where(rel <= cand[mid], 0.0, 1.0)
        r, c = linear_sum_assignment(cost)
        if cost[r, c].sum() == 0:
            hi = mid
        else:
            lo = mid + 1
    return float(cand[lo])
