"""Characteristic Hamiltonians on the intersection manifold Q = S1 & S2.

Q is charted as a graph over ``d = k1 + k2 - 2n`` ambient coordinates
(the best-conditioned ones for the tangent space ``T_pQ``): the chart
point with parameters ``t`` is the point of Q whose pivot coordinates
equal ``p[pivots] + t``, found by Newton's method on the stacked
stratum equations.
"""
import csv
import io
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from .errors import DegenerateRestriction, DoublePointError, NewtonDivergence, WrongRegime
from .invariants import analyze_linear, linearize, s_value
from .linalg import DEFAULT_TOL, gram_rank, intersect, Subspace

DEFAULT_GRID = 5
DEFAULT_RADIUS = 0.2
NEWTON_TOL = 1e-12


@dataclass(frozen=True)
class ChartPoint:
    params: np.ndarray
    point: np.ndarray
    stratum_params: tuple
    unknowns: np.ndarray
    iterations: int
    residual: float


class QChart:
    """Newton-corrected graph chart of Q around the base point."""

    def __init__(self, gp, tol=DEFAULT_TOL):
        if gp.k1 + gp.k2 <= 2 * gp.n:
            raise WrongRegime("Q is a single point unless k1 + k2 > 2n")
        self.gp = gp
        self.tol = tol
        self.dim_q = gp.k1 + gp.k2 - 2 * gp.n
        self.anchor = gp.base_point.copy()
        lt = linearize(gp, tol=tol)
        tq = intersect(lt.u1, lt.u2, tol=tol)
        if tq.dim != self.dim_q:
            raise WrongRegime(f"T_pQ has dimension {tq.dim}, expected {self.dim_q} (G2 fails)")
        self.tangent_basis = tq.orthonormal()
        _, _, piv = scipy.linalg.qr(self.tangent_basis.T, pivoting=True)
        self.pivots = np.sort(piv[: self.dim_q])
        nparams = sum(st.dim for st in gp.strata if st.kind == "parametric")
        # parametric strata map 0 to the base point
        self._z0 = np.zeros(nparams) if nparams else self.anchor.copy()

    # unknown layout: parameters of each parametric stratum, or the point itself
    def _split(self, z):
        s1, s2 = self.gp.strata
        a = b = None
        i = 0
        if s1.kind == "parametric":
            a = z[i:i + s1.dim]
            i += s1.dim
        if s2.kind == "parametric":
            b = z[i:i + s2.dim]
            i += s2.dim
        return a, b

    def _system(self, z, t):
        """Residual, Jacobian, point and d(point)/dz at unknowns ``z``."""
        s1, s2 = self.gp.strata
        nz = z.size
        a, b = self._split(z)
        eqs, jac = [], []
        if a is not None:
            q, dq = s1.value(a), np.hstack([s1.jacobian(a), np.zeros((2 * self.gp.n, nz - a.size))])
        elif b is not None:
            q, dq = s2.value(b), np.hstack([np.zeros((2 * self.gp.n, nz - b.size)), s2.jacobian(b)])
        else:
            q, dq = z, np.eye(nz)
        if a is not None and b is not None:
            eqs.append(q - s2.value(b))
            jac.append(np.hstack([s1.jacobian(a), -s2.jacobian(b)]))
        for st in (s1, s2):
            if st.kind == "implicit":
                eqs.append(st.value(q))
                jac.append(st.jacobian(q) @ dq)
        eqs.append(q[self.pivots] - self.anchor[self.pivots] - t)
        jac.append(dq[self.pivots])
        return np.concatenate(eqs), np.vstack(jac), q, dq

    def solve(self, t, guess=None, max_iter=30):
        t = np.asarray(t, dtype=float)
        if guess is None:
            _, jac, _, _ = self._system(self._z0, np.zeros(self.dim_q))
            rhs = np.zeros(jac.shape[0])
            rhs[-self.dim_q:] = t
            z = self._z0 + np.linalg.solve(jac, rhs)
        else:
            z = np.asarray(guess, dtype=float).copy()
        for it in range(max_iter + 1):
            res, jac, q, _ = self._system(z, t)
            err = float(np.max(np.abs(res), initial=0.0))
            if err <= NEWTON_TOL * (1.0 + float(np.max(np.abs(q)))):
                a, b = self._split(z)
                return ChartPoint(t, q, (a, b), z, it, err)
            if not np.all(np.isfinite(res)):
                break
            try:
                z = z - np.linalg.solve(jac, res)
            except np.linalg.LinAlgError:
                break
        raise NewtonDivergence(f"Newton did not converge at chart parameters {t.tolist()}")

    def tangent(self, cp):
        """Columns d(point)/dt at a solved chart point."""
        _, jac, _, dq = self._system(cp.unknowns, cp.params)
        rhs = np.zeros((jac.shape[0], self.dim_q))
        rhs[-self.dim_q:] = np.eye(self.dim_q)
        return dq @ np.linalg.solve(jac, rhs)


def intersection_chart(gp, tol=None):
    return QChart(gp, gp.tol if tol is None else tol)


def omega_q(gp, chart, params):
    """Gram matrix of the form restricted to Q in chart coordinates."""
    cp = chart.solve(params)
    d = chart.tangent(cp)
    mu = gp.omega.at(cp.point)
    g = d.T @ mu @ d
    g = 0.5 * (g - g.T)
    if gram_rank(mu, Subspace.span(d), chart.tol) != chart.dim_q:
        raise DegenerateRestriction("the form is degenerate on T_qQ")
    return g


@dataclass
class HamiltonianField:
    params: np.ndarray  # grid points in chart coordinates, one row each
    values: np.ndarray  # complex, (points, s); NaN for excluded points
    base_values: np.ndarray
    grid: dict
    excluded: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)

    @property
    def s(self):
        return self.base_values.size

    @property
    def step(self):
        m = self.grid["points_per_axis"]
        return 2.0 * self.grid["radius"] / (m - 1)

    def value_at(self, offset):
        """Branch values at the grid point ``center + offset`` (integer steps)."""
        m = self.grid["points_per_axis"]
        c = (m - 1) // 2
        idx = [c + o for o in offset]
        flat = np.ravel_multi_index(idx, (m,) * self.params.shape[1])
        return self.values[flat]

    def to_csv(self):
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        d = self.params.shape[1]
        header = [f"param{i + 1}" for i in range(d)]
        for j in range(self.s):
            header += [f"branch{j + 1}_re", f"branch{j + 1}_im"]
        w.writerow(header)
        for row, vals in zip(self.params, self.values):
            cells = [format(float(x), ".17g") for x in row]
            for v in vals:
                cells += [format(float(v.real), ".17g"), format(float(v.imag), ".17g")]
            w.writerow(cells)
        return out.getvalue()

    def to_json(self):
        return {
            "grid": dict(self.grid),
            "tolerances": dict(self.tolerances),
            "base_values": [[float(z.real), float(z.imag)] for z in self.base_values],
            "points": [
                {"params": [float(x) for x in row],
                 "branches": [[float(z.real), float(z.imag)] for z in vals]}
                for row, vals in zip(self.params, self.values)
            ],
            "excluded": [{"index": i, "reason": r} for i, r in self.excluded],
            "flags": list(self.flags),
        }


def _grid(dim_q, m, radius):
    axis = np.linspace(-radius, radius, m)
    return np.array(list(itertools.product(axis, repeat=dim_q)), dtype=float).reshape(-1, dim_q)


def _point_numbers(gp, chart, t, tol):
    try:
        cp = chart.solve(t)
        lt = linearize(gp, cp.point, params=cp.stratum_params, tol=tol)
        rep, _, cn = analyze_linear(lt, tol)
    except DoublePointError as exc:
        return None, f"{exc.code}: {exc}"
    if cn is None or not rep.holds():
        return None, "genericity fails: " + ", ".join(rep.failures())
    return cn.collapsed, ""


def sample_hamiltonians(gp, chart=None, points_per_axis=DEFAULT_GRID, radius=DEFAULT_RADIUS,
                        tol=None, workers=None):
    """Sample the characteristic numbers over an axis-aligned grid on Q.

    Branches are labelled by the order of the base-point values and
    continued outward by nearest-value assignment against the neighbour one
    step closer to the anchor. Collisions and jumps are flagged, not resolved.
    """
    tol = gp.tol if tol is None else tol
    if points_per_axis < 3 or points_per_axis % 2 == 0:
        raise ValueError("points_per_axis must be odd and at least 3")
    chart = intersection_chart(gp, tol) if chart is None else chart
    s = s_value(gp.n, gp.k1, gp.k2)
    rep, _, base = analyze_linear(linearize(gp, tol=tol), tol)
    if base is None or not rep.holds():
        raise WrongRegime("genericity fails at the base point: " + ", ".join(rep.failures()))
    base_values = base.collapsed
    d = chart.dim_q
    m = points_per_axis
    params = _grid(d, m, radius)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda t: _point_numbers(gp, chart, t, tol), params))
    else:
        results = [_point_numbers(gp, chart, t, tol) for t in params]

    shape = (m,) * d
    center = (m - 1) // 2
    values = np.full((len(params), s), np.nan + 0j, dtype=complex)
    excluded, flags = [], []
    idx_list = [np.unravel_index(i, shape) for i in range(len(params))]
    order = sorted(range(len(params)), key=lambda i: (max(abs(j - center) for j in idx_list[i]), i))
    for i in order:
        vals, reason = results[i]
        if vals is None:
            excluded.append((i, reason))
            continue
        idx = np.array(idx_list[i])
        if np.all(idx == center):
            ref = base_values
        else:
            step = np.sign(center - idx)
            ref = values[np.ravel_multi_index(tuple(idx + step), shape)]
            if np.any(np.isnan(ref)):
                ref = base_values
        cost = np.abs(np.subtract.outer(ref, vals))
        _, cols = linear_sum_assignment(cost)
        matched = vals[cols]
        values[i] = matched
        scale = 1.0 + np.max(np.abs(matched), initial=0.0)
        if s >= 2:
            gaps = np.abs(np.subtract.outer(matched, matched))[np.triu_indices(s, 1)]
            if np.min(gaps) <= tol.eig_pair_tol * scale:
                flags.append(f"BranchCrossing at point {i}: branches within {tol.eig_pair_tol:g}")
            ref_gap = np.min(np.abs(np.subtract.outer(ref, ref))[np.triu_indices(s, 1)])
            if np.max(np.abs(matched - ref)) > 0.5 * ref_gap:
                flags.append(f"ambiguous continuation at point {i}")
    grid = {"points_per_axis": m, "radius": float(radius), "dim": d,
            "pivots": [gp.coords[j] for j in chart.pivots]}
    tols = {"rank_tol": tol.rank_tol, "eig_pair_tol": tol.eig_pair_tol,
            "eig_distinct_tol": tol.eig_distinct_tol}
    return HamiltonianField(params, values, base_values, grid, excluded, flags, tols)


def sample_default(gp, tol=None):
    return sample_hamiltonians(gp, tol=tol)


def _g7_verdict(grad, h, tol):
    threshold = 100.0 * tol.eig_pair_tol / h
    norm = float(np.linalg.norm(grad))
    holds = bool(np.isfinite(norm) and norm > threshold)
    return {"holds": holds, "gradient": grad, "threshold": threshold}


def check_g7(fld, tol=DEFAULT_TOL):
    """Central-difference gradient of the single branch at the anchor."""
    if fld.s != 1:
        raise WrongRegime(f"G7 applies to one characteristic Hamiltonian, got {fld.s}")
    d = fld.params.shape[1]
    h = fld.step
    grad = np.zeros(d)
    for j in range(d):
        e = [0] * d
        e[j] = 1
        plus = fld.value_at(e)[0]
        e[j] = -1
        minus = fld.value_at(e)[0]
        grad[j] = (plus.real - minus.real) / (2.0 * h)
    return _g7_verdict(grad, h, tol)


def check_g7_at_base(gp, chart=None, tol=None, step=None):
    """G7 from the 2d axis neighbours alone; same step and threshold as the default grid."""
    tol = gp.tol if tol is None else tol
    if s_value(gp.n, gp.k1, gp.k2) != 1:
        raise WrongRegime("G7 applies to one characteristic Hamiltonian")
    chart = intersection_chart(gp, tol) if chart is None else chart
    h = 2.0 * DEFAULT_RADIUS / (DEFAULT_GRID - 1) if step is None else step
    d = chart.dim_q
    grad = np.zeros(d)
    for j in range(d):
        vals = []
        for sign in (1.0, -1.0):
            t = np.zeros(d)
            t[j] = sign * h
            v, reason = _point_numbers(gp, chart, t, tol)
            if v is None:
                raise WrongRegime(f"cannot evaluate H at {t.tolist()}: {reason}")
            vals.append(v[0].real)
        grad[j] = (vals[0] - vals[1]) / (2.0 * h)
    return _g7_verdict(grad, h, tol)
