"""Small seeded run of the randomized property checks, for ``doublepoint selftest``."""
import dataclasses

import numpy as np

from .errors import DoublePointError
from .ingest import linear_germ_pair
from .invariants import (analyze_linear, c_normalize, congruence_residual, decide_equivalence,
                         extract_abc, linear_equivalence_witness, pair_eigenvalues,
                         reduced_from_abc, transfer_operators)
from .linalg import DEFAULT_TOL, eigen_multiset, multiset_distance, multiset_equal
from .normal_forms import NormalFormSpec, roundtrip_verify
from .randgen import (make_rng, random_congruent_pairs, random_linear_tuple, random_skew_pair,
                      random_symplectic)


class _Tally:
    def __init__(self):
        self.cases = 0
        self.failed = 0
        self.worst = 0.0
        self.notes = []

    def record(self, ok, residual=0.0, note=None):
        self.cases += 1
        if not ok:
            self.failed += 1
            if note and len(self.notes) < 3:
                self.notes.append(note)
        if residual is not None and np.isfinite(residual):
            self.worst = max(self.worst, float(residual))

    def to_doc(self):
        return {"cases": self.cases, "failed": self.failed, "max_residual": self.worst,
                "notes": self.notes}


def _invariance(rng, count, tol, tallies):
    inv, route, spec = tallies["invariance"], tallies["two_routes"], tallies["t1_t2"]
    for _ in range(count):
        n = int(rng.integers(1, 5))
        k = int(rng.integers(1, 2 * n))
        lt = random_linear_tuple(n, k, rng=rng, tol=tol)
        other = lt.transformed(random_symplectic(lt.mu, rng))
        _, rl, c1 = analyze_linear(lt, tol)
        _, _, c2 = analyze_linear(other, tol)
        if c1 is None or c2 is None:
            inv.record(False, note=f"n={n} k={k}: transformed tuple lost genericity")
            continue
        inv.record(multiset_equal(c1.collapsed, c2.collapsed, tol, pair_tol=1e-7),
                   multiset_distance(c1.collapsed, c2.collapsed), f"n={n} k={k}")
        route.record(max(c1.route_gap, c2.route_gap) <= 1e-8, max(c1.route_gap, c2.route_gap))
        if not rl.is_zero:
            t1, t2 = transfer_operators(rl, tol)
            gap = multiset_distance(eigen_multiset(t1, tol), eigen_multiset(t2, tol))
            spec.record(gap <= 1e-8, gap)


def _pairing(rng, count, tol, tally):
    strict = dataclasses.replace(tol, eig_pair_tol=1e-7)
    for _ in range(count):
        s = int(rng.integers(1, 7))
        a, b = random_skew_pair(s, rng)
        try:
            pair_eigenvalues(eigen_multiset(np.linalg.solve(a, b), tol), strict)
            tally.record(True)
        except DoublePointError as exc:
            tally.record(False, note=str(exc))


def _zero_tuples(rng, count, tol, tally):
    for i in range(count):
        n = int(rng.integers(1, 5))
        k = 1 if i % 2 == 0 else 2 * n - 1
        gps = [linear_germ_pair(lt.mu, lt.u1, lt.u2, tol=tol)
               for lt in (random_linear_tuple(n, k, rng=rng, tol=tol) for _ in range(2))]
        v = decide_equivalence(*gps, tol=tol)
        tally.record(v.status == "Equivalent", note=f"n={n} k={k}: {v.status} ({v.reason})")


def _witness(rng, count, tol, tally):
    for _ in range(count):
        s = int(rng.integers(1, 5))
        (a1, b1), (a2, b2), _ = random_congruent_pairs(s, rng)
        rl1 = reduced_from_abc(a1, b1, np.eye(2 * s))
        rl2 = reduced_from_abc(a2, b2, np.eye(2 * s))
        r = linear_equivalence_witness(rl1, rl2, tol)
        if r is None:
            tally.record(False, note=f"s={s}: no witness")
            continue
        A1, B1, _ = extract_abc(c_normalize(rl1, tol), tol)
        A2, B2, _ = extract_abc(c_normalize(rl2, tol), tol)
        res = max(congruence_residual(r, A1, A2), congruence_residual(r, B1, B2))
        tally.record(res < 1e-6, res, f"s={s}: residual {res:.3g}")


def _normal_forms(rng, count, tol, tally):
    for _ in range(count):
        n = int(rng.integers(2, 6))
        k = int(rng.integers(2, n + 1))
        s = k // 2
        while True:
            lams = np.sort(rng.uniform(0.1, 10.0, s))
            if s < 2 or np.min(np.diff(lams)) > 1e-3:
                break
        spec = NormalFormSpec(n, k, lambdas=tuple(float(x) for x in lams))
        try:
            rep = roundtrip_verify(spec, tol)
            tally.record(True, rep["residuals"]["lambdas"])
        except DoublePointError as exc:
            tally.record(False, note=f"n={n} k={k}: {exc}")


def run_selftest(seed, tol=DEFAULT_TOL, scale=1):
    """Run every property on a fixed seed; returns a JSON-ready document."""
    rng = make_rng(seed)
    names = ("invariance", "two_routes", "t1_t2", "pairing", "zero_tuples", "witness", "normal_forms")
    tallies = {name: _Tally() for name in names}
    _invariance(rng, 40 * scale, tol, tallies)
    _pairing(rng, 100 * scale, tol, tallies["pairing"])
    _zero_tuples(rng, 10 * scale, tol, tallies["zero_tuples"])
    _witness(rng, 20 * scale, tol, tallies["witness"])
    _normal_forms(rng, 20 * scale, tol, tallies["normal_forms"])
    props = {name: t.to_doc() for name, t in tallies.items()}
    ok = all(t.failed == 0 for t in tallies.values())
    return {"seed": seed, "status": "pass" if ok else "fail", "properties": props}
