"""Acceptance criteria, one PASS/FAIL line each.

Run under pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``. Every oracle here is computed
independently of the code under test where that is possible: expected
multisets come from the generating spec, matchings are brute-forced and the
moduli table is written out by hand.
"""
import dataclasses
import itertools
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from acceptance_log import report  # noqa: E402
from doublepoint.errors import InvalidSpec  # noqa: E402
from doublepoint.hamiltonians import check_g7_at_base, sample_hamiltonians  # noqa: E402
from doublepoint.ingest import linear_germ_pair  # noqa: E402
from doublepoint.invariants import (INFINITY, analyze_linear, c_normalize, congruence_residual,  # noqa: E402
                                    decide_equivalence, extract_abc, linear_equivalence_witness,
                                    moduli_count, pair_eigenvalues, reduce, reduced_from_abc,
                                    transfer_operators)
from doublepoint.linalg import DEFAULT_TOL, eigen_multiset, multiset_equal  # noqa: E402
from doublepoint.normal_forms import NormalFormSpec, roundtrip_verify, synthesize  # noqa: E402
from doublepoint.randgen import (make_rng, random_congruent_pairs, random_linear_tuple,  # noqa: E402
                                 random_skew_pair, random_symplectic)


def bottleneck(a, b):
    """Largest absolute gap under the best matching, by brute force."""
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    if a.size != b.size:
        return float("inf")
    if a.size == 0:
        return 0.0
    return min(max(abs(x - y) for x, y in zip(a, perm)) for perm in itertools.permutations(b))


def collapse(vals):
    """Halve a doubled spectrum: sort, then keep every other entry."""
    vals = sorted(np.asarray(vals, dtype=complex), key=lambda z: (round(z.real, 6), z.imag))
    return np.array(vals[::2])


# ------------------------------------------------------------------ 1, 2

def criterion_1():
    rng = make_rng(101)
    worst, bad = 0.0, 0
    t0 = time.perf_counter()
    for _ in range(200):
        n = int(rng.integers(2, 6))
        k = int(rng.integers(2, n + 1))
        while True:
            lams = rng.uniform(0.1, 10.0, k // 2)
            if lams.size < 2 or np.min(np.diff(np.sort(lams))) > 1e-3:
                break
        rep = roundtrip_verify(NormalFormSpec(n, k, lambdas=tuple(float(x) for x in lams)))
        got = [complex(*z) for z in rep["recovered"]]
        gap = bottleneck(lams, got)
        worst = max(worst, gap)
        bad += not gap < 1e-8
    elapsed = time.perf_counter() - t0
    ok = bad == 0 and elapsed < 10
    return report(1, ok, f"200 real specs, max residual {worst:.2e} (< 1e-8), {elapsed:.1f} s (< 10 s)")


def criterion_2():
    rng = make_rng(202)
    worst, bad = 0.0, 0
    for _ in range(50):
        n = int(rng.integers(4, 7))
        k = int(rng.integers(4, n + 1))
        s = k // 2
        re, im = rng.uniform(-5, 5), rng.uniform(0.1, 5)
        lams = [complex(re, im), complex(re, -im)] + [float(x) for x in rng.uniform(0.1, 10, s - 2)]
        rep = roundtrip_verify(NormalFormSpec(n, k, lambdas=tuple(lams)))
        gap = bottleneck(lams, [complex(*z) for z in rep["recovered"]])
        worst = max(worst, gap)
        bad += not gap < 1e-8
    return report(2, bad == 0, f"50 specs with a conjugate pair, max residual {worst:.2e} (< 1e-8)")


# ------------------------------------------------------------ 3, 5, 6

_SHARED = {}


def _invariance_run():
    """500 generic tuples and their symplectic images; shared by 3, 5 and 6."""
    if _SHARED:
        return _SHARED
    rng = make_rng(303)
    out = {"unequal": 0, "bad": 0, "route": 0.0, "t1t2": 0.0, "notes": []}
    t0 = time.perf_counter()
    for _ in range(500):
        n = int(rng.integers(1, 7))
        k1 = int(rng.integers(1, 2 * n))
        k2 = k1
        if rng.random() < 0.3 and k1 + 2 <= 2 * n - 1:
            k2 = int(rng.choice(np.arange(k1 + 2, 2 * n, 2)))
            out["unequal"] += 1
        lt = random_linear_tuple(n, k1, k2, rng=rng)
        image = lt.transformed(random_symplectic(lt.mu, rng))
        _, rl, c1 = analyze_linear(lt)
        _, rl2, c2 = analyze_linear(image)
        if c2 is None or not multiset_equal(c1.collapsed, c2.collapsed, pair_tol=1e-7):
            out["bad"] += 1
            out["notes"].append(f"n={n} k=({k1},{k2})")
            continue
        for r in (rl, rl2):
            if r.is_zero:
                continue
            t1, t2 = transfer_operators(r)
            A, B, _ = extract_abc(c_normalize(r))
            e1 = eigen_multiset(t1)
            out["route"] = max(out["route"], bottleneck(collapse(e1), collapse(eigen_multiset(0.25 * np.linalg.solve(A, B)))))
            out["t1t2"] = max(out["t1t2"], bottleneck(collapse(e1), collapse(eigen_multiset(t2))))
    out["elapsed"] = time.perf_counter() - t0
    _SHARED.update(out)
    return _SHARED


def criterion_3():
    r = _invariance_run()
    ok = r["bad"] == 0 and r["elapsed"] < 30
    return report(3, ok, f"500 tuples ({r['unequal']} with k1 < k2), {r['bad']} mismatches at 1e-7, "
                         f"{r['elapsed']:.1f} s (< 30 s)")


def criterion_5():
    r = _invariance_run()
    return report(5, r["route"] <= 1e-8, f"transfer operator vs A^-1 B / 4, max gap {r['route']:.2e} (<= 1e-8)")


def criterion_6():
    r = _invariance_run()
    return report(6, r["t1t2"] <= 1e-8, f"eig(T1) vs eig(T2), max gap {r['t1t2']:.2e} (<= 1e-8)")


# ------------------------------------------------------------------- 4

def criterion_4():
    rng = make_rng(404)
    strict = dataclasses.replace(DEFAULT_TOL, eig_pair_tol=1e-7)
    bad = 0
    for _ in range(1000):
        s = int(rng.integers(1, 7))
        a, b = random_skew_pair(s, rng)
        try:
            if pair_eigenvalues(eigen_multiset(np.linalg.solve(a, b)), strict).size != s:
                bad += 1
        except Exception:
            bad += 1
    return report(4, bad == 0, f"1000 skew pairs up to 12x12, {bad} unpaired spectra at 1e-7 relative")


# ------------------------------------------------------------------- 7

def criterion_7():
    rng = make_rng(707)
    bad = []
    for k_of in (lambda n: 1, lambda n: 2 * n - 1):
        for _ in range(100):
            n = int(rng.integers(2, 7))
            k = k_of(n)
            lts = [random_linear_tuple(n, k, rng=rng) for _ in range(2)]
            if any(not reduce(lt).is_zero for lt in lts):
                bad.append(f"n={n} k={k}: nonzero reduction")
                continue
            v = decide_equivalence(*(linear_germ_pair(lt.mu, lt.u1, lt.u2) for lt in lts))
            if v.status != "Equivalent":
                bad.append(f"n={n} k={k}: {v.status}")
    return report(7, not bad, f"200 pairs (k = 1 and k = 2n-1), {len(bad)} not reduced to s=0 or not Equivalent")


# ------------------------------------------------------------------- 8

def _random_quadratic(rng):
    """Coefficients of c0 + a u + b v + c u^2 + d u v + e v^2."""
    return np.concatenate([[rng.uniform(0.5, 5.0)], rng.uniform(-1, 1, 5)])


def _poly_text(c):
    terms = ["1", "u1", "v1", "u1^2", "u1*v1", "v1^2"]
    return " + ".join(f"({float(x)!r})*{t}" for x, t in zip(c, terms))


def _poly_value(c, u, v):
    return c[0] + c[1] * u + c[2] * v + c[3] * u * u + c[4] * u * v + c[5] * v * v


def criterion_8():
    rng = make_rng(808)
    grid = np.linspace(-0.2, 0.2, 5)
    uu, vv = np.meshgrid(grid, grid, indexing="ij")
    worst, bad, redraws = 0.0, 0, 0
    t0 = time.perf_counter()
    for _ in range(20):
        while True:
            cs = [_random_quadratic(rng) for _ in range(2)]
            vals = [_poly_value(c, uu, vv) for c in cs]
            # H = 1 makes the normal-form symplectic form degenerate
            if all(np.min(np.abs(h - 1)) > 0.05 and np.min(np.abs(h)) > 0.05 for h in vals):
                break
            redraws += 1
        gp = synthesize(NormalFormSpec(5, 6, hamiltonians=tuple(_poly_text(c) for c in cs)))
        fld = sample_hamiltonians(gp)
        for (u, v), got in zip(fld.params, fld.values):
            gap = bottleneck([_poly_value(c, u, v) for c in cs], got)
            worst = max(worst, gap)
            bad += not gap < 1e-7
    elapsed = time.perf_counter() - t0
    ok = bad == 0 and elapsed < 20
    return report(8, ok, f"20 quadratic pairs on the 5x5 grid ({redraws} redraws near H = 1), "
                         f"max residual {worst:.2e} (< 1e-7), {elapsed:.1f} s (< 20 s)")


# ------------------------------------------------------------------- 9

def _form_determinant(h):
    """det of the (n=3, k=4) normal-form Gram at the base point when H(0) = h."""
    mu = np.zeros((6, 6))
    for i, j, w in [(0, 1, 1.0), (2, 3, 1.0 / h), (0, 2, 1.0), (1, 3, 1.0), (4, 5, 1.0)]:
        mu[i, j], mu[j, i] = w, -w
    return np.linalg.det(mu)


def criterion_9():
    """As stated: H = 1 + u1 passes G7, H = 1 fails, lambda 1 vs 1.5 NotEquivalent."""
    problems = []
    for h in ("1 + u1", "1"):
        try:
            synthesize(NormalFormSpec(3, 4, hamiltonians=(h,)))
        except InvalidSpec as exc:
            problems.append(f"H = {h}: {exc}")
    det = _form_determinant(1.0)
    detail = (f"not attainable as stated; H(0) = 1 gives det(omega) = {det:.1e}, so the tuples "
              f"with H = 1 + u1, H = 1 and lambda = 1 are not symplectic ({len(problems)} rejected); "
              f"see criterion 9b for the same checks at H(0) = 2")
    return report(9, not problems and det != 0, detail)


def criterion_9b():
    """Same discrimination with the base value moved off the degenerate value 1."""
    def tup(h):
        return synthesize(NormalFormSpec(3, 4, hamiltonians=(h,)))

    sloped = check_g7_at_base(tup("2 + u1"))["holds"]
    flat = check_g7_at_base(tup("2"))["holds"]
    same = decide_equivalence(tup("2 + u1"), tup("2 - 0.5*v1 + u1^2")).status
    diff = decide_equivalence(tup("2 + u1"), tup("1.5 + u1")).status
    ok = sloped and not flat and same == "Equivalent" and diff == "NotEquivalent"
    return report("9b", ok, f"supplementary, H(0) = 2: 2 + u1 G7={sloped}, constant 2 G7={flat}, "
                            f"lambda 2 vs 2 {same}, 2 vs 1.5 {diff}")


# ------------------------------------------------------------------ 10

def criterion_10():
    rng = make_rng(1010)
    worst, bad = 0.0, 0
    for _ in range(100):
        s = int(rng.integers(1, 5))
        (a1, b1), (a2, b2), _ = random_congruent_pairs(s, rng)
        r = linear_equivalence_witness(reduced_from_abc(a1, b1, np.eye(2 * s)),
                                       reduced_from_abc(a2, b2, np.eye(2 * s)))
        if r is None:
            bad += 1
            continue
        # C = I already, so the stored blocks are A and B up to the constant factors
        res = max(congruence_residual(r, a1, a2), congruence_residual(r, b1, b2))
        worst = max(worst, res)
        bad += not res < 1e-6
    return report(10, bad == 0, f"100 congruent pairs, max relative residual {worst:.2e} (< 1e-6)")


# ------------------------------------------------------------------ 11

def moduli_by_hand(k, n):
    if k == 2 * n - 1:
        return 0
    if k <= n:
        return k // 2
    if k in (2 * n - 3, 2 * n - 2):
        return 1
    return INFINITY


def criterion_11():
    cells = mismatches = 0
    for n in range(1, 9):
        for k in range(1, 2 * n):
            cells += 1
            mismatches += moduli_count(k, n) != moduli_by_hand(k, n)
    return report(11, mismatches == 0, f"{cells} cells for 2 <= 2n <= 16, {mismatches} mismatches")


# ------------------------------------------------------------------ 12

def criterion_12():
    rng = make_rng(1212)
    bad = 0
    for _ in range(50):
        while True:
            n = int(rng.integers(2, 7))
            k1 = int(rng.integers(1, 2 * n - 2))
            choices = np.arange(k1 + 2, 2 * n, 2)
            if choices.size:
                break
        k2 = int(rng.choice(choices))
        rep, rl, _ = analyze_linear(random_linear_tuple(n, k1, k2, rng=rng))
        want = 4 * min(k1 // 2, (2 * n - k2) // 2)
        bad += rl.w.shape[1] != want or rep["G8"].measured != k2 - k1
    return report(12, bad == 0, f"50 tuples with k1 < k2, {bad} with wrong dim W or G8 rank")


# ------------------------------------------------------------------ 13

def criterion_13():
    cmd = [sys.executable, "-m", "doublepoint", "selftest", "--seed", "7"]
    runs = [subprocess.run(cmd, capture_output=True) for _ in range(2)]
    ok = all(r.returncode == 0 for r in runs) and runs[0].stdout == runs[1].stdout and runs[0].stdout
    return report(13, bool(ok), f"two processes, {len(runs[0].stdout)} bytes each, identical={runs[0].stdout == runs[1].stdout}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8, criterion_9, criterion_9b, criterion_10, criterion_11, criterion_12,
            criterion_13]
_UNATTAINABLE = {criterion_9}


@pytest.mark.parametrize("fn", [pytest.param(f, marks=pytest.mark.xfail(
    strict=True, reason="lambda = 1 and H(0) = 1 give a degenerate form")) if f in _UNATTAINABLE else f
    for f in CRITERIA], ids=lambda f: f.__name__)
def test_criterion(fn):
    assert fn()


if __name__ == "__main__":
    results = [fn() for fn in CRITERIA]
    sys.exit(0 if all(results) else 1)
