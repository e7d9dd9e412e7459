"""Seeded random inputs for property checks: forms, symplectic maps, tuples, pairs."""
import numpy as np
import scipy.linalg

from .invariants import LinearTuple, _required, analyze_linear, s_value
from .linalg import DEFAULT_TOL, Subspace


def make_rng(seed):
    return np.random.default_rng(seed)


def random_skew(m, rng, scale=1.0):
    x = rng.standard_normal((m, m)) * scale
    return x - x.T


def random_nonsingular_skew(m, rng, min_sv=0.1):
    """Skew matrix of even size whose smallest singular value is at least ``min_sv``."""
    while True:
        a = random_skew(m, rng)
        if np.linalg.svd(a, compute_uv=False)[-1] >= min_sv:
            return a


def standard_form(n):
    return np.kron(np.array([[0.0, 1.0], [-1.0, 0.0]]), np.eye(n))


def random_form(n, rng, spread=0.3):
    """A well-conditioned symplectic form ``X^T J X`` with ``X`` near the identity."""
    x = np.eye(2 * n) + spread * rng.standard_normal((2 * n, 2 * n))
    mu = x.T @ standard_form(n) @ x
    return 0.5 * (mu - mu.T)


def random_symplectic(mu, rng, scale=0.5):
    """``expm(mu^-1 S)`` for a random symmetric ``S``; preserves ``mu``."""
    m = mu.shape[0]
    s = rng.standard_normal((m, m))
    s = 0.5 * (s + s.T)
    x = np.linalg.solve(mu, s)
    x *= scale / max(np.linalg.norm(x, 2), 1e-300)
    return scipy.linalg.expm(x)


def random_subspace(ambient, k, rng):
    return Subspace.span(rng.standard_normal((ambient, k)))


def random_linear_tuple(n, k1, k2=None, rng=None, mu=None, tol=DEFAULT_TOL, max_tries=100):
    """Random tuple passing every condition its classification rule needs."""
    k2 = k1 if k2 is None else k2
    rng = make_rng(0) if rng is None else rng
    _, required = _required(k1, k2, n, s_value(n, k1, k2))
    # G7 is a germ-level condition; the linear part cannot see it
    required = [g for g in required if not g.startswith("G7")]
    for _ in range(max_tries):
        form = random_form(n, rng) if mu is None else mu
        lt = LinearTuple(form, random_subspace(2 * n, k1, rng), random_subspace(2 * n, k2, rng))
        rep, rl, cn = analyze_linear(lt, tol)
        if rep.holds(required + ["reduction"]) and (rl is None or rl.is_zero or cn is not None):
            return lt
    raise RuntimeError(f"no generic tuple found for n={n}, k=({k1}, {k2}) in {max_tries} draws")


def random_skew_pair(s, rng, min_sv=0.1):
    """Nonsingular skew pair ``(A, B)`` of size ``2s``."""
    return random_nonsingular_skew(2 * s, rng, min_sv), random_nonsingular_skew(2 * s, rng, min_sv)


def random_congruent_pairs(s, rng, min_sv=0.1):
    """``(A1, B1)`` and ``(R^T A1 R, R^T B1 R)`` for a random well-conditioned ``R``."""
    a, b = random_skew_pair(s, rng, min_sv)
    r = np.eye(2 * s) + 0.5 * rng.standard_normal((2 * s, 2 * s))
    while np.linalg.cond(r) > 1e3:
        r = np.eye(2 * s) + 0.5 * rng.standard_normal((2 * s, 2 * s))
    return (a, b), (r.T @ a @ r, r.T @ b @ r), r
