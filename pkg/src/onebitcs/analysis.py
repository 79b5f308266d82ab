"""Sampled estimates of the embedding properties behind the recovery guarantees.

Every estimator here replaces a supremum over a continuous set by a maximum
over a finite sample, so the reported constants are lower bounds on the true
ones.  Inputs follow the conventions of ``measure``: ``Aprime`` is the
renormalised matrix returned by ``measure.renormalize`` (by default
``sqrt(pi/2)/m * A``, so that ``||A'f||_1`` concentrates at ``||f||_2``).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .frames import TightFrame
from .measure import sgn
from .signals import _sparse_coefficients, is_effectively_sparse

__all__ = [
    "PropertyEstimate",
    "sample_synthesis_sphere",
    "sample_analysis_sphere",
    "spep_pair_deviation",
    "spep_deviation",
    "classical_spep_deviation",
    "rip1_ratios",
    "tes_check",
    "gaussian_width_mc",
    "lifting_inequality_sides",
    "lifting_inequality_check",
    "PERTURBATION_FRACTIONS",
]

PERTURBATION_FRACTIONS = (0.25, 0.5, 1.0)


@dataclass
class PropertyEstimate:
    prop: str
    params: dict
    samples: int
    statistics: dict
    seed: object = None
    values: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.prop not in ("SPEP", "RIP1", "TES", "width"):
            raise ValueError(f"unknown property {self.prop!r}")
        if self.samples < 1:
            raise ValueError("an estimate needs at least one sample")
        for k, v in self.statistics.items():
            if not np.isfinite(v):
                raise ValueError(f"statistic {k} is not finite")

    def rows(self):
        """Flat ``(name, value)`` pairs for CSV output."""
        return sorted(self.statistics.items())


def _dict_matrix(D):
    return D.entries if isinstance(D, TightFrame) else np.asarray(D, dtype=float)


def _unit_synthesis(rng, Dm, s):
    """A unit vector ``D x / ||D x||`` with ``x`` s-sparse Gaussian, plus ``x``."""
    N = Dm.shape[1]
    while True:
        x = _sparse_coefficients(rng, N, s)
        f = Dm @ x
        nf = np.linalg.norm(f)
        if nf > 1e-12 * np.linalg.norm(x):
            return f / nf, x / nf


def sample_synthesis_sphere(D, s: int, count: int, seed) -> np.ndarray:
    """``count`` points of ``D(Sigma_s) ∩ S^{n-1}``, one per row."""
    Dm = _dict_matrix(D)
    rng = np.random.default_rng(seed)
    return np.array([_unit_synthesis(rng, Dm, s)[0] for _ in range(count)])


def sample_analysis_sphere(D, s: float, count: int, seed, max_attempts: int = 100_000) -> np.ndarray:
    """``count`` unit vectors with ``||D^T f||_1 <= sqrt(s) ||D^T f||_2``.

    Rejection over synthesis-sparse candidates whose inner sparsity cycles
    ``floor(s), ..., 1``.
    """
    Dm = _dict_matrix(D)
    rng = np.random.default_rng(seed)
    top = max(1, min(int(np.floor(s)), Dm.shape[1]))
    out = []
    for attempt in range(max_attempts):
        f, _ = _unit_synthesis(rng, Dm, top - attempt % top)
        if is_effectively_sparse(Dm.T @ f, s):
            out.append(f)
            if len(out) == count:
                return np.array(out)
    raise RuntimeError(f"only {len(out)} of {count} analysis-sparse points in {max_attempts} attempts")


def spep_pair_deviation(Aprime, f, g) -> float:
    """``|<A'f, sgn(A'g)> - <f, g>|``."""
    Aprime = np.asarray(Aprime, dtype=float)
    return float(abs((Aprime @ f) @ sgn(Aprime @ g) - f @ g))


def _summary(values):
    return {
        "max": float(np.max(values)),
        "median": float(np.median(values)),
        "mean": float(np.mean(values)),
    }


def spep_deviation(Aprime, D, s: int, pairs: int, seed) -> PropertyEstimate:
    """Max and median SPEP deviation over random pairs of unit synthesis-sparse vectors."""
    Aprime = np.asarray(Aprime, dtype=float)
    Dm = _dict_matrix(D)
    rng = np.random.default_rng(seed)
    dev = np.empty(pairs)
    for i in range(pairs):
        f, _ = _unit_synthesis(rng, Dm, s)
        g, _ = _unit_synthesis(rng, Dm, s)
        dev[i] = spep_pair_deviation(Aprime, f, g)
    params = {"s": s, "m": Aprime.shape[0], "n": Dm.shape[0], "N": Dm.shape[1]}
    return PropertyEstimate("SPEP", params, pairs, _summary(dev), seed, dev)


def classical_spep_deviation(Aprime, pairs: int, seed) -> PropertyEstimate:
    """SPEP deviation over uniformly random pairs on the whole sphere."""
    Aprime = np.asarray(Aprime, dtype=float)
    m, n = Aprime.shape
    rng = np.random.default_rng(seed)
    dev = np.empty(pairs)
    for i in range(pairs):
        f = rng.standard_normal(n)
        f /= np.linalg.norm(f)
        g = rng.standard_normal(n)
        g /= np.linalg.norm(g)
        dev[i] = spep_pair_deviation(Aprime, f, g)
    return PropertyEstimate("SPEP", {"s": n, "m": m, "n": n, "N": n}, pairs, _summary(dev), seed, dev)


def rip1_ratios(Aprime, D, s: int, trials: int, seed) -> PropertyEstimate:
    """Range of ``||A'f||_1 / ||f||_2`` over sampled ``f`` in ``D(Sigma_s)``.

    ``delta_hat = max(1 - min, max - 1)``.
    """
    Aprime = np.asarray(Aprime, dtype=float)
    Dm = _dict_matrix(D)
    rng = np.random.default_rng(seed)
    ratios = np.empty(trials)
    for i in range(trials):
        f, _ = _unit_synthesis(rng, Dm, s)
        ratios[i] = np.abs(Aprime @ f).sum() / np.linalg.norm(f)
    lo, hi = float(ratios.min()), float(ratios.max())
    stats = {"min": lo, "max": hi, "median": float(np.median(ratios)), "delta_hat": max(1 - lo, hi - 1)}
    params = {"s": s, "m": Aprime.shape[0], "n": Dm.shape[0], "N": Dm.shape[1]}
    return PropertyEstimate("RIP1", params, trials, stats, seed, ratios)


def _perturb(rng, Dm, f, x, rho, s, sphere):
    # perturb along a direction built on the same coefficient support
    support = np.flatnonzero(x)
    for _ in range(100):
        c = np.zeros(Dm.shape[1])
        c[support] = rng.standard_normal(support.size)
        u = Dm @ c
        nu = np.linalg.norm(u)
        if nu == 0:
            continue
        g = f + rho * u / nu
        g /= np.linalg.norm(g)
        if sphere == "synthesis" or is_effectively_sparse(Dm.T @ g, s):
            return g
    return None


def _sphere_point(rng, Dm, s, sphere):
    if sphere == "synthesis":
        return _unit_synthesis(rng, Dm, s)
    top = max(1, min(int(np.floor(s)), Dm.shape[1]))
    for attempt in range(100_000):
        f, x = _unit_synthesis(rng, Dm, top - attempt % top)
        if is_effectively_sparse(Dm.T @ f, s):
            return f, x
    raise RuntimeError("no effectively analysis-sparse point found; dictionary unsuitable")


def tes_check(A, D, s, eps: float, pairs: int, seed, sphere: str = "analysis") -> PropertyEstimate:
    """Count pairs with equal sign patterns ``sgn(Af) = sgn(Ag)`` yet ``||f - g|| > eps``.

    Even-numbered pairs are independent draws; odd-numbered ones perturb
    ``f`` by ``rho`` in ``{eps/4, eps/2, eps}`` (cycling) on the same support,
    so that sign collisions actually occur.  Perturbed points that leave the
    analysis-sparse sphere are redrawn.
    """
    if sphere not in ("analysis", "synthesis"):
        raise ValueError("sphere must be 'analysis' or 'synthesis'")
    A = np.asarray(A, dtype=float)
    Dm = _dict_matrix(D)
    rng = np.random.default_rng(seed)
    violations = collisions = used = 0
    dist = []
    for i in range(pairs):
        f, x = _sphere_point(rng, Dm, s, sphere)
        if i % 2 == 0:
            g, _ = _sphere_point(rng, Dm, s, sphere)
        else:
            rho = eps * PERTURBATION_FRACTIONS[(i // 2) % len(PERTURBATION_FRACTIONS)]
            g = _perturb(rng, Dm, f, x, rho, s, sphere)
            if g is None:
                continue
        used += 1
        if np.array_equal(sgn(A @ f), sgn(A @ g)):
            collisions += 1
            d = np.linalg.norm(f - g)
            dist.append(d)
            if d > eps:
                violations += 1
    stats = {
        "violation_count": violations,
        "collisions": collisions,
        "max_collision_distance": float(max(dist)) if dist else 0.0,
    }
    params = {"s": s, "eps": eps, "m": A.shape[0], "n": Dm.shape[0], "N": Dm.shape[1], "sphere": sphere}
    return PropertyEstimate("TES", params, max(used, 1), stats, seed)


def gaussian_width_mc(sampler, ambient_sample_size: int, gaussian_draws: int, seed) -> PropertyEstimate:
    """Monte Carlo estimate of ``w(K) = E sup_{f in K} <f, g>``.

    ``sampler(rng, count)`` returns ``count`` points of ``K`` as rows.  The
    supremum is taken over that finite sample, so the estimate is biased
    low: a lower-bound estimator of the true width.
    """
    if ambient_sample_size < 1:
        raise ValueError("empty sample of K")
    ss = np.random.SeedSequence(seed)
    k_stream, g_stream = ss.spawn(2)
    K = np.atleast_2d(np.asarray(sampler(np.random.default_rng(k_stream), ambient_sample_size), dtype=float))
    if K.shape[0] == 0:
        raise ValueError("empty sample of K")
    G = np.random.default_rng(g_stream).standard_normal((gaussian_draws, K.shape[1]))
    sups = (G @ K.T).max(axis=1)
    stats = {
        "mean": float(sups.mean()),
        "stderr": float(sups.std(ddof=1) / np.sqrt(gaussian_draws)) if gaussian_draws > 1 else 0.0,
    }
    params = {"n": K.shape[1], "sample_size": K.shape[0]}
    return PropertyEstimate("width", params, gaussian_draws, stats, seed, sups)


def lifting_inequality_sides(f_tilde, g_tilde) -> tuple[float, float]:
    """Both sides of the lifting inequality for vectors with nonzero last entries.

    ``|| f[:n]/f[n] - g[:n]/g[n] ||`` versus
    ``||f|| ||g|| / (|f[n]| |g[n]|) * || f/||f|| - g/||g|| ||``.
    """
    f = np.asarray(f_tilde, dtype=float)
    g = np.asarray(g_tilde, dtype=float)
    if f.shape != g.shape or f.ndim != 1 or f.size < 2:
        raise ValueError("need two vectors of equal length >= 2")
    if f[-1] == 0 or g[-1] == 0:
        raise ValueError("last coordinates must be nonzero")
    nf, ng = np.linalg.norm(f), np.linalg.norm(g)
    lhs = np.linalg.norm(f[:-1] / f[-1] - g[:-1] / g[-1])
    rhs = nf * ng / (abs(f[-1]) * abs(g[-1])) * np.linalg.norm(f / nf - g / ng)
    return float(lhs), float(rhs)


def lifting_inequality_check(f_tilde, g_tilde) -> bool:
    """``LHS <= RHS`` up to a slack of ``1e-12`` relative to ``max(1, RHS)``."""
    lhs, rhs = lifting_inequality_sides(f_tilde, g_tilde)
    return lhs <= rhs + 1e-12 * max(1.0, rhs)
