"""Sparsity arithmetic and ground-truth signal generation."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .frames import TightFrame

__all__ = [
    "SparsityReport",
    "GroundTruth",
    "GenerationError",
    "hard_threshold",
    "effective_sparsity",
    "is_effectively_sparse",
    "gen_synthesis_sparse",
    "gen_analysis_sparse_effective",
    "direction_error",
]


class GenerationError(RuntimeError):
    """A sampler could not produce a signal of the requested class."""


@dataclass(frozen=True)
class SparsityReport:
    l0: int
    l1: float
    l2: float
    s_eff: float


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """A test signal ``f`` and, when known, coefficients ``x`` with ``f = D x``.

    ``kappa`` is measured: ``kappa * s`` bounds the effective sparsity of
    ``D^T f``.
    """

    f: np.ndarray
    x: Optional[np.ndarray]
    s: int
    kappa: float
    norm_r: float


def hard_threshold(x, t: int) -> np.ndarray:
    """Keep the ``t`` largest-magnitude entries of ``x``; ties go to the lower index."""
    x = np.asarray(x, dtype=float)
    if not 0 <= t <= x.size:
        raise ValueError(f"t={t} outside [0, {x.size}]")
    out = np.zeros_like(x)
    if t:
        keep = np.argsort(-np.abs(x), kind="stable")[:t]
        out[keep] = x[keep]
    return out


def effective_sparsity(x) -> SparsityReport:
    x = np.asarray(x, dtype=float)
    peak = float(np.max(np.abs(x), initial=0.0))
    if peak == 0:
        raise ValueError("effective sparsity undefined for the zero vector")
    l2 = float(np.linalg.norm(x))
    l1 = float(np.abs(x).sum())
    # the ratio is computed on x / max|x| so tiny inputs do not underflow
    u = x / peak
    return SparsityReport(int(np.count_nonzero(x)), l1, l2, (np.abs(u).sum() / np.linalg.norm(u)) ** 2)


def is_effectively_sparse(x, s) -> bool:
    """The ratio test ``||x||_1 <= sqrt(s) ||x||_2``."""
    x = np.asarray(x, dtype=float)
    peak = float(np.max(np.abs(x), initial=0.0))
    if peak:
        x = x / peak
    return bool(np.abs(x).sum() <= np.sqrt(s) * np.linalg.norm(x))


def _sparse_coefficients(rng, N, k):
    x = np.zeros(N)
    if k >= N:
        x[:] = rng.standard_normal(N)
    else:
        support = rng.choice(N, size=k, replace=False)
        x[support] = rng.standard_normal(k)
    return x


def _truth(D, x, s, r):
    f = D.entries @ x
    scale = r / np.linalg.norm(f)
    x = x * scale
    f = f * scale
    s_eff = effective_sparsity(D.entries.T @ f).s_eff
    return GroundTruth(f, x, s, max(1.0, s_eff / s), float(np.linalg.norm(f)))


def gen_synthesis_sparse(D: TightFrame, s: int, seed, r: float = 1.0) -> GroundTruth:
    """``f = D x`` with ``x`` Gaussian on a uniform random support of size ``s``,
    rescaled to ``||f||_2 = r``."""
    if not 1 <= s <= D.N:
        raise ValueError(f"s={s} outside [1, {D.N}]")
    if r <= 0:
        raise ValueError("r must be positive")
    rng = np.random.default_rng(seed)
    for _ in range(100):
        x = _sparse_coefficients(rng, D.N, s)
        if np.linalg.norm(D.entries @ x) > 1e-12 * np.linalg.norm(x):
            return _truth(D, x, s, r)
    raise GenerationError("100 consecutive degenerate draws with D x = 0")


def gen_analysis_sparse_effective(
    D: TightFrame, s: int, seed, r: float = 1.0, max_attempts: int = 1000
) -> GroundTruth:
    """Rejection sampler for ``||D^T f||_1 <= sqrt(s) ||D^T f||_2``.

    Candidates are synthesis-sparse with inner sparsity cycling
    ``s, s-1, ..., 1``.  Random frames in general position rarely admit
    small ``s`` at all; the sampler then gives up after ``max_attempts``.
    """
    if s < 1:
        raise ValueError("s must be at least 1")
    if r <= 0:
        raise ValueError("r must be positive")
    rng = np.random.default_rng(seed)
    top = min(int(np.floor(s)), D.N)
    for attempt in range(max_attempts):
        k = top - attempt % top
        x = _sparse_coefficients(rng, D.N, k)
        f = D.entries @ x
        if np.linalg.norm(f) <= 1e-12 * np.linalg.norm(x):
            continue
        if is_effectively_sparse(D.entries.T @ f, s):
            return _truth(D, x, k, r)
    raise GenerationError(
        f"dictionary {D!r} unsuitable: no effectively {s}-analysis-sparse "
        f"signal in {max_attempts} attempts"
    )


def direction_error(f, g) -> float:
    """``|| f/||f|| - g/||g|| ||_2``, in ``[0, 2]``."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    nf, ng = np.linalg.norm(f), np.linalg.norm(g)
    if nf == 0 or ng == 0:
        raise ValueError("direction undefined for a zero vector")
    return float(np.linalg.norm(f / nf - g / ng))
