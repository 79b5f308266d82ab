"""Tight-frame dictionaries and their analysis/synthesis operators.

A tight frame here is an ``n x N`` matrix ``D`` with ``D D^T = I_n``.  The
analysis operator is ``D^T`` and the synthesis operator is ``D``.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "TightFrame",
    "TIGHT_TOL",
    "make_identity",
    "make_random_tight",
    "make_harmonic",
    "direct_sum",
    "analysis",
    "synthesis",
    "verify_tight",
    "synthesis_norm",
    "write_matrix_csv",
    "read_matrix_csv",
    "save_frame",
    "load_frame",
]

TIGHT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class TightFrame:
    """Immutable ``n x N`` dictionary satisfying ``D D^T = I_n``."""

    entries: np.ndarray
    label: str = "custom"

    def __post_init__(self):
        D = np.array(self.entries, dtype=float)
        if D.ndim != 2:
            raise ValueError("frame entries must be a 2-d array")
        n, N = D.shape
        if n < 1 or N < n:
            raise ValueError(f"need 1 <= n <= N, got n={n}, N={N}")
        D.setflags(write=False)
        object.__setattr__(self, "entries", D)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def N(self) -> int:
        return self.entries.shape[1]

    @property
    def T(self) -> np.ndarray:
        return self.entries.T

    def __repr__(self):
        return f"TightFrame(n={self.n}, N={self.N}, label={self.label!r})"


def _checked(D, label):
    frame = TightFrame(D, label)
    ok, resid = verify_tight(frame.entries)
    if not ok:
        raise ArithmeticError(f"{label} construction not tight (residual {resid:.3e})")
    return frame


def make_identity(n: int) -> TightFrame:
    if n < 1:
        raise ValueError("n must be positive")
    return TightFrame(np.eye(n), "identity")


def make_random_tight(n: int, N: int, seed) -> TightFrame:
    """First ``n`` rows of the orthogonal factor of a seeded Gaussian ``N x N`` matrix.

    The QR factor is sign-normalised (``diag(R) > 0``) so the output depends
    only on the Gaussian draw, not on the LAPACK implementation.
    """
    if n < 1 or N < n:
        raise ValueError(f"need 1 <= n <= N, got n={n}, N={N}")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((N, N))
    Q, R = np.linalg.qr(G)
    Q = Q * np.where(np.diag(R) < 0, -1.0, 1.0)
    return _checked(Q.T[:n], "random")


def _real_fourier_rows(N):
    # orthonormal real DFT basis of R^N ordered DC, (cos k, sin k)..., Nyquist
    j = np.arange(N)
    rows = [np.full(N, 1.0 / np.sqrt(N))]
    for k in range(1, (N - 1) // 2 + 1):
        rows.append(np.sqrt(2.0 / N) * np.cos(2 * np.pi * k * j / N))
        rows.append(np.sqrt(2.0 / N) * np.sin(2 * np.pi * k * j / N))
    if N % 2 == 0:
        rows.append(np.cos(np.pi * j) / np.sqrt(N))
    return np.array(rows)


def make_harmonic(n: int, N: int) -> TightFrame:
    """Real harmonic frame: ``n`` rows of the real Fourier basis sampled at ``N`` points.

    For even ``n`` the rows are the cos/sin pairs of frequencies ``1..n/2``;
    odd ``n`` adds the constant row.  Every column then has norm
    ``sqrt(n/N)``, and ``n=2, N=3`` gives the Mercedes-Benz frame.  When
    ``n == N`` the full orthonormal real Fourier basis is returned.
    """
    if n < 1 or N < n:
        raise ValueError(f"need 1 <= n <= N, got n={n}, N={N}")
    basis = _real_fourier_rows(N)
    if n == N:
        D = basis
    elif n % 2 == 1:
        D = basis[:n]
    else:
        D = basis[1 : n + 1]
    return _checked(D, "harmonic")


def direct_sum(*frames: TightFrame) -> TightFrame:
    """Block-diagonal stacking of tight frames; the result is again tight."""
    if not frames:
        raise ValueError("need at least one frame")
    n = sum(F.n for F in frames)
    N = sum(F.N for F in frames)
    D = np.zeros((n, N))
    i = j = 0
    for F in frames:
        D[i : i + F.n, j : j + F.N] = F.entries
        i += F.n
        j += F.N
    return _checked(D, "+".join(F.label for F in frames))


def analysis(D: TightFrame, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (D.n,):
        raise ValueError(f"signal has shape {f.shape}, expected ({D.n},)")
    return D.entries.T @ f


def synthesis(D: TightFrame, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (D.N,):
        raise ValueError(f"coefficients have shape {x.shape}, expected ({D.N},)")
    return D.entries @ x


def verify_tight(D, tol: float = TIGHT_TOL) -> tuple[bool, float]:
    """Return ``(residual <= tol, residual)`` with ``residual = ||D D^T - I||_F``."""
    M = D.entries if isinstance(D, TightFrame) else np.asarray(D, dtype=float)
    resid = float(np.linalg.norm(M @ M.T - np.eye(M.shape[0])))
    return resid <= tol, resid


def synthesis_norm(D: TightFrame, iters: int = 200, seed=0) -> float:
    """Power-iteration estimate of the spectral norm of the synthesis operator."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(D.N)
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(iters):
        v = D.entries.T @ (D.entries @ x)
        nv = np.linalg.norm(v)
        if nv == 0:
            return 0.0
        est = np.sqrt(nv)
        x = v / nv
    return float(est)


# CSV matrix format: first line "<rows>,<cols>,<label>", then one line per row.

def write_matrix_csv(path, M, label: str) -> None:
    M = np.asarray(M, dtype=float)
    if "," in label or "\n" in label:
        raise ValueError("label may not contain commas or newlines")
    lines = [f"{M.shape[0]},{M.shape[1]},{label}"]
    lines += [",".join(f"{v:.17g}" for v in row) for row in M]
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix_csv(path) -> tuple[np.ndarray, str]:
    text = Path(path).read_text().strip().splitlines()
    if not text:
        raise ValueError(f"{path}: empty matrix file")
    head = text[0].split(",", 2)
    if len(head) != 3:
        raise ValueError(f"{path}:1: expected header 'rows,cols,label'")
    rows, cols, label = int(head[0]), int(head[1]), head[2]
    body = text[1:]
    if len(body) != rows:
        raise ValueError(f"{path}: header says {rows} rows, found {len(body)}")
    M = np.empty((rows, cols))
    for i, line in enumerate(body):
        vals = line.split(",")
        if len(vals) != cols:
            raise ValueError(f"{path}:{i + 2}: expected {cols} values, found {len(vals)}")
        M[i] = [float(v) for v in vals]
    return M, label


def save_frame(path, D: TightFrame) -> None:
    write_matrix_csv(path, D.entries, D.label)


def load_frame(path, tol: float = TIGHT_TOL) -> TightFrame:
    M, label = read_matrix_csv(path)
    ok, resid = verify_tight(M, tol)
    if not ok:
        raise ValueError(f"{path}: matrix is not a tight frame (residual {resid:.3e})")
    return TightFrame(M, label)
