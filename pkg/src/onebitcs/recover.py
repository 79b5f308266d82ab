"""Direction-only and full-signal recovery from one-bit measurements."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .frames import TightFrame
from .measure import lift_dictionary, lift_matrix, sgn
from .optim.simplex import OPTIMAL, LinearProgramStd, SolverReport, solve_lp
from .optim.splitting import solve_cone_ball_l1
from .signals import hard_threshold

__all__ = [
    "RecoveryOutput",
    "RecoveryError",
    "lp_direction",
    "ht_direction",
    "choose_t",
    "choose_t_lifted",
    "lp_full",
    "socp_full",
    "ht_full",
    "ALGORITHMS",
    "DIRECTION_ALGORITHMS",
    "FULL_ALGORITHMS",
]

DIRECTION_ALGORITHMS = ("lp_direction", "ht_direction")
FULL_ALGORITHMS = ("lp_full", "socp_full", "ht_full")
ALGORITHMS = DIRECTION_ALGORITHMS + FULL_ALGORITHMS

LP_TOL = 1e-8


class RecoveryError(RuntimeError):
    """The underlying solver did not return an optimal point."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass
class RecoveryOutput:
    f_hat: np.ndarray
    direction_only: bool
    diagnostics: dict = field(default_factory=dict)
    degenerate: bool = False

    @property
    def status(self) -> str:
        rep = self.diagnostics.get("report")
        if self.degenerate:
            return "degenerate"
        return rep.status if isinstance(rep, SolverReport) else OPTIMAL


def _dict_matrix(D):
    return D.entries if isinstance(D, TightFrame) else np.asarray(D, dtype=float)


def _check_dims(Dm, A, y):
    if A.shape[1] != Dm.shape[0]:
        raise ValueError(f"A has {A.shape[1]} columns but D has {Dm.shape[0]} rows")
    if y.shape != (A.shape[0],):
        raise ValueError(f"y has shape {y.shape}, expected ({A.shape[0]},)")


def _y(obs):
    return np.asarray(getattr(obs, "y", obs), dtype=float)


def _interior_nudge(YA, h, rel=1e-9):
    """Move an LP vertex off its active sign constraints.

    A vertex of the sign-cone program sits on ``n - 1``-ish hyperplanes
    ``y_i <a_i, h> = 0`` where ``sgn`` is ambiguous.  A step of relative
    size ``rel`` along a direction that raises every active margin to the
    same positive value resolves them without flipping inactive rows.
    """
    margin = YA @ h
    top = margin.max()
    if top <= 0:
        return h
    active = margin <= 1e-7 * top
    if not active.any():
        return h
    d = np.linalg.lstsq(YA[active], np.ones(active.sum()), rcond=None)[0]
    gain = YA @ d
    if np.any(gain[active] <= 0.5):
        return h
    theta = rel * top
    shrink = ~active & (gain < 0)
    if shrink.any():
        theta = min(theta, 0.5 * np.min(margin[shrink] / -gain[shrink]))
    h2 = h + theta * d
    total = (YA @ h2).sum()
    h2 = h2 / total
    if np.all(YA @ h2 > 0):
        return h2
    return h


def _lp_direction_core(Dm, A, y, route="auto"):
    n, N = Dm.shape
    YA = y[:, None] * A
    c = np.concatenate([np.zeros(n), np.ones(N)])
    G = np.concatenate([YA.sum(axis=0), np.zeros(N)])[None, :]
    I = np.eye(N)
    P = np.vstack(
        [
            np.hstack([YA, np.zeros((A.shape[0], N))]),
            np.hstack([-Dm.T, I]),
            np.hstack([Dm.T, I]),
        ]
    )
    nonneg = np.concatenate([np.zeros(n, dtype=bool), np.ones(N, dtype=bool)])
    lp = LinearProgramStd(c, G, [1.0], P, np.zeros(P.shape[0]), nonneg)
    v, report = solve_lp(lp, route=route)
    if report.status != OPTIMAL:
        raise RecoveryError(f"sign-cone LP ended with status {report.status}", report)
    h = v[:n]
    margins = YA @ h
    if margins.min() < -LP_TOL or abs(margins.sum() - 1.0) > LP_TOL:
        raise RecoveryError("LP output violates its constraints", report)
    h = _interior_nudge(YA, h)
    return h, report


def lp_direction(D, A, y, route: str = "auto") -> RecoveryOutput:
    """Minimise ``||D^T h||_1`` s.t. ``sgn(A h) = y`` and ``||A h||_1 = 1``.

    Solved as the LP ``min 1^T w`` over ``-w <= D^T h <= w``,
    ``y_i (A h)_i >= 0``, ``sum_i y_i (A h)_i = 1``.
    """
    Dm = _dict_matrix(D)
    A = np.asarray(A, dtype=float)
    y = _y(y)
    _check_dims(Dm, A, y)
    h, report = _lp_direction_core(Dm, A, y, route)
    margins = y * (A @ h)
    diag = {
        "report": report,
        "min_margin": float(margins.min()),
        "l1_of_Ah": float(np.abs(A @ h).sum()),
        "sign_consistent": bool(np.array_equal(sgn(A @ h), y)),
    }
    return RecoveryOutput(h, True, diag)


def ht_direction(D, A, y, t: int) -> RecoveryOutput:
    """``D H_t(D^T A^T y)``."""
    Dm = _dict_matrix(D)
    A = np.asarray(A, dtype=float)
    y = _y(y)
    _check_dims(Dm, A, y)
    if t < 1:
        raise ValueError("t must be at least 1")
    z = hard_threshold(Dm.T @ (A.T @ y), t)
    f_hat = Dm @ z
    degenerate = not np.any(f_hat)
    diag = {"t": t, "support": np.flatnonzero(z)}
    if degenerate:
        diag["reason"] = "thresholded vector synthesises to zero"
    return RecoveryOutput(f_hat, True, diag, degenerate)


def choose_t(epsilon: float, kappa: float, s: int) -> int:
    """``ceil(16 kappa s / epsilon^2)``, evaluated in exact rational arithmetic."""
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    if kappa < 1 or s < 1:
        raise ValueError("need kappa >= 1 and s >= 1")
    val = 16 * Fraction(kappa) * Fraction(s) / Fraction(epsilon) ** 2
    return math.ceil(val)


def choose_t_lifted(epsilon: float, kappa: float, s: int, r: float, sigma: float) -> int:
    """Sparsity level for thresholded full recovery.

    ``ceil(16 (eps'/8)^-2 kappa (s+1))`` with ``eps' = r sigma eps / (2 (r^2 + sigma^2))``.
    """
    if epsilon <= 0 or r <= 0 or sigma <= 0:
        raise ValueError("epsilon, r and sigma must be positive")
    eps_p = Fraction(r) * Fraction(sigma) * Fraction(epsilon) / (
        2 * (Fraction(r) ** 2 + Fraction(sigma) ** 2)
    )
    return math.ceil(16 * Fraction(kappa) * (s + 1) / (eps_p / 8) ** 2)


def lp_full(D, A, tau, sigma: float, y, route: str = "auto") -> RecoveryOutput:
    """Sign-cone LP on the lifted problem; returns ``(sigma / u) h`` for the
    lifted optimum ``(h, u)``."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    Dm = _dict_matrix(D)
    A = np.asarray(A, dtype=float)
    y = _y(y)
    _check_dims(Dm, A, y)
    Dt = lift_dictionary(D if isinstance(D, TightFrame) else TightFrame(Dm)).entries
    At = lift_matrix(A, tau, sigma)
    g, report = _lp_direction_core(Dt, At, y, route)
    h, u = g[:-1], g[-1]
    diag = {"report": report, "u_hat": float(u)}
    if abs(u) <= 1e-12 * np.linalg.norm(g):
        diag["reason"] = "lifted coordinate u_hat is zero"
        return RecoveryOutput(np.zeros(A.shape[1]), False, diag, True)
    return RecoveryOutput((sigma / u) * h, False, diag)


def socp_full(D, A, tau, y, r: float, **opts) -> RecoveryOutput:
    """``argmin ||D^T h||_1`` s.t. ``sgn(A h - tau) = y``, ``||h||_2 <= r``."""
    Dm = _dict_matrix(D)
    A = np.asarray(A, dtype=float)
    y = _y(y)
    _check_dims(Dm, A, y)
    h, report = solve_cone_ball_l1(Dm, (A, tau, y), r, **opts)
    diag = {"report": report}
    if report.status != OPTIMAL:
        raise RecoveryError(f"cone/ball solver ended with status {report.status}", report)
    return RecoveryOutput(h, False, diag)


def ht_full(D, A, tau, sigma: float, y, t: int) -> RecoveryOutput:
    """``(-sigma^2 / <tau, y>) D H_{t-1}(D^T A^T y)``."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if t < 1:
        raise ValueError("t must be at least 1")
    Dm = _dict_matrix(D)
    A = np.asarray(A, dtype=float)
    y = _y(y)
    tau = np.asarray(tau, dtype=float)
    _check_dims(Dm, A, y)
    ip = float(tau @ y)
    diag = {"t": t, "tau_dot_y": ip}
    if ip == 0.0:
        diag["reason"] = "<tau, y> = 0, magnitude unrecoverable"
        return RecoveryOutput(np.zeros(A.shape[1]), False, diag, True)
    z = hard_threshold(Dm.T @ (A.T @ y), t - 1)
    f_hat = (-sigma**2 / ip) * (Dm @ z)
    diag["scale"] = -sigma**2 / ip
    diag["support"] = np.flatnonzero(z)
    if not np.any(f_hat):
        diag["reason"] = "thresholded vector synthesises to zero"
        return RecoveryOutput(f_hat, False, diag, True)
    return RecoveryOutput(f_hat, False, diag)
