"""Gaussian sensing ensembles, one-bit quantizers and the lifting to ``R^{n+1}``."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .frames import TightFrame, direct_sum, make_identity, read_matrix_csv, write_matrix_csv

__all__ = [
    "SensingEnsemble",
    "OneBitObservation",
    "sgn",
    "sample_ensemble",
    "sign_measure",
    "dithered_measure",
    "renormalize",
    "lift",
    "lift_matrix",
    "lift_dictionary",
    "lift_signal",
    "save_ensemble",
    "load_ensemble",
    "write_observation",
    "read_observation",
]


def sgn(v) -> np.ndarray:
    """Entrywise sign with ``sgn(0) = +1``."""
    return np.where(np.asarray(v) >= 0, 1.0, -1.0)


@dataclass(frozen=True, eq=False)
class SensingEnsemble:
    A: np.ndarray
    seed: object = None
    sigma: float = 0.0
    tau: Optional[np.ndarray] = None

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        A.setflags(write=False)
        object.__setattr__(self, "A", A)
        if self.tau is not None:
            tau = np.array(self.tau, dtype=float)
            if tau.shape != (A.shape[0],):
                raise ValueError("tau must have one entry per row of A")
            tau.setflags(write=False)
            object.__setattr__(self, "tau", tau)
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]


@dataclass(frozen=True, eq=False)
class OneBitObservation:
    y: np.ndarray
    model: str = "sign"

    def __post_init__(self):
        if self.model not in ("sign", "dithered"):
            raise ValueError(f"unknown quantizer model {self.model!r}")
        y = np.array(self.y, dtype=float)
        if not np.all(np.abs(y) == 1):
            raise ValueError("one-bit observations must be exactly +-1")
        y.setflags(write=False)
        object.__setattr__(self, "y", y)


def sample_ensemble(m: int, n: int, seed, sigma: Optional[float] = None) -> SensingEnsemble:
    """Standard normal ``m x n`` matrix; thresholds ``N(0, sigma^2)`` when ``sigma`` is given.

    ``A`` and ``tau`` come from two child streams of ``SeedSequence(seed)``,
    so they are independent and each replays exactly.
    """
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    a_stream, tau_stream = ss.spawn(2)
    A = np.random.default_rng(a_stream).standard_normal((m, n))
    if sigma is None:
        return SensingEnsemble(A, seed, 0.0, None)
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    tau = sigma * np.random.default_rng(tau_stream).standard_normal(m)
    return SensingEnsemble(A, seed, float(sigma), tau)


def _matrix(E):
    return E.A if isinstance(E, SensingEnsemble) else np.asarray(E, dtype=float)


def sign_measure(E, f) -> OneBitObservation:
    A = _matrix(E)
    f = np.asarray(f, dtype=float)
    if f.shape != (A.shape[1],):
        raise ValueError(f"signal has shape {f.shape}, expected ({A.shape[1]},)")
    return OneBitObservation(sgn(A @ f), "sign")


def dithered_measure(E: SensingEnsemble, f) -> OneBitObservation:
    if E.tau is None:
        raise ValueError("ensemble has no thresholds; sample it with sigma")
    f = np.asarray(f, dtype=float)
    if f.shape != (E.n,):
        raise ValueError(f"signal has shape {f.shape}, expected ({E.n},)")
    return OneBitObservation(sgn(E.A @ f - E.tau), "dithered")


def renormalize(E, as_printed: bool = False) -> np.ndarray:
    """Scale ``A`` so that ``E ||A' f||_1 = ||f||_2``, i.e. ``A' = sqrt(pi/2)/m * A``.

    A standard normal row gives ``E |<a, f>| = sqrt(2/pi) ||f||_2``, so the
    unbiased factor is ``1 / (m sqrt(2/pi))``.  ``as_printed=True`` returns
    the literal ``sqrt(2/pi)/m * A`` instead, under which ``||A' f||_1``
    concentrates at ``2/pi`` rather than 1.
    """
    A = _matrix(E)
    c = np.sqrt(2 / np.pi) if as_printed else np.sqrt(np.pi / 2)
    return (c / A.shape[0]) * A


def lift_matrix(A, tau, sigma: float) -> np.ndarray:
    """``[A | -tau/sigma]``."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    A = np.asarray(A, dtype=float)
    tau = np.asarray(tau, dtype=float)
    return np.hstack([A, -tau[:, None] / sigma])


def lift(E: SensingEnsemble, sigma: Optional[float] = None) -> np.ndarray:
    if E.tau is None:
        raise ValueError("ensemble has no thresholds to lift")
    return lift_matrix(E.A, E.tau, E.sigma if sigma is None else sigma)


def lift_dictionary(D: TightFrame) -> TightFrame:
    return direct_sum(D, make_identity(1))


def lift_signal(f, sigma: float) -> np.ndarray:
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return np.append(np.asarray(f, dtype=float), sigma)


def save_ensemble(path, E: SensingEnsemble) -> None:
    write_matrix_csv(path, E.A, f"gaussian seed={E.seed} sigma={E.sigma!r}")
    if E.tau is not None:
        write_observation(Path(str(path) + ".tau"), E.tau)


def load_ensemble(path) -> SensingEnsemble:
    A, label = read_matrix_csv(path)
    fields = dict(item.split("=", 1) for item in label.split()[1:] if "=" in item)
    sigma = float(fields.get("sigma", 0.0))
    tau_path = Path(str(path) + ".tau")
    tau = None
    if tau_path.exists():
        tau = np.array([float(v) for v in tau_path.read_text().strip().split(",")])
    return SensingEnsemble(A, fields.get("seed"), sigma, tau)


def write_observation(path, y) -> None:
    y = np.asarray(y.y if isinstance(y, OneBitObservation) else y, dtype=float)
    if np.all(np.abs(y) == 1):
        text = ",".join("1" if v > 0 else "-1" for v in y)
    else:
        text = ",".join(f"{v:.17g}" for v in y)
    Path(path).write_text(text + "\n")


def read_observation(path, model: str = "sign") -> OneBitObservation:
    return OneBitObservation(
        np.array([float(v) for v in Path(path).read_text().strip().split(",")]), model
    )
