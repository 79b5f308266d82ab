"""Monte Carlo sweeps: one record per (cell, trial, algorithm), CSV in and out."""
from __future__ import annotations

import csv
import hashlib
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from ..analysis import gaussian_width_mc, rip1_ratios, sample_synthesis_sphere, spep_deviation, tes_check
from ..frames import TightFrame, direct_sum, make_harmonic, make_identity, make_random_tight
from ..measure import dithered_measure, renormalize, sample_ensemble, sign_measure
from ..recover import (
    DIRECTION_ALGORITHMS,
    RecoveryError,
    choose_t,
    choose_t_lifted,
    ht_direction,
    ht_full,
    lp_direction,
    lp_full,
    socp_full,
)
from ..signals import GenerationError, GroundTruth, direction_error, gen_analysis_sparse_effective, gen_synthesis_sparse
from .config import ExperimentConfig, PropsConfig

__all__ = [
    "HEADER",
    "TrialRecord",
    "CSVFormatError",
    "build_dictionary",
    "trial_seed",
    "resolve_t",
    "evaluate",
    "run_trial",
    "run_experiment",
    "write_records",
    "records_to_csv",
    "read_records",
    "summarize",
    "summarize_records",
    "summary_to_csv",
    "emit_plotdata",
    "run_props",
    "props_to_csv",
    "write_props",
]

HEADER = "cell_id,m,n,N,s,sigma,r,algorithm,trial,direction_error,full_error,status,degenerate,wall_ms"
SUMMARY_HEADER = (
    "cell_id,m,algorithm,trials,degenerate,median_direction_error,p90_direction_error,"
    "median_full_error,p90_full_error"
)
PROPS_HEADER = "property,m,n,N,s,samples,statistic,value,seed"


class CSVFormatError(ValueError):
    def __init__(self, problems):
        super().__init__("; ".join(problems))
        self.problems = problems


@dataclass(frozen=True)
class TrialRecord:
    cell_id: int
    m: int
    n: int
    N: int
    s: int
    sigma: float
    r: float
    algorithm: str
    trial: int
    direction_error: Optional[float]
    full_error: Optional[float]
    status: str
    degenerate: bool
    wall_ms: float

    def to_row(self):
        def num(v):
            return "" if v is None else repr(float(v))

        return [
            str(self.cell_id), str(self.m), str(self.n), str(self.N), str(self.s),
            num(self.sigma), num(self.r), self.algorithm, str(self.trial),
            num(self.direction_error), num(self.full_error), self.status,
            "1" if self.degenerate else "0", f"{self.wall_ms:.3f}",
        ]

    @classmethod
    def from_row(cls, row):
        if len(row) != 14:
            raise ValueError(f"expected 14 fields, got {len(row)}")
        opt = lambda v: None if v == "" else float(v)
        rec = cls(
            int(row[0]), int(row[1]), int(row[2]), int(row[3]), int(row[4]),
            float(row[5]), float(row[6]), row[7], int(row[8]),
            opt(row[9]), opt(row[10]), row[11], _flag(row[12]), float(row[13]),
        )
        for v in (rec.direction_error, rec.full_error):
            if v is not None and not (math.isfinite(v) and v >= 0):
                raise ValueError(f"error value {v} is not a finite non-negative number")
        if rec.direction_error is not None and rec.direction_error > 2 + 1e-12:
            raise ValueError("direction_error exceeds 2")
        return rec


def _flag(v):
    if v not in ("0", "1"):
        raise ValueError(f"degenerate flag must be 0 or 1, got {v!r}")
    return v == "1"


# ---------------------------------------------------------------- setup


def build_dictionary(spec) -> TightFrame:
    if spec.construction == "identity":
        return make_identity(spec.n)
    if spec.construction == "harmonic":
        return make_harmonic(spec.n, spec.N)
    if spec.construction == "random":
        return make_random_tight(spec.n, spec.N, spec.seed)
    k = spec.identity_block
    return direct_sum(make_identity(k), make_random_tight(spec.n - k, spec.N - k, spec.seed))


def trial_seed(master, cell: tuple, trial: int) -> int:
    """Stable 64-bit seed from the master seed, the cell coordinates and the trial index."""
    key = "|".join([repr(master), *(repr(c) for c in cell), repr(trial)])
    return int.from_bytes(hashlib.blake2b(key.encode(), digest_size=8).digest(), "little")


def resolve_t(cfg: ExperimentConfig, algorithm: str, kappa: float, N: int) -> int:
    """Thresholding level; ``auto`` uses the theoretical choice capped at what ``H_t`` can keep."""
    if cfg.t != "auto":
        return cfg.t
    if algorithm == "ht_direction":
        return min(choose_t(cfg.epsilon, kappa, cfg.s), N)
    return min(choose_t_lifted(cfg.epsilon, kappa, cfg.s, cfg.r, cfg.sigma), N + 1)


def _make_truth(cfg, D, rng_seed):
    if cfg.signal_class == "zero":
        return GroundTruth(np.zeros(D.n), np.zeros(D.N), cfg.s, 1.0, 0.0)
    if cfg.signal_class == "synthesis":
        return gen_synthesis_sparse(D, cfg.s, rng_seed, cfg.r)
    return gen_analysis_sparse_effective(D, cfg.s, rng_seed, cfg.r)


# ---------------------------------------------------------------- trials


def evaluate(algorithm, D, E, y, f, r, sigma, t=None, radius=None):
    """Run one algorithm; return ``(direction_error, full_error, status, degenerate)``.

    Any failure becomes a flagged outcome rather than an exception.
    """
    try:
        if algorithm == "lp_direction":
            out = lp_direction(D, E.A, y)
        elif algorithm == "ht_direction":
            out = ht_direction(D, E.A, y, t)
        elif algorithm == "lp_full":
            out = lp_full(D, E.A, E.tau, sigma, y)
        elif algorithm == "socp_full":
            out = socp_full(D, E.A, E.tau, y, r if radius is None else radius)
        elif algorithm == "ht_full":
            out = ht_full(D, E.A, E.tau, sigma, y, t)
        else:
            raise ValueError(f"unknown algorithm {algorithm!r}")
    except RecoveryError as exc:
        status = exc.report.status if exc.report is not None else "error"
        return None, None, status, True
    except (ValueError, ArithmeticError, np.linalg.LinAlgError):
        return None, None, "error", True

    f_hat = out.f_hat
    if not np.all(np.isfinite(f_hat)):
        return None, None, "error", True
    if out.degenerate:
        return None, None, "degenerate", True
    nf, nh = np.linalg.norm(f), np.linalg.norm(f_hat)
    d_err = direction_error(f, f_hat) if nf > 0 and nh > 0 else None
    full_err = None
    if algorithm not in DIRECTION_ALGORITHMS:
        full_err = float(np.linalg.norm(f - f_hat) / r)
    if nf == 0:
        # nothing to compare a direction against
        return d_err, full_err, "degenerate", True
    return d_err, full_err, out.status, d_err is None


def run_trial(cfg: ExperimentConfig, D: TightFrame, cell_id: int, trial: int) -> list:
    m = cfg.m_grid[cell_id]
    sigma = cfg.sigma if cfg.dithered else 0.0
    cell = (m, D.n, D.N, cfg.s, float(sigma), float(cfg.r))
    seed = trial_seed(cfg.seed, cell, trial)
    signal_ss, ensemble_ss = np.random.SeedSequence(seed).spawn(2)
    base = dict(cell_id=cell_id, m=m, n=D.n, N=D.N, s=cfg.s, sigma=float(sigma), r=float(cfg.r), trial=trial)
    try:
        truth = _make_truth(cfg, D, signal_ss)
    except GenerationError:
        return [
            TrialRecord(**base, algorithm=a, direction_error=None, full_error=None,
                        status="generation_failed", degenerate=True, wall_ms=0.0)
            for a in cfg.algorithms
        ]
    E = sample_ensemble(m, D.n, ensemble_ss, sigma if cfg.dithered else None)
    y = dithered_measure(E, truth.f).y if cfg.dithered else sign_measure(E, truth.f).y
    records = []
    for algorithm in cfg.algorithms:
        t = None
        if algorithm in ("ht_direction", "ht_full"):
            t = resolve_t(cfg, algorithm, truth.kappa, D.N)
        start = time.perf_counter()
        d_err, f_err, status, degenerate = evaluate(
            algorithm, D, E, y, truth.f, cfg.r, sigma, t, cfg.socp_radius
        )
        wall = (time.perf_counter() - start) * 1e3 if cfg.timing else 0.0
        records.append(
            TrialRecord(**base, algorithm=algorithm, direction_error=d_err, full_error=f_err,
                        status=status, degenerate=degenerate, wall_ms=wall)
        )
    return records


def _run_job(args):
    cfg, D, cell_id, trial = args
    return run_trial(cfg, D, cell_id, trial)


def _sort_key(cfg):
    order = {a: i for i, a in enumerate(cfg.algorithms)}
    return lambda rec: (rec.cell_id, rec.trial, order[rec.algorithm])


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> list:
    """All records of the sweep, sorted by ``(cell_id, trial, algorithm)``.

    With ``threads > 1`` trials go to a process pool; each trial owns its
    RNG streams, so the record set does not depend on scheduling.
    """
    D = build_dictionary(cfg.dictionary)
    jobs = [(cfg, D, c, k) for c in range(len(cfg.m_grid)) for k in range(cfg.trials)]
    records = []
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for recs in pool.map(_run_job, jobs, chunksize=max(1, len(jobs) // (4 * threads))):
                records.extend(recs)
    else:
        for job in jobs:
            records.extend(_run_job(job))
    records.sort(key=_sort_key(cfg))
    return records


# ---------------------------------------------------------------- CSV


def records_to_csv(records) -> str:
    buf = io.StringIO()
    buf.write(HEADER + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    for rec in records:
        writer.writerow(rec.to_row())
    return buf.getvalue()


def write_records(path, records) -> None:
    Path(path).write_text(records_to_csv(records))


def read_records(path) -> list:
    """Parse a trial CSV; malformed lines raise ``CSVFormatError`` naming each line."""
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines:
        return []
    problems = []
    if lines[0].strip() != HEADER:
        problems.append(f"line 1: header does not match {HEADER!r}")
    records = []
    for lineno, row in enumerate(csv.reader(lines[1:]), 2):
        if not row:
            continue
        try:
            records.append(TrialRecord.from_row(row))
        except ValueError as exc:
            problems.append(f"line {lineno}: {exc}")
    if problems:
        raise CSVFormatError(problems)
    return records


# ---------------------------------------------------------------- summaries


def _stats(values):
    if not values:
        return None, None
    arr = np.asarray(values, dtype=float)
    return float(np.median(arr)), float(np.percentile(arr, 90))


def summarize_records(records) -> list:
    """Median and 90th percentile errors per ``(cell, algorithm)``, degenerate rows excluded."""
    groups = {}
    for rec in records:
        groups.setdefault((rec.cell_id, rec.m, rec.algorithm), []).append(rec)
    rows = []
    for (cell_id, m, algorithm), recs in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][2])):
        good = [r for r in recs if not r.degenerate]
        d_med, d_p90 = _stats([r.direction_error for r in good if r.direction_error is not None])
        f_med, f_p90 = _stats([r.full_error for r in good if r.full_error is not None])
        rows.append(
            {
                "cell_id": cell_id,
                "m": m,
                "algorithm": algorithm,
                "trials": len(recs),
                "degenerate": len(recs) - len(good),
                "median_direction_error": d_med,
                "p90_direction_error": d_p90,
                "median_full_error": f_med,
                "p90_full_error": f_p90,
            }
        )
    return rows


def summarize(path) -> list:
    return summarize_records(read_records(path))


def summary_to_csv(rows) -> str:
    out = [SUMMARY_HEADER]
    for row in rows:
        out.append(",".join("" if v is None else (f"{v:.6g}" if isinstance(v, float) else str(v)) for v in row.values()))
    return "\n".join(out) + "\n"


def emit_plotdata(path, out_dir) -> dict:
    """One ``<algorithm>.csv`` per algorithm with columns ``m,median_error``.

    Full-recovery algorithms use the median of ``full_error``, direction-only
    ones the median of ``direction_error``.
    """
    rows = summarize(path)
    series = {}
    for row in rows:
        key = "median_direction_error" if row["algorithm"] in DIRECTION_ALGORITHMS else "median_full_error"
        if row[key] is not None:
            series.setdefault(row["algorithm"], []).append((row["m"], row[key]))
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for algorithm, points in series.items():
        points.sort()
        lines = ["m,median_error"] + [f"{m},{v!r}" for m, v in points]
        (out_dir / f"{algorithm}.csv").write_text("\n".join(lines) + "\n")
    return series


# ---------------------------------------------------------------- properties


def run_props(cfg: PropsConfig) -> list:
    """Property estimates over the configured ``m`` grid (one estimate for ``width``)."""
    D = build_dictionary(cfg.dictionary)
    if cfg.prop == "width":
        sampler = lambda rng, count: sample_synthesis_sphere(D, cfg.s, count, rng)
        return [gaussian_width_mc(sampler, cfg.sample_size, cfg.samples, trial_seed(cfg.seed, ("width",), 0))]
    out = []
    for m in cfg.m_grid:
        seed = trial_seed(cfg.seed, ("props", cfg.prop, m, D.n, D.N, cfg.s), 0)
        a_ss, p_ss = np.random.SeedSequence(seed).spawn(2)
        A = sample_ensemble(m, D.n, a_ss).A
        if cfg.prop == "spep":
            out.append(spep_deviation(renormalize(A), D, cfg.s, cfg.samples, p_ss))
        elif cfg.prop == "rip1":
            out.append(rip1_ratios(renormalize(A), D, cfg.s, cfg.samples, p_ss))
        else:
            out.append(tes_check(A, D, cfg.s, cfg.eps, cfg.samples, p_ss, cfg.sphere))
    return out


def props_to_csv(estimates, seed) -> str:
    lines = [PROPS_HEADER]
    for est in estimates:
        p = est.params
        for name, value in est.rows():
            lines.append(
                f"{est.prop},{p.get('m', '')},{p['n']},{p.get('N', '')},{p.get('s', '')},"
                f"{est.samples},{name},{float(value)!r},{seed}"
            )
    return "\n".join(lines) + "\n"


def write_props(path, estimates, seed) -> None:
    Path(path).write_text(props_to_csv(estimates, seed))
