"""Numerical studies: norm tables, point counts and convergence runs.

Each ``cmd_*`` function computes its rows, writes a CSV into the output
directory when one is given, and returns the rows. Floats are written with
17 significant digits so files round-trip exactly and diff cleanly.
"""
from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.special import ndtri

from .adaptive import APrioriWeights, AdaptiveState, run_aposteriori, run_apriori
from .collocation import (
    SampledError,
    SparseCollocation,
    ValueStore,
    best_n_term_curve,
    delta_values,
    to_hermite,
)
from .hermite import norm_Delta_H, norm_U_H
from .lognormal import FieldConfig, LognormalDiffusion, h10_norm, solve_many
from .multi_index import ZERO, MonotoneSet, combination_coefficients, count_points, hc_set, td_set

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ConvergenceRecord",
    "ConvergenceResult",
    "gaussian_samples",
    "fit_rate",
    "cmd_norms",
    "cmd_counts",
    "cmd_converge",
    "cmd_dimsweep",
    "write_csv",
    "DESK",
]


class ConfigError(ValueError):
    """Invalid experiment configuration."""


#: Reduced settings for laptop-scale runs.
DESK = {"M_ref": 64, "n_max": 60, "n_mc": 500}


@dataclass(frozen=True)
class ExperimentConfig:
    q: float = 2.0
    sigma: float = 0.1
    M: int | None = None  # model dimensions, defaults to M_ref
    M_ref: int = 640
    n_mc: int = 1000
    seed: int | None = None
    n_max: int = 500
    m_buffer: int = 5
    algo: str = "aposteriori"
    nx: int = 1024
    out: str | None = None

    def __post_init__(self):
        if self.M is None:
            object.__setattr__(self, "M", self.M_ref)
        if self.algo not in ("apriori", "aposteriori"):
            raise ConfigError(f"algo must be 'apriori' or 'aposteriori', got {self.algo!r}")
        if self.M < 1 or self.M_ref < 1:
            raise ConfigError("M and M_ref must be positive")
        if self.M > self.M_ref:
            raise ConfigError(f"M={self.M} exceeds M_ref={self.M_ref}")
        if self.n_mc < 1:
            raise ConfigError("n_mc must be >= 1")
        if self.n_max < 1:
            raise ConfigError("n_max must be >= 1")
        if self.m_buffer < 1:
            raise ConfigError("m_buffer must be >= 1")
        if self.q < 1 or not self.sigma > 0:
            raise ConfigError("need q >= 1 and sigma > 0")
        if self.nx < 16 or self.nx & (self.nx - 1):
            raise ConfigError("nx must be a power of two >= 16")

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    @property
    def tag(self) -> str:
        return f"{self.algo}_q{self.q:g}"


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path: Path | str, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def gaussian_samples(seed: int, n: int, d: int, start: int = 0) -> np.ndarray:
    """Standard normal samples from a counter-based stream, shape (n, d).

    Sample k is a function of ``(seed, k)`` only: it reads Philox4x64 blocks
    at counter ``(0, k, 0, 0)`` and maps the top 53 bits of each word through
    the inverse normal CDF.
    """
    out = np.empty((n, d))
    for row, k in enumerate(range(start, start + n)):
        bg = np.random.Philox(key=seed, counter=[0, k, 0, 0])
        raw = bg.random_raw(d)
        u = ((raw >> np.uint64(11)).astype(float) + 0.5) * 2.0**-53
        out[row] = ndtri(u)
    return out


def fit_rate(x, err) -> float:
    """Algebraic decay rate ``s`` of ``err ~ x^(-s)`` by least squares in log-log."""
    x = np.log(np.asarray(x, dtype=float))
    y = np.log(np.asarray(err, dtype=float))
    slope = np.polyfit(x, y, 1)[0]
    return float(-slope)


# --- tables ----------------------------------------------------------------


def cmd_norms(i_max: int = 39, nu_max: int = 39, out: str | Path | None = None):
    """Rows ``(i, nu, ||U_i H_nu||, ||Delta_i H_nu||)`` for the full grid of levels."""
    if not (0 <= i_max <= 64 and 0 <= nu_max <= 64):
        raise ConfigError("norm table bounds must lie in [0, 64]")
    rows = [
        (i, nu, norm_U_H(i, nu), norm_Delta_H(i, nu))
        for i in range(i_max + 1)
        for nu in range(nu_max + 1)
    ]
    if out is not None:
        write_csv(Path(out) / "norms.csv", ("i", "nu", "norm_U", "norm_Delta"), rows)
    return rows


def cmd_counts(family: str = "td", M: int = 2, w_max: int = 6, out: str | Path | None = None):
    """Rows ``(w, |Lambda|, |Xi_Lambda|, |Lambda|(|Lambda|+1)/2)`` for TD or HC sets."""
    if family == "td":
        make, w_min = td_set, 0
    elif family == "hc":
        make, w_min = hc_set, 1
    else:
        raise ConfigError(f"family must be 'td' or 'hc', got {family!r}")
    if M < 1 or w_max < w_min:
        raise ConfigError("need M >= 1 and w_max >= the family's minimal budget")
    rows = []
    for w in range(w_min, w_max + 1):
        lam = make(w, M)
        exact, bound = count_points(lam)
        rows.append((w, len(lam), exact, bound))
    if out is not None:
        write_csv(Path(out) / "counts.csv", ("w", "n_indices", "n_points", "bound"), rows)
    return rows


@dataclass
class ConvergenceRecord:
    N: int
    n_indices: int
    n_points: int
    n_points_extended: int
    error: float
    n_active: int

    def row(self):
        return dataclasses.astuple(self)


@dataclass
class ConvergenceResult:
    config: ExperimentConfig
    records: list[ConvergenceRecord]
    rates: dict[str, float]
    fit_window: tuple[int, int]
    state: AdaptiveState
    best_n_term: list[tuple[int, float]] | None = None
    files: list[Path] = dataclasses.field(default_factory=list)

    @property
    def errors(self) -> np.ndarray:
        return np.array([r.error for r in self.records])


CONVERGE_HEADER = ("N", "n_indices", "n_points", "n_points_extended", "error", "n_active")


def _run_converge(cfg: ExperimentConfig) -> ConvergenceResult:
    if cfg.seed is None:
        raise ConfigError("convergence runs need an explicit seed")
    field_cfg = FieldConfig(q=cfg.q, sigma=cfg.sigma, M=cfg.M, nx=cfg.nx)
    ref_cfg = dataclasses.replace(field_cfg, M=cfg.M_ref)
    model = LognormalDiffusion(field_cfg)

    X = gaussian_samples(cfg.seed, cfg.n_mc, cfg.M_ref)
    u_ref = solve_many(ref_cfg, X)
    metric = SampledError(X, u_ref, norm=lambda v: h10_norm(v, cfg.nx))

    def row_norm(V):
        return h10_norm(V, cfg.nx)

    if cfg.algo == "aposteriori":
        state = run_aposteriori(model, cfg.m_buffer, cfg.n_max, error_norm=row_norm, max_dim=cfg.M)
        store = state.store
    else:
        state = run_apriori(APrioriWeights(cfg.q), cfg.m_buffer, cfg.n_max, max_dim=cfg.M)
        store = ValueStore(model)
        for nu in state.order:
            store.require_grid(nu)

    # U_{Lambda_N} = U_{Lambda_{N-1}} + Delta_{nu_N}, accumulated at the samples
    approx = delta_values(ZERO, store, X[:, :0])
    approx = np.broadcast_to(approx, u_ref.shape).copy()
    records = [ConvergenceRecord(1, 1, 1, 1, metric(approx), 0)]
    for rec in state.history:
        approx += delta_values(rec.nu, store, X[:, : rec.nu.max_dim])
        records.append(
            ConvergenceRecord(
                rec.N, rec.N, rec.n_points, rec.n_points_extended, metric(approx), rec.n_active
            )
        )

    start = len(records) // 2
    tail = records[start:]
    rates = {}
    if len(tail) >= 2:
        err = [r.error for r in tail]
        rates["n_indices"] = fit_rate([r.n_indices for r in tail], err)
        rates["n_points"] = fit_rate([r.n_points for r in tail], err)
        if cfg.algo == "aposteriori":
            rates["n_points_extended"] = fit_rate([r.n_points_extended for r in tail], err)
    result = ConvergenceResult(cfg, records, rates, (tail[0].N, tail[-1].N), state)

    if cfg.algo == "aposteriori":
        # extended set: everything whose tensor grid was evaluated
        ext = MonotoneSet(set(state.order) | set(state.criteria), check=False)
        sc = SparseCollocation(ext, combination_coefficients(ext), store)
        he = to_hermite(sc)
        result.best_n_term = best_n_term_curve(
            he, metric, coef_norm=lambda c: h10_norm(c, cfg.nx), n_max=len(records)
        )
    return result


def _write_converge(result: ConvergenceResult, out: Path, name: str) -> None:
    cfg = result.config
    result.files.append(write_csv(out / name, CONVERGE_HEADER, (r.row() for r in result.records)))
    if result.rates:
        rows = [(k, v, result.fit_window[0], result.fit_window[1]) for k, v in result.rates.items()]
        result.files.append(
            write_csv(out / f"rates_{cfg.tag}.csv", ("measure", "rate", "fit_start", "fit_end"), rows)
        )
    if result.best_n_term is not None:
        result.files.append(write_csv(out / "bestnterm.csv", ("N", "error"), result.best_n_term))


def cmd_converge(cfg: ExperimentConfig) -> ConvergenceResult:
    """Run one convergence study; writes ``converge_<algo>_q<q>.csv`` and companions."""
    result = _run_converge(cfg)
    if cfg.out is not None:
        _write_converge(result, Path(cfg.out), f"converge_{cfg.tag}.csv")
    return result


def cmd_dimsweep(cfg: ExperimentConfig, Ms: Sequence[int]) -> dict[int, ConvergenceResult]:
    """One convergence curve per truncation M, each against an M-dimensional reference."""
    if not Ms:
        raise ConfigError("dimsweep needs at least one M")
    results = {}
    for M in Ms:
        sub = cfg.replace(M=M, M_ref=M)
        res = _run_converge(sub)
        if cfg.out is not None:
            res.files.append(
                write_csv(
                    Path(cfg.out) / f"dimsweep_M{M}.csv",
                    CONVERGE_HEADER,
                    (r.row() for r in res.records),
                )
            )
        results[M] = res
    return results
