"""Condition-number sweeps over random jittered grids for the four test configurations."""

from __future__ import annotations

import csv
import enum
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import IrregSpecError
from .grid import GridSpec, SampleSet, build_grid, jittered_grid, text_sink
from .reconstruct import WindowKind, reconstruct, reference_spectrum, theoretical_error_norm
from .signals import ClosedFormSignal, evaluate, interferogram, periodic_mix, ricker
from .toeplitz import SolveOptions, SolverMethod

__all__ = [
    "Configuration",
    "Geometry",
    "SweepConfig",
    "SweepRow",
    "default_geometry",
    "run_realization",
    "run_sweep",
    "fit_error_model",
    "write_sweep_csv",
    "EPS",
]

EPS = 2.0 ** -53
# Ricker truncation half-width: leaves the leakage error a little above the
# rounding floor so the theoretical curve stays measurable.
RICKER_HALF_WIDTH = 1.75
# Target band for the periodic mode: bins must reach past the 400 Hz line.
_PERIODIC_MIN_BANDWIDTH = 800.0
# Interferogram window of the reference experiment: 1024 samples over 1.44 s.
_INTERFEROGRAM_SPAN_PER_SAMPLE = 1.44 / 1024


class Configuration(str, enum.Enum):
    PERIODIC = "periodic"
    INTERFEROGRAM = "interferogram"
    INTERFEROGRAM_HANN = "interferogram-hann"
    RICKER = "ricker"


@dataclass(frozen=True)
class Geometry:
    """Signal, extent and window shared by every realization of a configuration."""

    signal: ClosedFormSignal
    x0: float
    step: float
    n: int
    periodic_period: Optional[float]
    window: WindowKind


def default_geometry(config: Configuration, n: int) -> Geometry:
    """Extent used for each configuration at ``n`` samples.

    periodic: the smallest multiple of 0.03 s whose ``n`` bins reach past
    400 Hz, centered on 0, in periodic mode.  interferogram: ``n*1.44/1024``
    s centered on 0 (``[-0.72, 0.72]`` at 1024 samples).  ricker:
    ``[-1.75, 1.75]`` s.
    """
    config = Configuration(config)
    if config is Configuration.PERIODIC:
        sig = periodic_mix()
        # n / width must stay strictly above the bandwidth
        periods = max(1, math.ceil(n / (_PERIODIC_MIN_BANDWIDTH * sig.period)) - 1)
        width = periods * sig.period
        step = width / n
        return Geometry(sig, -0.5 * width, step, n, sig.period, WindowKind.NONE)
    if config in (Configuration.INTERFEROGRAM, Configuration.INTERFEROGRAM_HANN):
        span = n * _INTERFEROGRAM_SPAN_PER_SAMPLE
        window = WindowKind.HANN if config is Configuration.INTERFEROGRAM_HANN else WindowKind.NONE
        return Geometry(interferogram(), -0.5 * span, span / (n - 1), n, None, window)
    span = 2 * RICKER_HALF_WIDTH
    return Geometry(ricker(), -RICKER_HALF_WIDTH, span / (n - 1), n, None, WindowKind.NONE)


@dataclass(frozen=True)
class SweepConfig:
    """Parameters of a sweep; realization ``i`` (over all amplitudes) uses seed ``seed + i``."""

    configuration: Configuration = Configuration.PERIODIC
    n: int = 128
    jitters: tuple = (0.5, 1.0, 1.5, 2.0)
    realizations: int = 50
    seed: int = 0
    solver: SolverMethod = SolverMethod.LEVINSON
    theory: bool = False
    out: Optional[str] = None
    workers: Optional[int] = None

    def __post_init__(self):
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        if any(a < 0 for a in self.jitters):
            raise ValueError("jitter amplitudes must be >= 0")
        object.__setattr__(self, "configuration", Configuration(self.configuration))
        object.__setattr__(self, "solver", SolverMethod(self.solver))
        object.__setattr__(self, "jitters", tuple(float(a) for a in self.jitters))

    def tasks(self) -> list:
        out = []
        i = 0
        for a in self.jitters:
            for _ in range(self.realizations):
                out.append((self.seed + i, a))
                i += 1
        return out


@dataclass(frozen=True)
class SweepRow:
    config: str
    seed: int
    jitter: float
    kappa: float = float("nan")
    relative_error: float = float("nan")
    theoretical_error_norm: float = float("nan")
    error: str = ""


def realization_grid(geom: Geometry, jitter: float, seed: int) -> tuple[np.ndarray, GridSpec]:
    x = jittered_grid(geom.n, geom.x0, geom.step, jitter, seed)
    grid = build_grid(SampleSet(x, np.zeros(x.size)), geom.periodic_period)
    return x, grid


def run_realization(config: Configuration, n: int, seed: int, jitter: float,
                    solver: SolverMethod = SolverMethod.LEVINSON, theory: bool = False) -> SweepRow:
    """One row; library errors are caught and recorded in the ``error`` column."""
    config = Configuration(config)
    geom = default_geometry(config, n)
    try:
        x, grid = realization_grid(geom, jitter, seed)
        samples = SampleSet(x, evaluate(geom.signal, x))
        ref = reference_spectrum(geom.signal, grid, geom.window)
        report = reconstruct(samples, grid, SolveOptions(method=solver), geom.window, ref, seed)
        th = float("nan")
        if theory:
            th = theoretical_error_norm(geom.signal, grid, x, geom.window, reference=ref)
        tag = "" if report.converged else "PcgDidNotConverge"
        return SweepRow(config.value, seed, jitter, float(report.condition_number), float(report.relative_error), float(th), tag)
    except (IrregSpecError, ArithmeticError) as exc:
        return SweepRow(config.value, seed, jitter, error=type(exc).__name__)


def _worker_count(cfg: SweepConfig) -> int:
    if cfg.workers is not None:
        return max(1, int(cfg.workers))
    env = os.environ.get("IRREGSPEC_THREADS", "")
    return max(1, int(env)) if env.strip() else 1


def _run_task(args):
    return run_realization(*args)


def run_sweep(cfg: SweepConfig) -> list:
    """All realizations, sorted by condition number (failed rows last, by seed)."""
    args = [(cfg.configuration, cfg.n, s, a, cfg.solver, cfg.theory) for s, a in cfg.tasks()]
    workers = _worker_count(cfg)
    if workers == 1:
        rows = [_run_task(a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_task, args, chunksize=max(1, len(args) // (4 * workers))))
    rows.sort(key=lambda r: (math.isnan(r.kappa), r.kappa if not math.isnan(r.kappa) else 0.0, r.seed))
    if cfg.out:
        write_sweep_csv(cfg.out, rows)
    return rows


def fit_error_model(rows, kappa_min: float = 1e9, kappa_max: float = math.inf) -> dict:
    """Least-squares slope of log(error) on log(kappa) and the median of ``error / (kappa*eps)``.

    Only successful rows with ``kappa_min <= kappa <= kappa_max`` and a
    positive error are used.
    """
    k = np.array([r.kappa for r in rows if not r.error], dtype=float)
    e = np.array([r.relative_error for r in rows if not r.error], dtype=float)
    sel = (k >= kappa_min) & (k <= kappa_max) & (e > 0) & np.isfinite(e)
    out = {"rows": int(sel.sum()), "slope": float("nan"), "intercept": float("nan"), "constant": float("nan")}
    if sel.sum() >= 2 and np.ptp(np.log(k[sel])) > 0:
        slope, intercept = np.polyfit(np.log10(k[sel]), np.log10(e[sel]), 1)
        out["slope"], out["intercept"] = float(slope), float(intercept)
    if sel.any():
        out["constant"] = float(np.median(e[sel] / (k[sel] * EPS)))
    return out


def write_sweep_csv(path, rows) -> None:
    with text_sink(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["config", "seed", "jitter", "kappa", "relative_error", "theoretical_error_norm", "error"])
        for r in rows:
            w.writerow([r.config, r.seed, repr(r.jitter), repr(float(r.kappa)), repr(float(r.relative_error)),
                        repr(float(r.theoretical_error_norm)), r.error])
