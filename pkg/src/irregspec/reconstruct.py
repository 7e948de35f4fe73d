"""Spectrum recovery from irregular samples by inverting the Toeplitz system.

Pipeline: window the sample values, take the direct transform, build the
operator from the (unwindowed) positions, solve, and scale by ``N/width``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import DuplicatePositions, LengthMismatch, MissingReference, NoClosedForm, PcgDidNotConverge
from .grid import GridSpec, SampleSet, regular_counterpart
from .nudft import Spectrum, cgamma, cgamma_at, forward
from .signals import ClosedFormSignal, evaluate
from .toeplitz import SolveOptions, SolverMethod, condition_number, from_cgamma, solve

__all__ = [
    "WindowKind",
    "ReconstructionReport",
    "window_values",
    "apply_window",
    "reference_spectrum",
    "relative_error",
    "reconstruct",
    "truncated_spectrum",
    "theoretical_error",
    "theoretical_error_norm",
    "dynamic_range",
]

# Consecutive samples closer than this fraction of the mean step are rejected.
_NEAR_COINCIDENT = 1e-9
_DYNAMIC_RANGE_CAP = 1e308


class WindowKind(str, enum.Enum):
    NONE = "none"
    HANN = "hann"


def window_values(x, grid: GridSpec, kind: WindowKind = WindowKind.NONE) -> np.ndarray:
    """Window weights at positions ``x``.

    The Hann window is ``cos^2(pi*(x - center)/width)`` centered on the
    truncation interval, so it is 1 at the center and 0 at both edges.
    """
    x = np.asarray(x, dtype=float)
    kind = WindowKind(kind)
    if kind is WindowKind.NONE:
        return np.ones(x.shape)
    return np.cos(np.pi * (x - grid.door_center) / grid.width) ** 2


def apply_window(samples: SampleSet, grid: GridSpec, kind: WindowKind = WindowKind.NONE) -> SampleSet:
    kind = WindowKind(kind)
    if kind is WindowKind.NONE:
        return samples
    return samples.with_values(samples.values * window_values(samples.positions, grid, kind))


def reference_spectrum(signal: ClosedFormSignal, grid: GridSpec, window: WindowKind = WindowKind.NONE) -> Spectrum:
    """Direct transform of ``signal`` sampled on the regular counterpart, windowed the same way."""
    x = regular_counterpart(grid)
    samples = SampleSet(x, evaluate(signal, x))
    return forward(apply_window(samples, grid, window), grid)


def relative_error(spectrum: Spectrum, reference: Spectrum) -> float:
    """``||spectrum - reference||_2 / max|reference|``."""
    if reference is None:
        raise MissingReference("a reference spectrum is required")
    diff = spectrum.amplitudes - reference.amplitudes
    return float(np.linalg.norm(diff) / np.max(np.abs(reference.amplitudes)))


@dataclass(frozen=True)
class ReconstructionReport:
    solution: Spectrum
    condition_number: float
    residual: float
    solver_used: SolverMethod
    window_used: WindowKind
    norm_ratio: float
    relative_error: Optional[float] = None
    theoretical_error_norm: Optional[float] = None
    converged: bool = True
    seed: Optional[int] = None

    def to_dict(self) -> dict:
        g = self.solution.grid
        return {
            "n": g.n,
            "delta_x": g.width,
            "delta_sigma": g.freq_step,
            "mean_step": g.mean_step,
            # periodic grids use width/N, endpoint grids use span/(N-1)
            "mean_step_convention": "width/N" if g.periodic else "span/(N-1)",
            "periodic_period": g.periodic_period,
            "condition_number": self.condition_number,
            "residual": self.residual,
            "relative_error": self.relative_error,
            "theoretical_error_norm": self.theoretical_error_norm,
            "norm_ratio": self.norm_ratio,
            "solver_used": self.solver_used.value,
            "window_used": self.window_used.value,
            "converged": self.converged,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)


def _check_separation(samples: SampleSet, grid: GridSpec):
    gaps = np.diff(samples.positions)
    close = np.flatnonzero(gaps < _NEAR_COINCIDENT * grid.mean_step)
    if close.size:
        i = int(close[0])
        raise DuplicatePositions(
            f"samples {i} and {i + 1} are {gaps[i]:.3g} apart "
            f"(< {_NEAR_COINCIDENT:g} mean steps); the operator would be singular"
        )


def reconstruct(
    samples: SampleSet,
    grid: GridSpec,
    opts: SolveOptions = SolveOptions(),
    window: WindowKind = WindowKind.NONE,
    reference: Optional[Spectrum] = None,
    seed: Optional[int] = None,
    estimate_condition: bool = True,
) -> ReconstructionReport:
    """Recover the regular-grid spectrum ``(N/width) * C^{-1} * forward(windowed samples)``."""
    if samples.n != grid.n:
        raise LengthMismatch(f"{samples.n} samples for a grid of {grid.n}")
    window = WindowKind(window)
    _check_separation(samples, grid)
    rhs = forward(apply_window(samples, grid, window), grid).amplitudes
    T = from_cgamma(cgamma(grid, samples.positions))
    converged = True
    try:
        x = solve(T, rhs, opts)
    except PcgDidNotConverge as exc:
        x = exc.best
        converged = False
    rnorm = np.linalg.norm(rhs)
    residual = float(np.linalg.norm(T.matvec(x) - rhs) / rnorm) if rnorm > 0 else 0.0
    solution = Spectrum(grid, (grid.n / grid.width) * x)
    kappa = condition_number(T) if estimate_condition else float("nan")
    report = ReconstructionReport(
        solution=solution,
        condition_number=kappa,
        residual=residual,
        solver_used=opts.method,
        window_used=window,
        norm_ratio=float(np.linalg.norm(solution.amplitudes) / rnorm) if rnorm > 0 else 1.0,
        converged=converged,
        seed=seed,
    )
    if reference is not None:
        report = replace(report, relative_error=relative_error(solution, reference))
    return report


def truncated_spectrum(signal: ClosedFormSignal, grid: GridSpec, window: WindowKind, oversample: int) -> np.ndarray:
    """Transform of the windowed, truncated signal at every bin ``j`` modulo ``oversample*N``.

    The integral over the truncation interval is the trapezoid rule on
    ``oversample*N`` panels, evaluated for all bins with one FFT.  Entry
    ``j mod (oversample*N)`` holds the value at frequency ``j*freq_step``.
    """
    m = oversample * grid.n
    a, b = grid.door
    h = grid.width / m
    x = a + h * np.arange(m + 1)
    f = evaluate(signal, x) * window_values(x, grid, window)
    g = f[:m].copy()
    g[0] = 0.5 * (f[0] + f[m])
    j = np.fft.fftfreq(m, d=1.0 / m)
    return h * np.exp(-2j * np.pi * j * a / grid.width) * np.fft.fft(g)


def theoretical_error(
    signal: ClosedFormSignal,
    grid: GridSpec,
    positions,
    window: WindowKind = WindowKind.NONE,
    folds: int = 8,
    oversample: int = 64,
    opts: SolveOptions = SolveOptions(),
):
    """Leakage decomposition ``(e_reg, e_gamma, e_th)`` on the grid's bins.

    ``e_reg`` collects the folded out-of-band content seen by the regular
    grid, ``e_gamma`` the out-of-band content coupled in by the irregular
    grid, and ``e_th = e_reg - (N/width) * C^{-1} e_gamma`` is the exact gap
    between the regular-grid spectrum and the reconstruction.  Folds are
    truncated at ``|k| <= folds``.
    """
    if not isinstance(signal, ClosedFormSignal):
        raise NoClosedForm("the leakage error needs a closed-form signal")
    if folds < 1:
        raise ValueError("folds must be at least 1")
    if oversample < 16 or oversample < 2 * folds + 1:
        raise ValueError(f"oversample must be >= max(16, 2*folds+1), got {oversample}")
    x = np.asarray(positions, dtype=float)
    n = grid.n
    if x.size != n:
        raise LengthMismatch(f"{x.size} positions for a grid of {n}")
    scale = n / grid.width
    spec = truncated_spectrum(signal, grid, window, oversample)
    size = spec.size
    band = grid.indices

    def at(j):
        return spec[np.mod(j, size)]

    ks = np.array([k for k in range(-folds, folds + 1) if k != 0])
    # exp(2i*pi*k*x0/mean_step) is exact unity when x0 sits on the step lattice
    fold_phase = np.exp(2j * np.pi * ks * n * grid.x0 / grid.width)
    e_reg = scale * np.sum(fold_phase[:, None] * at(band[None, :] + n * ks[:, None]), axis=0)

    lags = np.arange(-(folds + 1) * n, (folds + 1) * n + 1)
    c_all = cgamma_at(lags, grid, x)
    zero = (folds + 1) * n  # position of lag 0
    e_gamma = np.zeros(n, dtype=complex)
    for k in ks:
        s_k = at(band + k * n)
        # coefficient C(sigma_{m - kN}) for m = -(N-1) .. N-1
        seg = c_all[zero - k * n - (n - 1): zero - k * n + n]
        e_gamma += np.convolve(seg, s_k)[n - 1: 2 * n - 1]

    T = from_cgamma(cgamma(grid, x))
    e_th = e_reg - scale * solve(T, e_gamma, opts)
    return e_reg, e_gamma, e_th


def theoretical_error_norm(
    signal: ClosedFormSignal,
    grid: GridSpec,
    positions,
    window: WindowKind = WindowKind.NONE,
    folds: int = 8,
    oversample: int = 64,
    opts: SolveOptions = SolveOptions(),
    reference: Optional[Spectrum] = None,
    check_convergence: bool = False,
):
    """``||e_th|| / max|S_reg|``; with ``check_convergence`` also the relative change under doubling.

    Returns the norm, or ``(norm, relative_change)`` when checking convergence.
    """
    if reference is None:
        reference = reference_spectrum(signal, grid, window)
    peak = np.max(np.abs(reference.amplitudes))
    _, _, e_th = theoretical_error(signal, grid, positions, window, folds, oversample, opts)
    value = float(np.linalg.norm(e_th) / peak)
    if not check_convergence:
        return value
    _, _, e_th2 = theoretical_error(signal, grid, positions, window, 2 * folds, 2 * oversample, opts)
    value2 = float(np.linalg.norm(e_th2) / peak)
    return value, abs(value2 - value) / max(value2, np.finfo(float).tiny)


def dynamic_range(report: ReconstructionReport, reference: Optional[Spectrum]) -> float:
    """``max|reference| / max|solution - reference|``, capped at 1e308."""
    if reference is None:
        raise MissingReference("dynamic range needs a reference spectrum")
    err = np.max(np.abs(report.solution.amplitudes - reference.amplitudes))
    peak = np.max(np.abs(reference.amplitudes))
    if err == 0 or peak / err > _DYNAMIC_RANGE_CAP:
        return _DYNAMIC_RANGE_CAP
    return float(peak / err)
