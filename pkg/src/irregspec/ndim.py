"""Dimension-d version: tensor frequency grids and multilevel Toeplitz operators.

Multi-indices are flattened lexicographically (last axis fastest), both for
sample points and for frequency bins.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateGrid,
    DuplicatePositions,
    GenerationFailed,
    NotPositiveDefinite,
    PcgDidNotConverge,
    ShapeMismatch,
)
from .grid import SampleSet, build_grid, make_rng, text_sink
from .nudft import compensated_phasor_sum
from .toeplitz import DENSE_LIMIT, SolveOptions, SolverMethod, pcg

__all__ = [
    "NdSampleSet",
    "NdGridSpec",
    "MultilevelToeplitz",
    "NdReport",
    "build_nd_grid",
    "nd_frequency_indices",
    "nd_frequencies",
    "nd_regular_counterpart",
    "nd_jittered_grid",
    "nd_forward",
    "nd_cgamma",
    "nd_condition_number",
    "nd_reconstruct",
    "read_nd_samples_csv",
    "write_nd_samples_csv",
    "write_nd_spectrum_csv",
]


def _lexsort_rows(x: np.ndarray) -> np.ndarray:
    # np.lexsort uses the last key as primary
    return np.lexsort(x.T[::-1])


@dataclass(frozen=True)
class NdSampleSet:
    """``prod(counts)`` points in R^d with complex values, sorted lexicographically."""

    positions: np.ndarray
    values: np.ndarray
    counts: tuple

    def __post_init__(self):
        x = np.array(self.positions, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        v = np.asarray(self.values, dtype=complex).ravel()
        counts = tuple(int(c) for c in self.counts)
        if x.ndim != 2 or x.shape[1] != len(counts):
            raise ShapeMismatch(f"positions of shape {x.shape} for {len(counts)} axes")
        if x.shape[0] != math.prod(counts) or v.size != x.shape[0]:
            raise ShapeMismatch(f"{x.shape[0]} points, {v.size} values, counts {counts}")
        if min(counts) < 2:
            raise DegenerateGrid(f"every axis needs at least 2 points, got {counts}")
        order = _lexsort_rows(x)
        x, v = x[order], v[order]
        same = np.flatnonzero(np.all(np.diff(x, axis=0) == 0, axis=1))
        if same.size:
            raise DuplicatePositions(f"points {same[0]} and {same[0] + 1} coincide at {x[same[0]]}")
        x.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "positions", x)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "counts", counts)

    @property
    def dim(self) -> int:
        return len(self.counts)

    @property
    def size(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class NdGridSpec:
    """Per-axis geometry; each axis carries the same fields as a 1D :class:`GridSpec`."""

    axes: tuple

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def counts(self) -> tuple:
        return tuple(a.n for a in self.axes)

    @property
    def size(self) -> int:
        return math.prod(self.counts)

    @property
    def x0(self) -> np.ndarray:
        return np.array([a.x0 for a in self.axes])

    @property
    def mean_step(self) -> np.ndarray:
        return np.array([a.mean_step for a in self.axes])

    @property
    def width(self) -> np.ndarray:
        return np.array([a.width for a in self.axes])

    @property
    def freq_step(self) -> np.ndarray:
        return np.array([a.freq_step for a in self.axes])

    @property
    def n0(self) -> np.ndarray:
        return np.array([a.n0 for a in self.axes])

    @property
    def scale(self) -> float:
        """``prod(N_i) / prod(width_i)``, the regular-grid diagonal of the operator."""
        return float(self.size / np.prod(self.width))

    def nyquist_ok(self, f_max: Sequence[float]) -> list:
        """Per-axis advisory ``mean_step_i <= 1/(2 f_max_i)``; not enforced anywhere."""
        return [a.mean_step <= 0.5 / f for a, f in zip(self.axes, f_max)]


def build_nd_grid(samples: NdSampleSet, periodic_periods: Optional[Sequence[Optional[float]]] = None) -> NdGridSpec:
    """Per-axis geometry from the coordinate extent along each axis.

    Without a period, ``mean_step_i = max|x_i,m - x_i,n| / (N_i - 1)``;
    with one, the 1D periodic rule is applied to that axis.
    """
    periods = [None] * samples.dim if periodic_periods is None else list(periodic_periods)
    if len(periods) != samples.dim:
        raise ShapeMismatch(f"{len(periods)} periods for {samples.dim} axes")
    axes = []
    for i, (count, p) in enumerate(zip(samples.counts, periods)):
        col = samples.positions[:, i]
        lo, hi = float(col.min()), float(col.max())
        if not hi > lo:
            raise DegenerateGrid(f"axis {i} has zero extent")
        # only the extremes matter for the geometry; linspace keeps them exact
        axes.append(build_grid(SampleSet(np.linspace(lo, hi, count), np.zeros(count)), p))
    return NdGridSpec(tuple(axes))


def _tensor_indices(ranges) -> np.ndarray:
    mesh = np.meshgrid(*ranges, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def nd_frequency_indices(grid: NdGridSpec) -> np.ndarray:
    """Integer multi-indices ``n`` of the bins, shape (size, d), lexicographic."""
    return _tensor_indices([a.indices for a in grid.axes])


def nd_frequencies(grid: NdGridSpec) -> np.ndarray:
    return nd_frequency_indices(grid) * grid.freq_step


def nd_regular_counterpart(grid: NdGridSpec) -> np.ndarray:
    return _tensor_indices([a.x0 + a.mean_step * np.arange(a.n) for a in grid.axes])


def nd_jittered_grid(counts, x0, steps, amplitude: float, rng_seed: int, max_rounds: int = 1000) -> np.ndarray:
    """Tensor grid with every coordinate jittered independently.

    Coordinates on the first and last layer of an axis stay put along that
    axis, so each axis keeps its extent; interior draws leaving the open
    extent are redrawn.
    """
    counts = tuple(int(c) for c in counts)
    x0 = np.broadcast_to(np.asarray(x0, dtype=float), (len(counts),))
    steps = np.broadcast_to(np.asarray(steps, dtype=float), (len(counts),))
    base = _tensor_indices([np.arange(c) for c in counts]).astype(float)
    idx = base.copy()
    pts = x0 + base * steps
    if amplitude == 0:
        return pts
    rng = make_rng(rng_seed)
    for axis, c in enumerate(counts):
        interior = np.flatnonzero((idx[:, axis] > 0) & (idx[:, axis] < c - 1))
        lo, hi = x0[axis], x0[axis] + (c - 1) * steps[axis]
        half = amplitude * steps[axis]
        vals = pts[interior, axis] + rng.uniform(-half, half, interior.size)
        for _ in range(max_rounds):
            bad = (vals <= lo) | (vals >= hi)
            if not bad.any():
                break
            vals[bad] = pts[interior[bad], axis] + rng.uniform(-half, half, int(bad.sum()))
        else:
            raise GenerationFailed("could not keep jittered coordinates inside the axis extent")
        pts[interior, axis] = vals
    return pts[_lexsort_rows(pts)]


def nd_forward(samples: NdSampleSet, grid: NdGridSpec) -> np.ndarray:
    """``sum_i S(x_i) exp(-2i*pi * sigma_n . x_i)`` on every bin, lexicographic order."""
    if samples.counts != grid.counts:
        raise ShapeMismatch(f"samples with counts {samples.counts} on a grid with {grid.counts}")
    return compensated_phasor_sum(samples.positions * grid.freq_step, nd_frequency_indices(grid), samples.values)


@dataclass(frozen=True)
class MultilevelToeplitz:
    """Level-d Toeplitz operator with entry ``(n, p) = C_{n-p}``.

    ``coeffs`` has shape ``(2N_1-1, ..., 2N_d-1)``; lag ``k`` is stored at
    ``k + (N-1)`` along each axis.
    """

    counts: tuple
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        expected = tuple(2 * n - 1 for n in self.counts)
        if c.shape != expected:
            raise ShapeMismatch(f"coefficient tensor {c.shape}, expected {expected}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def size(self) -> int:
        return math.prod(self.counts)

    def coefficient(self, k) -> complex:
        return complex(self.coeffs[tuple(int(ki) + n - 1 for ki, n in zip(k, self.counts))])

    def to_dense(self) -> np.ndarray:
        idx = _tensor_indices([np.arange(n) for n in self.counts])
        diff = idx[:, None, :] - idx[None, :, :] + (np.array(self.counts) - 1)
        return self.coeffs[tuple(diff[..., a] for a in range(len(self.counts)))]

    @cached_property
    def _embedding_fft(self) -> np.ndarray:
        shape = tuple(2 * n for n in self.counts)
        emb = np.zeros(shape, dtype=complex)
        # lag k >= 0 goes to k, lag k < 0 to 2N + k; lag -N is left at zero
        src = [np.arange(2 * n - 1) - (n - 1) for n in self.counts]
        dst = [np.mod(s, 2 * n) for s, n in zip(src, self.counts)]
        emb[np.ix_(*dst)] = self.coeffs
        return np.fft.fftn(emb)

    def matvec(self, v, fast: bool = True) -> np.ndarray:
        v = np.asarray(v, dtype=complex).ravel()
        if v.size != self.size:
            raise ShapeMismatch(f"vector of size {v.size} for an operator of size {self.size}")
        if not fast:
            return self.to_dense() @ v
        f = self._embedding_fft
        pad = np.zeros(f.shape, dtype=complex)
        pad[tuple(slice(0, n) for n in self.counts)] = v.reshape(self.counts)
        out = np.fft.ifftn(f * np.fft.fftn(pad))
        return out[tuple(slice(0, n) for n in self.counts)].ravel()

    def chan_eigenvalues(self) -> np.ndarray:
        """Eigenvalues (on the N_1 x ... x N_d torus) of the level-wise optimal circulant."""
        col = np.zeros(self.counts, dtype=complex)
        for corner in np.ndindex(*(2,) * len(self.counts)):
            weight = np.ones(self.counts)
            sel = []
            for axis, (bit, n) in enumerate(zip(corner, self.counts)):
                j = np.arange(n)
                w = (n - j) / n if bit == 0 else j / n
                shape = [1] * len(self.counts)
                shape[axis] = n
                weight = weight * w.reshape(shape)
                # lag j (bit 0) or j - N (bit 1), stored at lag + N - 1
                lag = j if bit == 0 else j - n
                lag = np.where(lag < -(n - 1), -(n - 1), lag)  # j=0 with bit 1 has zero weight
                sel.append(lag + n - 1)
            col = col + weight * self.coeffs[np.ix_(*sel)]
        return np.fft.fftn(col).real

    def __matmul__(self, v):
        return self.matvec(v)


def nd_cgamma(grid: NdGridSpec, positions) -> MultilevelToeplitz:
    """``C_k = (prod width_i)^-1 * sum_j exp(-2i*pi * (k * freq_step) . x_j)`` on all lags."""
    x = np.asarray(positions, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape != (grid.size, grid.dim):
        raise ShapeMismatch(f"positions of shape {x.shape} for a grid of {grid.size} points in {grid.dim}D")
    lags = _tensor_indices([np.arange(-(n - 1), n) for n in grid.counts])
    c = compensated_phasor_sum(x * grid.freq_step, lags, np.ones(x.shape[0], dtype=complex))
    c /= float(np.prod(grid.width))
    return MultilevelToeplitz(grid.counts, c.reshape(tuple(2 * n - 1 for n in grid.counts)))


def nd_condition_number(T: MultilevelToeplitz, opts: SolveOptions = SolveOptions()) -> float:
    """Dense eigensolve up to the dense limit, power/inverse iteration with PCG above it."""
    if T.size <= DENSE_LIMIT:
        ev = np.linalg.eigvalsh(T.to_dense())
        if not ev[0] > 0:
            raise NotPositiveDefinite(f"smallest eigenvalue {ev[0]:.3g}")
        return float(max(1.0, ev[-1] / ev[0]))
    rng = np.random.default_rng(0)

    def rayleigh_iteration(apply, max_iterations):
        v = rng.standard_normal(T.size) + 1j * rng.standard_normal(T.size)
        v /= np.linalg.norm(v)
        q_prev = None
        for _ in range(max_iterations):
            w = apply(v)
            q = np.vdot(v, w).real
            v = w / np.linalg.norm(w)
            if q_prev is not None and abs(q - q_prev) <= 1e-8 * q:
                break
            q_prev = q
        return q

    lam_max = rayleigh_iteration(T.matvec, 3000)
    inv_lam_min = rayleigh_iteration(lambda v: _nd_solve(T, v, opts)[0], 500)
    return float(max(1.0, lam_max * inv_lam_min))


def _circulant_inverse(eigenvalues: np.ndarray):
    inv = 1.0 / eigenvalues

    def apply(r):
        return np.fft.ifftn(inv * np.fft.fftn(r.reshape(eigenvalues.shape))).ravel()

    return apply


def _nd_solve(T: MultilevelToeplitz, rhs, opts: SolveOptions):
    """Returns ``(x, method_used, converged)``."""
    dense = opts.method is SolverMethod.DENSE or (opts.method is SolverMethod.LEVINSON and T.size <= 1024)
    if dense:
        try:
            factor = scipy.linalg.cho_factor(T.to_dense(), lower=True)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefinite(f"Cholesky failed: {exc}") from exc
        return scipy.linalg.cho_solve(factor, rhs), SolverMethod.DENSE, True
    lam = T.chan_eigenvalues()
    # the circulant approximation can lose definiteness on rough grids; fall back to plain CG
    precond = _circulant_inverse(lam) if np.all(lam > 0) else None
    try:
        x, _, _ = pcg(T.matvec, rhs, precond, tol=opts.pcg_tolerance, max_iterations=opts.max_iterations(T.size))
    except PcgDidNotConverge as exc:
        return exc.best, SolverMethod.PCG, False
    return x, SolverMethod.PCG, True


@dataclass(frozen=True)
class NdReport:
    amplitudes: np.ndarray
    grid: NdGridSpec
    condition_number: float
    residual: float
    solver_used: SolverMethod
    converged: bool = True
    relative_error: Optional[float] = None


def nd_reconstruct(
    samples: NdSampleSet,
    grid: NdGridSpec,
    opts: SolveOptions = SolveOptions(),
    reference: Optional[np.ndarray] = None,
    estimate_condition: bool = True,
) -> NdReport:
    """``prod(N_i)/prod(width_i) * C^{-1} * nd_forward(samples)``.

    In one dimension this defers to :func:`irregspec.reconstruct.reconstruct`.
    For d >= 2 the Levinson option maps to a dense solve up to 1024 points
    and to PCG with a multilevel circulant preconditioner above.
    """
    if samples.counts != grid.counts:
        raise ShapeMismatch(f"samples with counts {samples.counts} on a grid with {grid.counts}")
    if grid.dim == 1:
        from .reconstruct import reconstruct

        report = reconstruct(
            SampleSet(samples.positions[:, 0], samples.values), grid.axes[0], opts,
            estimate_condition=estimate_condition,
        )
        out = NdReport(
            report.solution.amplitudes, grid, report.condition_number, report.residual,
            report.solver_used, report.converged,
        )
    else:
        rhs = nd_forward(samples, grid)
        T = nd_cgamma(grid, samples.positions)
        x, used, converged = _nd_solve(T, rhs, opts)
        residual = float(np.linalg.norm(T.matvec(x) - rhs) / np.linalg.norm(rhs))
        kappa = nd_condition_number(T, opts) if estimate_condition else float("nan")
        out = NdReport(grid.scale * x, grid, kappa, residual, used, converged)
    if reference is not None:
        ref = np.asarray(reference).ravel()
        out = replace(out, relative_error=float(np.linalg.norm(out.amplitudes - ref) / np.max(np.abs(ref))))
    return out


def read_nd_samples_csv(path, counts=None) -> NdSampleSet:
    """Read ``x1,...,xd,re,im`` rows; without ``counts`` a square tensor grid is assumed."""
    with open(Path(path), newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        rows = [r for r in reader if r]
    d = len(header) - 2
    if d < 1 or header != [f"x{i + 1}" for i in range(d)] + ["re", "im"]:
        raise ValueError(f"{path}: expected header x1,...,xd,re,im, got {','.join(header)}")
    data = np.array(rows, dtype=float).reshape(-1, d + 2)
    if counts is None:
        side = round(data.shape[0] ** (1.0 / d))
        if side ** d != data.shape[0]:
            raise ShapeMismatch(f"{path}: {data.shape[0]} rows is not a {d}-dimensional square grid")
        counts = (side,) * d
    return NdSampleSet(data[:, :d], data[:, d] + 1j * data[:, d + 1], tuple(counts))


def write_nd_samples_csv(path, samples: NdSampleSet) -> None:
    names = [f"x{i + 1}" for i in range(samples.dim)]
    with text_sink(path) as fh:
        fh.write(",".join(names + ["re", "im"]) + "\n")
        for x, v in zip(samples.positions, samples.values):
            fields = [repr(float(c)) for c in x] + [repr(float(v.real)), repr(float(v.imag))]
            fh.write(",".join(fields) + "\n")


def write_nd_spectrum_csv(path, grid: NdGridSpec, amplitudes) -> None:
    """``sigma1,...,sigmad,re,im`` rows in lexicographic bin order."""
    names = [f"sigma{i + 1}" for i in range(grid.dim)]
    amps = np.asarray(amplitudes, dtype=complex).ravel()
    with text_sink(path) as fh:
        fh.write(",".join(names + ["re", "im"]) + "\n")
        for s, a in zip(nd_frequencies(grid), amps):
            fields = [repr(float(c)) for c in s] + [repr(float(a.real)), repr(float(a.imag))]
            fh.write(",".join(fields) + "\n")
