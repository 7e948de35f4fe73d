"""Forward nonuniform DFT and the exponential-sum coefficients of the Toeplitz operator."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import LengthMismatch
from .grid import GridSpec, SampleSet, frequencies, text_sink

__all__ = [
    "Spectrum",
    "CGammaCoefficients",
    "phasor_sum",
    "compensated_phasor_sum",
    "forward",
    "cgamma",
    "cgamma_at",
    "read_spectrum_csv",
    "write_spectrum_csv",
]

# Cap on the number of phase entries materialized per block.
_BLOCK_ELEMENTS = 1 << 20


def compensated_phasor_sum(scaled_positions, freq_index, values) -> np.ndarray:
    """Kahan-accumulated ``sum_k values[k] * exp(-2i*pi * <freq_index[f], scaled_positions[k]>)``.

    ``scaled_positions`` has shape (M, d) (positions already multiplied by
    the per-axis frequency step) and ``freq_index`` has shape (F, d).
    Terms are added in ascending ``k`` order for every output frequency.
    Phases are reduced to ``[-1/2, 1/2]`` turns before the exponential; no
    angle recurrence is used.
    """
    xs = np.asarray(scaled_positions, dtype=float)
    idx = np.asarray(freq_index, dtype=float)
    v = np.asarray(values, dtype=complex)
    nfreq = idx.shape[0]
    total = np.zeros(nfreq, dtype=complex)
    comp = np.zeros(nfreq, dtype=complex)
    block = max(1, _BLOCK_ELEMENTS // max(1, nfreq))
    for start in range(0, xs.shape[0], block):
        turns = xs[start:start + block] @ idx.T
        turns -= np.rint(turns)
        terms = v[start:start + block, None] * np.exp(-2j * np.pi * turns)
        for term in terms:
            y = term - comp
            t = total + y
            comp = (t - total) - y
            total = t
    return total


def phasor_sum(freq_index, freq_step: float, positions, values=None) -> np.ndarray:
    """Evaluate ``sum_k values[k] * exp(-2i*pi*freq_index*freq_step*x_k)`` in 1D."""
    idx = np.asarray(freq_index, dtype=float)
    x = np.asarray(positions, dtype=float)
    v = np.ones(x.size, dtype=complex) if values is None else np.asarray(values, dtype=complex)
    if v.shape != x.shape:
        raise LengthMismatch(f"{x.size} positions but {v.size} values")
    out = compensated_phasor_sum((x * freq_step)[:, None], idx.reshape(-1, 1), v)
    return out.reshape(idx.shape)


@dataclass(frozen=True)
class Spectrum:
    """Complex amplitudes on the frequency grid ``n * freq_step``."""

    grid: GridSpec
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).ravel()
        if a.size != self.grid.n:
            raise LengthMismatch(f"spectrum has {a.size} amplitudes for a grid of {self.grid.n}")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @property
    def frequencies(self) -> np.ndarray:
        return frequencies(self.grid)

    def at_index(self, n: int) -> complex:
        """Amplitude at bin ``n`` (``n0 <= n < n0 + N``)."""
        return complex(self.amplitudes[n - self.grid.n0])


@dataclass(frozen=True)
class CGammaCoefficients:
    """``C_k`` for ``k = 0 .. N-1``; negative lags follow ``C_{-k} = conj(C_k)``."""

    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).ravel()
        if c.size != self.grid.n:
            raise LengthMismatch(f"{c.size} coefficients for a grid of {self.grid.n}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __getitem__(self, k: int) -> complex:
        if k < 0:
            return complex(np.conj(self.coeffs[-k]))
        return complex(self.coeffs[k])

    def lags(self) -> np.ndarray:
        """Full sequence for ``k = -(N-1) .. N-1``."""
        c = self.coeffs
        return np.concatenate((np.conj(c[:0:-1]), c))


def forward(samples: SampleSet, grid: GridSpec) -> Spectrum:
    """Direct transform of irregular samples on the grid's frequencies."""
    if samples.n != grid.n:
        raise LengthMismatch(f"{samples.n} samples for a grid of {grid.n}")
    amps = phasor_sum(grid.indices, grid.freq_step, samples.positions, samples.values)
    return Spectrum(grid, amps)


def cgamma_at(freq_index, grid: GridSpec, positions) -> np.ndarray:
    """``C(sigma_k) = (1/width) * sum_j exp(-2i*pi*k*freq_step*x_j)`` at arbitrary integer ``k``."""
    return phasor_sum(freq_index, grid.freq_step, positions) / grid.width


def cgamma(grid: GridSpec, positions) -> CGammaCoefficients:
    x = np.asarray(positions, dtype=float)
    if x.size != grid.n:
        raise LengthMismatch(f"{x.size} positions for a grid of {grid.n}")
    return CGammaCoefficients(grid, cgamma_at(np.arange(grid.n), grid, x))


def write_spectrum_csv(path, spectrum: Spectrum) -> None:
    with text_sink(path) as fh:
        fh.write("sigma,re,im\n")
        for s, a in zip(spectrum.frequencies, spectrum.amplitudes):
            fh.write(f"{float(s)!r},{float(a.real)!r},{float(a.imag)!r}\n")


def read_spectrum_csv(path, grid: GridSpec) -> Spectrum:
    """Read a ``sigma,re,im`` file and check it matches ``grid``'s frequencies."""
    with open(Path(path), newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        if header != ["sigma", "re", "im"]:
            raise ValueError(f"{path}: expected header sigma,re,im, got {','.join(header)}")
        rows = [r for r in reader if r]
    data = np.array(rows, dtype=float).reshape(-1, 3)
    if data.shape[0] != grid.n:
        raise LengthMismatch(f"{path}: {data.shape[0]} rows for a grid of {grid.n}")
    if not np.allclose(data[:, 0], frequencies(grid), rtol=1e-9, atol=1e-12 * grid.freq_step * grid.n):
        raise ValueError(f"{path}: frequencies do not match the sample grid")
    return Spectrum(grid, data[:, 1] + 1j * data[:, 2])
