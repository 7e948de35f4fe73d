"""Closed-form test signals with evaluators and, for tone mixes, exact line spectra."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import OffGridFrequency
from .grid import GridSpec, SampleSet
from .nudft import Spectrum

__all__ = [
    "SignalKind",
    "ClosedFormSignal",
    "periodic_mix",
    "interferogram",
    "ricker",
    "custom_tones",
    "evaluate",
    "sample_signal",
    "analytic_line_spectrum",
]


class SignalKind(str, enum.Enum):
    PERIODIC_MIX = "periodic_mix"
    INTERFEROGRAM = "interferogram"
    RICKER = "ricker"
    CUSTOM_TONES = "custom_tones"


@dataclass(frozen=True)
class ClosedFormSignal:
    """A real-valued signal with a pointwise evaluator.

    Tone signals (``periodic_mix``, ``custom_tones``) are sums of
    ``amplitude * cos(2*pi*f*t)``.  ``interferogram`` is a carrier times a
    sinc envelope and ``ricker`` a Gaussian times ``1 - 2u^2``.
    """

    kind: SignalKind
    tone_frequencies: tuple = ()
    tone_amplitudes: tuple = ()
    period: Optional[float] = None
    carrier_period: float = 0.005
    envelope_scale: float = 0.023
    width: float = 1.0

    @property
    def f_max(self) -> float:
        """Band limit in units of 1/x (inf for the Ricker wavelet, which is not strictly band-limited)."""
        if self.kind in (SignalKind.PERIODIC_MIX, SignalKind.CUSTOM_TONES):
            return float(max(self.tone_frequencies))
        if self.kind is SignalKind.INTERFEROGRAM:
            return self.band[1]
        return float("inf")

    @property
    def band(self) -> tuple[float, float]:
        """Positive-frequency support of the untruncated interferogram.

        The carrier is ``1/carrier_period`` and the door has full width
        ``1/envelope_scale`` (43.48 Hz for the default 0.023 s, usually
        quoted as 44 Hz).
        """
        if self.kind is not SignalKind.INTERFEROGRAM:
            raise ValueError(f"{self.kind.value} has no door-shaped band")
        f0 = 1.0 / self.carrier_period
        half = 0.5 / self.envelope_scale
        return f0 - half, f0 + half

    def __call__(self, t):
        return evaluate(self, t)


def periodic_mix() -> ClosedFormSignal:
    """Four harmonics of 100/3 Hz: periods 2.5, 5, 10 and 15 ms with amplitudes 1, 1, 2, 1."""
    periods = (0.0025, 0.005, 0.01, 0.015)
    return ClosedFormSignal(
        SignalKind.PERIODIC_MIX,
        tone_frequencies=tuple(1.0 / p for p in periods),
        tone_amplitudes=(1.0, 1.0, 2.0, 1.0),
        period=0.03,
    )


def interferogram(carrier_period: float = 0.005, envelope_scale: float = 0.023) -> ClosedFormSignal:
    return ClosedFormSignal(
        SignalKind.INTERFEROGRAM, carrier_period=carrier_period, envelope_scale=envelope_scale
    )


def ricker(width: float = 1.0) -> ClosedFormSignal:
    return ClosedFormSignal(SignalKind.RICKER, width=width)


def custom_tones(frequencies, amplitudes, period: Optional[float] = None) -> ClosedFormSignal:
    freqs = tuple(float(f) for f in frequencies)
    amps = tuple(float(a) for a in amplitudes)
    if len(freqs) != len(amps) or not freqs:
        raise ValueError("need matching, non-empty frequency and amplitude lists")
    return ClosedFormSignal(SignalKind.CUSTOM_TONES, freqs, amps, period=period)


def evaluate(signal: ClosedFormSignal, t):
    """Pointwise value as a complex array (imaginary part zero)."""
    t = np.asarray(t, dtype=float)
    kind = signal.kind
    if kind in (SignalKind.PERIODIC_MIX, SignalKind.CUSTOM_TONES):
        out = np.zeros(t.shape)
        for f, a in zip(signal.tone_frequencies, signal.tone_amplitudes):
            out = out + a * np.cos(2 * np.pi * f * t)
    elif kind is SignalKind.INTERFEROGRAM:
        out = np.cos(2 * np.pi * t / signal.carrier_period) * np.sinc(t / signal.envelope_scale)
    elif kind is SignalKind.RICKER:
        u2 = (np.pi * t / signal.width) ** 2
        out = np.exp(-u2) * (1.0 - 2.0 * u2)
    else:  # pragma: no cover
        raise ValueError(f"unknown signal kind {kind}")
    return out.astype(complex)


def sample_signal(signal: ClosedFormSignal, positions) -> SampleSet:
    x = np.asarray(positions, dtype=float)
    return SampleSet(x, evaluate(signal, x))


def analytic_line_spectrum(signal: ClosedFormSignal, grid: GridSpec) -> Spectrum:
    """Exact spectrum of a tone mix sampled on the grid's regular counterpart.

    Each cosine of frequency ``f`` contributes ``(N/2)*a`` at bins ``+-f/freq_step``.
    Tones above the grid's Nyquist bin fold back by multiples of ``N``; the
    folded line picks up the phase ``exp(2i*pi*q*x0/mean_step)`` for a fold
    of ``q*N`` bins (unity when ``x0`` is a multiple of the step).
    """
    if signal.kind not in (SignalKind.PERIODIC_MIX, SignalKind.CUSTOM_TONES):
        raise ValueError(f"{signal.kind.value} has no line spectrum")
    n = grid.n
    amps = np.zeros(n, dtype=complex)
    for f, a in zip(signal.tone_frequencies, signal.tone_amplitudes):
        m = f * grid.width
        k = round(m)
        if abs(m - k) > 1e-9 * max(1.0, abs(m)):
            raise OffGridFrequency(f"{f} is not a multiple of the spectral step {grid.freq_step}")
        for line in (k, -k):
            folded = (line - grid.n0) % n + grid.n0
            q = (line - folded) // n
            phase = np.exp(2j * np.pi * q * n * grid.x0 / grid.width) if q else 1.0
            amps[folded - grid.n0] += 0.5 * n * a * phase
    return Spectrum(grid, amps)
