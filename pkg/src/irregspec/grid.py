"""Sampling geometry: sample sets, derived grids and jittered grid generation."""

from __future__ import annotations

import contextlib
import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DegenerateGrid, DuplicatePositions, GenerationFailed, WindowTooShort

__all__ = [
    "SampleSet",
    "GridSpec",
    "build_grid",
    "frequencies",
    "regular_counterpart",
    "jittered_grid",
    "make_rng",
    "read_samples_csv",
    "write_samples_csv",
]

# Relative slack used when the span is an exact multiple of the period up to rounding.
_PERIOD_SLACK = 1e-9


def text_sink(target):
    """Context manager yielding a writable text stream for a path or an open stream."""
    if hasattr(target, "write"):
        return contextlib.nullcontext(target)
    return open(Path(target), "w", newline="", encoding="utf-8")


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SampleSet:
    """Sample positions with complex values, normalized to ascending order.

    Positions are sorted on construction (values follow) so that I/O is
    deterministic; coincident positions are rejected.
    """

    positions: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.positions, dtype=float).ravel()
        v = np.asarray(self.values, dtype=complex).ravel()
        if x.shape != v.shape:
            raise DegenerateGrid(f"{x.size} positions but {v.size} values")
        if x.size < 2:
            raise DegenerateGrid(f"need at least 2 samples, got {x.size}")
        if not np.all(np.isfinite(x)):
            raise DegenerateGrid("non-finite sample position")
        order = np.argsort(x, kind="stable")
        x, v = x[order], v[order]
        dup = np.flatnonzero(np.diff(x) == 0)
        if dup.size:
            i = int(dup[0])
            raise DuplicatePositions(f"samples {i} and {i + 1} share position {x[i]!r}")
        object.__setattr__(self, "positions", _frozen(x))
        object.__setattr__(self, "values", _frozen(v))

    @property
    def n(self) -> int:
        return self.positions.size

    def __len__(self) -> int:
        return self.n

    def with_values(self, values) -> "SampleSet":
        return SampleSet(self.positions, values)


@dataclass(frozen=True)
class GridSpec:
    """Geometry derived from a sample set.

    Attributes
    ----------
    n : int
        Number of samples N.
    x0 : float
        First sample position.
    mean_step : float
        Average sampling interval.
    width : float
        Window width, ``n * mean_step``.
    freq_step : float
        Spectral step ``1 / width``.
    n0 : int
        Index of the lowest frequency bin.
    periodic_period : float or None
        Signal period P when the periodic-window rule was used.
    """

    n: int
    x0: float
    mean_step: float
    width: float
    freq_step: float
    n0: int
    periodic_period: Optional[float] = None

    @classmethod
    def from_geometry(cls, n: int, x0: float, width: float, periodic_period=None) -> "GridSpec":
        if n < 2:
            raise DegenerateGrid(f"need at least 2 samples, got {n}")
        if not width > 0:
            raise DegenerateGrid(f"width must be positive, got {width}")
        return cls(
            n=int(n),
            x0=float(x0),
            mean_step=width / n,
            width=float(width),
            freq_step=1.0 / width,
            n0=-(n // 2),
            periodic_period=periodic_period,
        )

    @property
    def periodic(self) -> bool:
        return self.periodic_period is not None

    @property
    def door(self) -> tuple[float, float]:
        """Truncation interval ``[x0 - mean_step/2, x0 + width - mean_step/2]``."""
        a = self.x0 - 0.5 * self.mean_step
        return a, a + self.width

    @property
    def door_center(self) -> float:
        return self.x0 - 0.5 * self.mean_step + 0.5 * self.width

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.n0, self.n0 + self.n)


def build_grid(samples: SampleSet, periodic_period: Optional[float] = None) -> GridSpec:
    """Derive the grid geometry of ``samples``.

    Without a period the endpoints fix everything: ``mean_step = span/(N-1)``
    and ``width = N*mean_step``.  With a period ``P`` the width is the
    smallest multiple of ``P`` strictly larger than the span, and
    ``mean_step = width/N``.
    """
    x = samples.positions
    n = x.size
    if n < 2:
        raise DegenerateGrid(f"need at least 2 samples, got {n}")
    span = float(x[-1] - x[0])
    if periodic_period is None:
        mean_step = span / (n - 1)
        if not math.isfinite(1.0 / (n * mean_step)):
            raise DegenerateGrid(f"sample span {span!r} is too small to define a spectral step")
        return GridSpec(
            n=n,
            x0=float(x[0]),
            mean_step=mean_step,
            width=n * mean_step,
            freq_step=1.0 / (n * mean_step),
            n0=-(n // 2),
        )

    p = float(periodic_period)
    if not p > 0:
        raise ValueError(f"period must be positive, got {periodic_period}")
    periods = math.floor(span / p) + 1
    width = periods * p
    if width - span <= _PERIOD_SLACK * width:
        # span was a multiple of P up to rounding; first and last sample would alias
        periods += 1
        width = periods * p
    if not width > span:
        raise WindowTooShort(f"periodic width {width} does not exceed sample span {span}")
    return GridSpec.from_geometry(n, float(x[0]), width, periodic_period=p)


def frequencies(grid: GridSpec) -> np.ndarray:
    """Ascending frequencies ``n * freq_step`` for ``n = n0 .. n0+N-1``."""
    return grid.indices * grid.freq_step


def regular_counterpart(grid: GridSpec) -> np.ndarray:
    """Equispaced positions ``x0 + k*mean_step`` sharing the grid geometry."""
    return grid.x0 + grid.mean_step * np.arange(grid.n)


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator; bit-reproducible across platforms for a given seed."""
    return np.random.Generator(np.random.PCG64(seed))


def jittered_grid(
    n: int,
    x0: float,
    step: float,
    amplitude: float,
    rng_seed: int,
    max_rounds: int = 1000,
) -> np.ndarray:
    """Regular grid with uniform jitter on the interior points.

    Interior positions are ``x0 + k*step + u_k`` with ``u_k`` uniform on
    ``(-amplitude*step, amplitude*step)``.  The first and last points stay
    put, and interior draws that land outside the open interval between
    them or collide exactly with another point are redrawn.  The result is
    sorted.
    """
    if n < 2:
        raise DegenerateGrid(f"need at least 2 samples, got {n}")
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    if amplitude < 0:
        raise ValueError(f"amplitude must be non-negative, got {amplitude}")
    base = x0 + step * np.arange(n)
    if amplitude == 0 or n == 2:
        return base
    rng = make_rng(rng_seed)
    lo, hi = base[0], base[-1]
    interior = base[1:-1]
    half = amplitude * step
    pos = interior + rng.uniform(-half, half, size=interior.size)
    for _ in range(max_rounds):
        bad = (pos <= lo) | (pos >= hi)
        order = np.argsort(pos, kind="stable")
        ties = np.flatnonzero(np.diff(pos[order]) == 0)
        bad[order[ties + 1]] = True
        if not bad.any():
            out = np.concatenate(([lo], np.sort(pos), [hi]))
            return out
        idx = np.flatnonzero(bad)
        pos[idx] = interior[idx] + rng.uniform(-half, half, size=idx.size)
    raise GenerationFailed(f"could not place {n} distinct jittered points after {max_rounds} rounds")


def read_samples_csv(path) -> SampleSet:
    """Read a ``x,re,im`` CSV file."""
    with open(Path(path), newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        if header != ["x", "re", "im"]:
            raise ValueError(f"{path}: expected header x,re,im, got {','.join(header)}")
        rows = [r for r in reader if r]
    data = np.array(rows, dtype=float).reshape(-1, 3)
    return SampleSet(data[:, 0], data[:, 1] + 1j * data[:, 2])


def write_samples_csv(path, samples: SampleSet) -> None:
    with text_sink(path) as fh:
        fh.write("x,re,im\n")
        for x, v in zip(samples.positions, samples.values):
            fh.write(f"{float(x)!r},{float(v.real)!r},{float(v.imag)!r}\n")
