"""Hermitian positive-definite Toeplitz operators and their solvers.

The operator has entries ``T[i, j] = c[i - j]`` with ``c[-k] = conj(c[k])``;
only the first column is stored.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .errors import LengthMismatch, NonHermitianInput, NotPositiveDefinite, PcgDidNotConverge
from .grid import GridSpec
from .nudft import CGammaCoefficients

__all__ = [
    "SolverMethod",
    "SolveOptions",
    "HermitianToeplitz",
    "from_cgamma",
    "levinson",
    "levinson_predictor",
    "GohbergSemenculInverse",
    "pcg",
    "chan_eigenvalues",
    "solve",
    "matvec",
    "extreme_eigenvalues",
    "condition_number",
    "vandermonde",
    "determinant_identity_check",
]

# Levinson breakdown thresholds.
_MIN_PREDICTION_ERROR = 1e-300
_MAX_REFLECTION = 1.0 - 1e-14

# Largest size for which a dense matrix is formed.
DENSE_LIMIT = 2048


class SolverMethod(str, enum.Enum):
    LEVINSON = "levinson"
    PCG = "pcg"
    DENSE = "dense"


@dataclass(frozen=True)
class SolveOptions:
    method: SolverMethod = SolverMethod.LEVINSON
    pcg_tolerance: float = 1e-12
    # None means 5*N
    pcg_max_iterations: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "method", SolverMethod(self.method))
        if not self.pcg_tolerance > 0:
            raise ValueError(f"pcg_tolerance must be positive, got {self.pcg_tolerance}")
        if self.pcg_max_iterations is not None and self.pcg_max_iterations < 1:
            raise ValueError("pcg_max_iterations must be at least 1")

    def max_iterations(self, n: int) -> int:
        return self.pcg_max_iterations if self.pcg_max_iterations is not None else 5 * n


def _next_pow2(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


@dataclass(frozen=True)
class HermitianToeplitz:
    """Hermitian Toeplitz matrix given by its first column."""

    first_column: np.ndarray

    def __post_init__(self):
        c = np.array(self.first_column, dtype=complex).ravel()
        if c.size < 1:
            raise LengthMismatch("empty first column")
        if abs(c[0].imag) > 1e-12 * abs(c[0].real):
            raise NonHermitianInput(f"diagonal entry {c[0]} is not real")
        if not c[0].real > 0:
            raise NotPositiveDefinite(f"diagonal entry {c[0].real} is not positive")
        c[0] = c[0].real
        c.setflags(write=False)
        object.__setattr__(self, "first_column", c)

    @property
    def n(self) -> int:
        return self.first_column.size

    def to_dense(self) -> np.ndarray:
        c = self.first_column
        return scipy.linalg.toeplitz(c, np.conj(c))

    @cached_property
    def _embedding_fft(self) -> np.ndarray:
        n = self.n
        size = _next_pow2(2 * n)
        col = np.zeros(size, dtype=complex)
        col[:n] = self.first_column
        col[size - n + 1:] = np.conj(self.first_column[:0:-1])
        return np.fft.fft(col)

    def matvec(self, v, fast: bool = True) -> np.ndarray:
        return matvec(self, v, fast=fast)

    def __matmul__(self, v):
        return self.matvec(v)


def from_cgamma(coeffs: CGammaCoefficients) -> HermitianToeplitz:
    """Operator with entries ``C_{i-j}`` built from the exponential-sum coefficients."""
    return HermitianToeplitz(coeffs.coeffs)


def matvec(T: HermitianToeplitz, v, fast: bool = True) -> np.ndarray:
    """``y_i = sum_j c_{i-j} v_j``.

    The fast path embeds ``T`` in a circulant of power-of-two size at least
    ``2N``; the naive path is the O(N^2) double loop written with numpy.
    """
    v = np.asarray(v, dtype=complex)
    n = T.n
    if v.shape != (n,):
        raise LengthMismatch(f"vector of shape {v.shape} for an operator of size {n}")
    if not fast:
        c = T.first_column
        lags = np.concatenate((np.conj(c[:0:-1]), c))  # index k + n - 1
        out = np.empty(n, dtype=complex)
        for i in range(n):
            out[i] = np.dot(lags[i + n - 1:i - 1 if i > 0 else None:-1], v)
        return out
    f = T._embedding_fft
    pad = np.zeros(f.size, dtype=complex)
    pad[:n] = v
    return np.fft.ifft(f * np.fft.fft(pad))[:n]


def _breakdown(k: int, mu: complex, err: float):
    if abs(mu) >= _MAX_REFLECTION or not err > _MIN_PREDICTION_ERROR:
        raise NotPositiveDefinite(
            f"Levinson breakdown at order {k}: |reflection|={abs(mu):.17g}, prediction error={err:.3g}"
        )


def levinson_predictor(T: HermitianToeplitz):
    """Durbin recursion for the normalized predictor.

    Returns ``(a, err, reflections)`` with ``a[0] = 1`` and
    ``T @ a = err * e_0``.
    """
    c = T.first_column
    n = T.n
    a = np.zeros(n, dtype=complex)
    a[0] = 1.0
    err = c[0].real
    refl = np.zeros(max(n - 1, 0), dtype=complex)
    for k in range(1, n):
        g = np.dot(c[k:0:-1], a[:k])
        mu = -g / err
        err_next = err * (1.0 - (mu.real * mu.real + mu.imag * mu.imag))
        _breakdown(k, mu, err_next)
        a[:k + 1] = a[:k + 1] + mu * np.conj(a[k::-1])
        err = err_next
        refl[k - 1] = mu
    return a, err, refl


def levinson(T: HermitianToeplitz, b) -> np.ndarray:
    """Solve ``T x = b`` with the Levinson recursion in O(N^2)."""
    b = np.asarray(b, dtype=complex)
    n = T.n
    if b.shape != (n,):
        raise LengthMismatch(f"right-hand side of shape {b.shape} for an operator of size {n}")
    c = T.first_column
    a = np.zeros(n, dtype=complex)
    a[0] = 1.0
    x = np.zeros(n, dtype=complex)
    err = c[0].real
    x[0] = b[0] / err
    for k in range(1, n):
        ck = c[k:0:-1]
        mu = -np.dot(ck, a[:k]) / err
        err_next = err * (1.0 - (mu.real * mu.real + mu.imag * mu.imag))
        _breakdown(k, mu, err_next)
        a[:k + 1] = a[:k + 1] + mu * np.conj(a[k::-1])
        err = err_next
        lam = (b[k] - np.dot(ck, x[:k])) / err
        x[:k + 1] += lam * np.conj(a[k::-1])
    return x


class GohbergSemenculInverse:
    """Fast application of ``T^{-1}`` from one Levinson pass.

    Uses ``T^{-1} = (A A^* - B B^*) / err`` where ``A`` and ``B`` are lower
    triangular Toeplitz matrices built from the predictor, so each product
    costs a handful of FFTs.
    """

    def __init__(self, T: HermitianToeplitz):
        a, err, _ = levinson_predictor(T)
        n = T.n
        self.n = n
        self.err = err
        size = _next_pow2(2 * n)
        self._size = size
        b = np.zeros(n, dtype=complex)
        b[1:] = np.conj(a[:0:-1])
        self._fa = np.fft.fft(a, size)
        self._fb = np.fft.fft(b, size)
        self._fa_c = np.fft.fft(np.conj(a), size)
        self._fb_c = np.fft.fft(np.conj(b), size)

    def _lower(self, fv, z):
        return np.fft.ifft(fv * np.fft.fft(z, self._size))[:self.n]

    def _lower_adjoint(self, fv_conj, z):
        # L(v)^* = J L(conj v) J
        return self._lower(fv_conj, z[::-1])[::-1]

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        u = self._lower(self._fa, self._lower_adjoint(self._fa_c, z))
        w = self._lower(self._fb, self._lower_adjoint(self._fb_c, z))
        return (u - w) / self.err


def chan_eigenvalues(first_column) -> np.ndarray:
    """Eigenvalues of T. Chan's optimal circulant approximation of a Hermitian Toeplitz matrix."""
    c = np.asarray(first_column, dtype=complex)
    n = c.size
    j = np.arange(n)
    wrapped = np.zeros(n, dtype=complex)
    wrapped[1:] = np.conj(c[:0:-1])  # c_{j-N} = conj(c_{N-j})
    col = ((n - j) * c + j * wrapped) / n
    return np.fft.fft(col).real


def pcg(
    apply_a: Callable[[np.ndarray], np.ndarray],
    b,
    apply_m_inv: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    tol: float = 1e-12,
    max_iterations: int = 1000,
    x0=None,
):
    """Preconditioned conjugate gradients for Hermitian PD systems.

    Returns ``(x, iterations, relative_residual)``.  Raises
    :class:`PcgDidNotConverge` (carrying the best iterate) when the
    iteration cap is reached.
    """
    b = np.asarray(b, dtype=complex)
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return np.zeros_like(b), 0, 0.0
    ident = (lambda r: r) if apply_m_inv is None else apply_m_inv
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=complex)
    r = b - apply_a(x) if x0 is not None else b.copy()
    res = np.linalg.norm(r) / bnorm
    best, best_res = x.copy(), res
    if res <= tol:
        return x, 0, res
    z = ident(r)
    p = z.copy()
    rz = np.vdot(r, z)
    for it in range(1, max_iterations + 1):
        ap = apply_a(p)
        pap = np.vdot(p, ap).real
        if not pap > 0:
            raise NotPositiveDefinite(f"non-positive curvature p^* A p = {pap:.3g} at iteration {it}")
        alpha = rz / pap
        x = x + alpha * p
        r = r - alpha * ap
        res = np.linalg.norm(r) / bnorm
        if res < best_res:
            best, best_res = x.copy(), res
        if res <= tol:
            return x, it, res
        z = ident(r)
        rz_next = np.vdot(r, z)
        p = z + (rz_next / rz) * p
        rz = rz_next
    raise PcgDidNotConverge(
        f"PCG stopped after {max_iterations} iterations at relative residual {best_res:.3g}",
        best=best,
        iterations=max_iterations,
        residual=best_res,
    )


def _circulant_preconditioner(T: HermitianToeplitz):
    lam = chan_eigenvalues(T.first_column)
    if not np.all(lam > 0):
        return None
    inv = 1.0 / lam
    return lambda r: np.fft.ifft(inv * np.fft.fft(r))


def solve(T: HermitianToeplitz, rhs, opts: SolveOptions = SolveOptions()) -> np.ndarray:
    """Solve ``T x = rhs`` with the method selected in ``opts``."""
    rhs = np.asarray(rhs, dtype=complex)
    if rhs.shape != (T.n,):
        raise LengthMismatch(f"right-hand side of shape {rhs.shape} for an operator of size {T.n}")
    if opts.method is SolverMethod.LEVINSON:
        return levinson(T, rhs)
    if opts.method is SolverMethod.DENSE:
        if T.n > DENSE_LIMIT:
            raise ValueError(f"dense solve limited to N <= {DENSE_LIMIT}, got {T.n}")
        try:
            factor = scipy.linalg.cho_factor(T.to_dense(), lower=True)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefinite(f"Cholesky failed: {exc}") from exc
        return scipy.linalg.cho_solve(factor, rhs)
    x, _, _ = pcg(
        T.matvec,
        rhs,
        _circulant_preconditioner(T),
        tol=opts.pcg_tolerance,
        max_iterations=opts.max_iterations(T.n),
    )
    return x


def _rayleigh_iteration(apply, start, rtol, max_iterations):
    v = start / np.linalg.norm(start)
    est = None
    for _ in range(max_iterations):
        w = apply(v)
        q = np.vdot(v, w).real
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        v = w / nw
        if est is not None and abs(q - est) <= rtol * abs(q):
            return q
        est = q
    return est


def extreme_eigenvalues(T: HermitianToeplitz, rtol: float = 1e-8, max_iterations: int = 3000, seed: int = 0):
    """Estimate ``(lambda_min, lambda_max)``.

    ``lambda_max`` comes from power iteration with the fast matvec and
    ``lambda_min`` from inverse iteration, where each inverse product reuses
    a single Levinson pass through the Gohberg-Semencul formula.  Both use
    Rayleigh quotients.
    """
    rng = np.random.default_rng(seed)
    start = rng.standard_normal(T.n) + 1j * rng.standard_normal(T.n)
    lam_max = _rayleigh_iteration(T.matvec, start, rtol, max_iterations)
    inv = GohbergSemenculInverse(T)
    inv_max = _rayleigh_iteration(inv, start, rtol, max_iterations)
    if not inv_max > 0:
        raise NotPositiveDefinite(f"inverse iteration produced Rayleigh quotient {inv_max}")
    return 1.0 / inv_max, lam_max


def condition_number(T: HermitianToeplitz, **kwargs) -> float:
    """Spectral condition number ``lambda_max / lambda_min``."""
    lo, hi = extreme_eigenvalues(T, **kwargs)
    return max(1.0, hi / lo)


def vandermonde(positions, grid: GridSpec) -> np.ndarray:
    """``V[k, j] = exp(-2i*pi*k*freq_step*x_j)`` for ``k = 0 .. N-1``."""
    x = np.asarray(positions, dtype=float)
    turns = np.outer(np.arange(grid.n), x * grid.freq_step)
    return np.exp(-2j * np.pi * (turns - np.rint(turns)))


def determinant_identity_check(positions, grid: GridSpec):
    """Dense determinant of the operator next to its closed-form product.

    The closed form is ``width**-N * prod_{m>n} |1 - exp(2i*pi*freq_step*(x_m - x_n))|**2``.
    Intended for N <= 8.
    """
    from .nudft import cgamma

    x = np.asarray(positions, dtype=float)
    if x.size > 8:
        raise ValueError("determinant check is limited to N <= 8")
    T = from_cgamma(cgamma(grid, x))
    det_dense = float(np.linalg.det(T.to_dense()).real)
    m, n = np.triu_indices(x.size, k=1)
    d = x[n] - x[m]
    factors = np.abs(1.0 - np.exp(2j * np.pi * grid.freq_step * d)) ** 2
    det_formula = float(math.prod(factors.tolist()) * grid.width ** (-x.size))
    return det_dense, det_formula
