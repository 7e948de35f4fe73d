import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import dense_operator
from irregspec.errors import LengthMismatch, NonHermitianInput, NotPositiveDefinite, PcgDidNotConverge
from irregspec.grid import GridSpec, jittered_grid
from irregspec.nudft import cgamma
from irregspec.toeplitz import (
    GohbergSemenculInverse,
    HermitianToeplitz,
    SolveOptions,
    SolverMethod,
    chan_eigenvalues,
    condition_number,
    determinant_identity_check,
    extreme_eigenvalues,
    from_cgamma,
    levinson,
    levinson_predictor,
    matvec,
    pcg,
    solve,
    vandermonde,
)

METHODS = [SolverMethod.LEVINSON, SolverMethod.PCG, SolverMethod.DENSE]


def jittered_operator(n, amplitude, seed, width_factor=1.0):
    step = 1.0 / n
    x = jittered_grid(n, 0.0, step, amplitude, seed)
    g = GridSpec.from_geometry(n, 0.0, n * step * width_factor)
    return from_cgamma(cgamma(g, x)), x, g


def test_regular_grid_operator_is_scaled_identity():
    n, width = 12, 3.0
    g = GridSpec.from_geometry(n, 0.5, width)
    x = 0.5 + (width / n) * np.arange(n)
    T = from_cgamma(cgamma(g, x))
    assert np.allclose(T.to_dense(), (n / width) * np.eye(n), atol=1e-12)
    assert np.allclose(T @ np.arange(n), (n / width) * np.arange(n), atol=1e-12)


def test_two_point_operator_frozen_values():
    g = GridSpec.from_geometry(2, 0.0, 2.0)
    T = from_cgamma(cgamma(g, [0.0, 0.6]))
    # (1/2)(1 + exp(-2i*pi*0.3)) to 17 digits
    c1 = 0.34549150281252629 - 0.47552825814757679j
    assert np.allclose(T.to_dense(), [[1.0, np.conj(c1)], [c1, 1.0]], atol=1e-15)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_operator_is_vandermonde_gram(n):
    rng = np.random.default_rng(n)
    x = np.sort(rng.uniform(0, 0.9, n))
    g = GridSpec.from_geometry(n, float(x[0]), 1.0)
    V = vandermonde(x, g)
    T = from_cgamma(cgamma(g, x))
    assert np.max(np.abs(T.to_dense() - V @ V.conj().T / g.width)) <= 1e-12


def test_dense_matches_oracle():
    _, x, g = jittered_operator(10, 0.4, 2)
    T = from_cgamma(cgamma(g, x))
    assert np.max(np.abs(T.to_dense() - dense_operator(x, g.width))) <= 1e-13 * g.n


def test_rejects_complex_or_negative_diagonal():
    with pytest.raises(NonHermitianInput):
        HermitianToeplitz([1.0 + 1e-6j, 0.1])
    with pytest.raises(NotPositiveDefinite):
        HermitianToeplitz([-1.0, 0.1])


@pytest.mark.parametrize("method", METHODS)
def test_identity_and_scaled_identity(method):
    rhs = np.array([1.0, -2.0 + 1j, 3.0, 0.5j])
    eye = HermitianToeplitz([1.0, 0, 0, 0])
    assert np.allclose(solve(eye, rhs, SolveOptions(method=method)), rhs, atol=1e-14)
    scaled = HermitianToeplitz([7.5, 0, 0, 0])
    assert np.allclose(solve(scaled, rhs, SolveOptions(method=method)), rhs / 7.5, atol=1e-14)


@pytest.mark.parametrize("method", METHODS)
def test_solver_matches_dense_lu_at_64(method):
    T, _, _ = jittered_operator(64, 0.3, 9)
    rng = np.random.default_rng(0)
    b = rng.normal(size=64) + 1j * rng.normal(size=64)
    want = scipy.linalg.lu_solve(scipy.linalg.lu_factor(T.to_dense()), b)
    got = solve(T, b, SolveOptions(method=method))
    assert np.linalg.norm(got - want) <= 1e-9 * np.linalg.norm(want)
    assert np.linalg.norm(T @ got - b) <= 1e-10 * np.linalg.norm(b)


def test_solve_rejects_wrong_length():
    with pytest.raises(LengthMismatch):
        solve(HermitianToeplitz([1.0, 0.0]), np.ones(3))


def test_levinson_breakdown_raises():
    # indefinite Hermitian Toeplitz: first reflection coefficient has modulus 2
    with pytest.raises(NotPositiveDefinite):
        levinson(HermitianToeplitz([1.0, 2.0, 0.0]), np.ones(3))


def test_levinson_reflections_inside_unit_disk():
    T, _, _ = jittered_operator(50, 0.45, 4)
    _, err, refl = levinson_predictor(T)
    assert err > 0
    assert np.all(np.abs(refl) < 1)


def test_gohberg_semencul_applies_the_inverse():
    T, _, _ = jittered_operator(40, 0.4, 1)
    inv = GohbergSemenculInverse(T)
    rng = np.random.default_rng(2)
    z = rng.normal(size=40) + 1j * rng.normal(size=40)
    want = np.linalg.solve(T.to_dense(), z)
    assert np.linalg.norm(inv(z) - want) <= 1e-10 * np.linalg.norm(want)


def test_pcg_reports_non_convergence_with_best_iterate():
    T, _, _ = jittered_operator(64, 1.5, 3)
    b = np.ones(64, dtype=complex)
    with pytest.raises(PcgDidNotConverge) as info:
        pcg(T.matvec, b, tol=1e-15, max_iterations=2)
    assert info.value.best is not None and info.value.iterations == 2
    assert np.isfinite(info.value.residual)


def test_chan_preconditioner_of_regular_operator_is_exact():
    lam = chan_eigenvalues(np.array([4.0, 0, 0, 0, 0]))
    assert np.allclose(lam, 4.0)


def test_naive_and_fast_matvec_agree_at_5():
    T, _, _ = jittered_operator(5, 0.4, 17)
    v = np.random.default_rng(3).normal(size=5) + 0j
    assert np.allclose(matvec(T, v, fast=False), matvec(T, v, fast=True), atol=1e-12)
    assert np.allclose(matvec(T, v, fast=False), T.to_dense() @ v, atol=1e-12)


def test_matvec_rejects_wrong_length():
    with pytest.raises(LengthMismatch):
        matvec(HermitianToeplitz([1.0, 0.0]), np.ones(3))


def test_condition_number_trivial_cases():
    assert condition_number(HermitianToeplitz([1.0, 0, 0])) == pytest.approx(1.0, abs=1e-12)
    n, width = 32, 2.0
    g = GridSpec.from_geometry(n, 0.0, width)
    T = from_cgamma(cgamma(g, (width / n) * np.arange(n)))
    assert condition_number(T) == pytest.approx(1.0, abs=1e-10)


def test_condition_number_matches_eigensolve_at_128():
    T, _, _ = jittered_operator(128, 1.0, 12345)
    ev = np.linalg.eigvalsh(T.to_dense())
    kappa = condition_number(T)
    assert kappa == pytest.approx(ev[-1] / ev[0], rel=0.05)
    lo, hi = extreme_eigenvalues(T)
    assert lo == pytest.approx(ev[0], rel=0.05) and hi == pytest.approx(ev[-1], rel=0.05)


def test_condition_number_is_scale_invariant():
    T, _, _ = jittered_operator(64, 0.8, 5)
    scaled = HermitianToeplitz(1e3 * T.first_column)
    assert condition_number(scaled) == pytest.approx(condition_number(T), rel=1e-6)


def test_determinant_two_points():
    g = GridSpec.from_geometry(2, 0.0, 2.0)
    dense, formula = determinant_identity_check([0.0, 0.6], g)
    assert formula == pytest.approx(0.65450849718747371, rel=1e-15)
    assert dense == pytest.approx(formula, rel=1e-12)


def test_determinant_regular_three():
    g = GridSpec.from_geometry(3, 0.0, 1.5)
    dense, formula = determinant_identity_check([0.0, 0.5, 1.0], g)
    assert dense == pytest.approx(8.0, rel=1e-12)
    assert formula == pytest.approx(8.0, rel=1e-12)


def test_determinant_vanishes_for_coincident_points():
    g = GridSpec.from_geometry(3, 0.0, 1.5)
    dense, formula = determinant_identity_check([0.0, 0.7, 0.7], g)
    assert formula == 0.0
    assert abs(dense) < 1e-12


unit_grids = st.integers(min_value=2, max_value=64).flatmap(
    lambda n: st.lists(st.integers(0, 4000), min_size=n, max_size=n, unique=True)
)


@settings(max_examples=40, deadline=None)
@given(unit_grids)
def test_distinct_positions_give_positive_definite_operator(ticks):
    # positions spread over [0, 0.8) of a unit width
    x = np.sort(np.array(ticks) / 5000.0)
    g = GridSpec.from_geometry(x.size, 0.0, 1.0)
    ev = np.linalg.eigvalsh(from_cgamma(cgamma(g, x)).to_dense())
    # smallest eigenvalues of clustered grids sit at the rounding level; allow that much
    assert ev[0] > -1e-13 * ev[-1]


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6).flatmap(lambda n: st.lists(st.integers(0, 900), min_size=n, max_size=n, unique=True)))
def test_determinant_formula_matches_dense(ticks):
    x = np.sort(np.array(ticks) / 1000.0)
    g = GridSpec.from_geometry(x.size, 0.0, 1.0)
    dense, formula = determinant_identity_check(x, g)
    assert dense == pytest.approx(formula, rel=1e-10, abs=1e-13 * (x.size / g.width) ** x.size)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 300), st.floats(0.0, 0.45), st.integers(0, 2**31))
def test_fast_matvec_matches_naive(n, amplitude, seed):
    T, _, _ = jittered_operator(n, amplitude, seed)
    v = np.random.default_rng(seed).normal(size=n) + 1j
    fast, naive = matvec(T, v, fast=True), matvec(T, v, fast=False)
    assert np.max(np.abs(fast - naive)) <= 1e-12 * max(1.0, np.abs(naive).max())


@settings(max_examples=20, deadline=None)
@given(st.integers(8, 128), st.floats(0.0, 1.0), st.integers(0, 2**31))
def test_solvers_agree_within_kappa_bound(n, amplitude, seed):
    T, _, _ = jittered_operator(n, amplitude, seed)
    ev = np.linalg.eigvalsh(T.to_dense())
    kappa = ev[-1] / ev[0]
    if kappa > 1e8:
        return
    b = np.random.default_rng(seed).normal(size=n) + 0j
    xs = [solve(T, b, SolveOptions(method=m)) for m in METHODS]
    ref = np.linalg.norm(xs[2])
    bound = 10 * kappa * np.finfo(float).eps * ref
    # PCG stops at a 1e-12 residual, which bounds its error by kappa*1e-12
    pcg_bound = max(bound, 2 * kappa * 1e-12 * ref)
    assert np.linalg.norm(xs[0] - xs[2]) <= bound
    assert np.linalg.norm(xs[1] - xs[2]) <= pcg_bound
