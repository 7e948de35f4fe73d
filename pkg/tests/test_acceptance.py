"""Acceptance criteria, one check per criterion at its stated tolerance and time budget.

Each check prints a single ``PASS``/``FAIL`` line.  Run the module directly
(``python3 tests/test_acceptance.py``) to get just those lines, or through
pytest, which repeats them in the terminal summary.
"""

import sys
import time
from pathlib import Path

import numpy as np
import pytest
import scipy.linalg

sys.path.insert(0, str(Path(__file__).parent))

from irregspec.grid import GridSpec, SampleSet, build_grid, jittered_grid  # noqa: E402
from irregspec.ndim import (  # noqa: E402
    NdSampleSet,
    build_nd_grid,
    nd_cgamma,
    nd_forward,
    nd_frequency_indices,
    nd_jittered_grid,
    nd_reconstruct,
    nd_regular_counterpart,
)
from irregspec.nudft import cgamma, forward  # noqa: E402
from irregspec.reconstruct import (  # noqa: E402
    WindowKind,
    dynamic_range,
    reconstruct,
    reference_spectrum,
    relative_error,
    theoretical_error_norm,
)
from irregspec.signals import periodic_mix, sample_signal  # noqa: E402
from irregspec.sweep import EPS, SweepConfig, default_geometry, fit_error_model, realization_grid, run_sweep  # noqa: E402
from irregspec.toeplitz import (  # noqa: E402
    SolveOptions,
    SolverMethod,
    _circulant_preconditioner,
    determinant_identity_check,
    from_cgamma,
    levinson,
    pcg,
    solve,
    vandermonde,
)


def _case(config, n, jitter, seed, window=None):
    geo = default_geometry(config, n)
    window = geo.window if window is None else WindowKind(window)
    x, g = realization_grid(geo, jitter, seed)
    s = sample_signal(geo.signal, x)
    ref = reference_spectrum(geo.signal, g, window)
    return geo, s, g, ref, window


def _operator(n, amplitude, seed):
    x = jittered_grid(n, 0.0, 1.0 / n, amplitude, seed)
    return from_cgamma(cgamma(GridSpec.from_geometry(n, 0.0, 1.0), x))


def _periodic_recovery(x0, width, seeds):
    """Periodic-mix recovery on a jittered grid of 1024 points over [x0, x0 + width)."""
    n = 1024
    sig = periodic_mix()
    worst, best_dr, rows = 0.0, 0.0, []
    for seed in seeds:
        x = jittered_grid(n, x0, width / n, 2.0, seed)
        s = sample_signal(sig, x)
        g = build_grid(s, sig.period)
        ref = reference_spectrum(sig, g)
        r = reconstruct(s, g, reference=ref)
        worst = max(worst, r.relative_error / (100 * r.condition_number * EPS))
        best_dr = max(best_dr, dynamic_range(r, ref))
        rows.append((r.condition_number, r.relative_error))
    return worst, best_dr, rows


def criterion_1():
    worst, best_dr, rows = _periodic_recovery(-0.72, 1.44, range(20))
    ok = worst <= 1 and best_dr >= 1e6
    errs = [e for _, e in rows]
    return ok, (f"max err/(100 kappa eps) = {worst:.3g}, best dynamic range = {best_dr:.3g}, "
                f"median error = {np.median(errs):.3g}; lines above the 355.6 Hz bin limit alias"), 30


def criterion_1_nyquist():
    # same signal and jitter on a 1.26 s window (1024/1.26 = 813 Hz sampling) so the 400 Hz line is resolved
    worst, best_dr, rows = _periodic_recovery(-0.63, 1.26, range(20))
    ok = worst <= 1 and best_dr >= 1e6
    return ok, f"max err/(100 kappa eps) = {worst:.3g}, best dynamic range = {best_dr:.3g}", 30


def criterion_2():
    errs = []
    for seed in range(10):
        geo, s, g, ref, w = _case("periodic", 256, 0.01, seed)
        errs.append(reconstruct(s, g, reference=ref).relative_error)
    return max(errs) <= 1e-12, f"max relative error = {max(errs):.3g}", 5


def criterion_3():
    rows = run_sweep(SweepConfig(n=128, jitters=(0.5, 1.0, 1.5, 2.0), realizations=50, seed=0))
    fit = fit_error_model(rows, 1e9, 1e14)
    sel = [r for r in rows if not r.error and 1e9 <= r.kappa <= 1e14]
    bound_ok = all(r.relative_error <= 1000 * r.kappa * EPS for r in sel)
    ok = fit["rows"] >= 2 and 0.7 <= fit["slope"] <= 1.3 and bound_ok
    return ok, (f"{len(rows)} rows, {fit['rows']} with kappa in [1e9, 1e14], slope = {fit['slope']:.3f}, "
                f"error/(kappa eps) median = {fit['constant']:.3g}, bound held = {bound_ok}"), 120


def _interferogram_runs():
    out = []
    for seed in range(10):
        geo, s, g, ref_h, _ = _case("interferogram", 1024, 2.0, seed, "hann")
        ref = reference_spectrum(geo.signal, g)
        plain = reconstruct(s, g, reference=ref)
        hann = reconstruct(s, g, window="hann", reference=ref_h)
        direct = relative_error(forward(s, g), ref)
        out.append((plain, hann, direct))
    return out


_INTERFEROGRAM = {}


def interferogram_runs():
    if "runs" not in _INTERFEROGRAM:
        _INTERFEROGRAM["runs"] = _interferogram_runs()
    return _INTERFEROGRAM["runs"]


def criterion_4():
    runs = interferogram_runs()
    plain = np.median([p.relative_error for p, _, _ in runs])
    hann = np.median([h.relative_error for _, h, _ in runs])
    low = [h.relative_error for _, h, _ in runs if h.condition_number <= 1e10]
    ok = hann <= 0.1 * plain and all(e <= 1e-4 for e in low)
    worst_low = f"{max(low):.3g}" if low else "n/a"
    return ok, (f"median error {plain:.3g} without hann, {hann:.3g} with (ratio {hann / plain:.3g}); "
                f"{len(low)} runs with kappa <= 1e10, worst error {worst_low}"), 60


def criterion_5():
    runs = interferogram_runs()
    direct = [d for _, _, d in runs]
    hann = np.median([h.relative_error for _, h, _ in runs])
    ok = min(direct) >= 1e-1
    return ok, (f"direct NUDFT relative error min = {min(direct):.3g}, improvement over it with hann "
                f"= {np.median(direct) / hann:.3g}x"), 60


def criterion_6():
    worst_ratio, worst_change, used = 0.0, 0.0, 0
    for config in ("interferogram-hann", "ricker"):
        for seed in range(4):
            geo, s, g, ref, w = _case(config, 128, 0.2, seed)
            r = reconstruct(s, g, window=w, reference=ref)
            if r.condition_number > 1e6:
                continue
            th, change = theoretical_error_norm(geo.signal, g, s.positions, w, reference=ref,
                                                check_convergence=True)
            worst_ratio = max(worst_ratio, r.relative_error / th)
            worst_change = max(worst_change, change)
            used += 1
    ok = used > 0 and worst_ratio <= 30 and worst_change < 0.05
    return ok, (f"{used} low-kappa runs, max error/theory = {worst_ratio:.3g}, "
                f"max change under doubling = {worst_change:.3g}"), 120


def criterion_7():
    rng = np.random.default_rng(0)
    notes, ok = [], True

    fixed = 0.0
    x = -1.0 + 0.01 * np.arange(200)
    s = SampleSet(x, rng.normal(size=200) + 1j * rng.normal(size=200))
    g = build_grid(s)
    direct = forward(s, g).amplitudes
    for m in SolverMethod:
        got = reconstruct(s, g, SolveOptions(method=m), estimate_condition=False).solution.amplitudes
        fixed = max(fixed, np.max(np.abs(got - direct)) / np.max(np.abs(direct)))
    ok &= fixed <= 1e-12
    notes.append(f"(a) {fixed:.2g}")

    det, gram, det_cases = 0.0, 0.0, 0
    for n in range(2, 7):
        for _ in range(40):
            pts = np.sort(rng.uniform(0, 0.9, n))
            g = GridSpec.from_geometry(n, 0.0, 1.0)
            C = from_cgamma(cgamma(g, pts)).to_dense()
            V = vandermonde(pts, g)
            gram = max(gram, np.max(np.abs(C - V @ V.conj().T / g.width)))
            # a dense determinant is only good to about kappa*eps relative
            ev = np.linalg.eigvalsh(C)
            if ev[-1] / ev[0] > 1e6:
                continue
            dense, formula = determinant_identity_check(pts, g)
            det = max(det, abs(dense - formula) / abs(formula))
            det_cases += 1
    ok &= det_cases > 0 and det <= 1e-10 and gram <= 1e-12
    notes.append(f"(b) {det:.2g} over {det_cases} grids with kappa <= 1e6")
    notes.append(f"(c) {gram:.2g}")

    lev, pcg_err, pcg_iter, cases = 0.0, 0.0, 0.0, 0
    for n in (32, 128, 512):
        for amp in (0.2, 0.5, 1.0):
            T = _operator(n, amp, n + int(10 * amp))
            D = T.to_dense()
            ev = np.linalg.eigvalsh(D)
            if ev[-1] / ev[0] > 1e6:
                continue
            cases += 1
            b = rng.normal(size=n) + 1j * rng.normal(size=n)
            # LU on the same matrix isolates the solver from the coefficient rounding
            want = scipy.linalg.lu_solve(scipy.linalg.lu_factor(D), b)
            x_lev = levinson(T, b)
            lev = max(lev, np.linalg.norm(x_lev - want) / np.linalg.norm(want))
            x_pcg, it, _ = pcg(T.matvec, b, _circulant_preconditioner(T), tol=1e-14, max_iterations=5 * n)
            pcg_err = max(pcg_err, np.linalg.norm(x_pcg - x_lev) / np.linalg.norm(x_lev))
            pcg_iter = max(pcg_iter, it / n)
    ok &= cases > 0 and lev <= 1e-9 and pcg_err <= 1e-9 and pcg_iter <= 5
    notes.append(f"(d) {lev:.2g} over {cases} systems")
    notes.append(f"(e) {pcg_err:.2g} with at most {pcg_iter:.2g}N iterations")
    return bool(ok), "; ".join(notes), 30


def _product(p):
    return (np.cos(2 * np.pi * p[:, 0] / 0.015) + 0.5) * np.cos(2 * np.pi * p[:, 1] / 0.01)


def criterion_8():
    n, period = 16, 0.03
    worst, structure, used = 0.0, 0.0, 0
    for seed in range(5):
        x = nd_jittered_grid((n, n), (0.0, 0.0), (period / n, period / n), 0.3, seed)
        s = NdSampleSet(x, _product(x), (n, n))
        g = build_nd_grid(s, (period, period))
        xr = nd_regular_counterpart(g)
        ref = nd_forward(NdSampleSet(xr, _product(xr), (n, n)), g)
        r = nd_reconstruct(s, g, reference=ref)
        if r.condition_number > 1e5:
            continue
        used += 1
        worst = max(worst, r.relative_error)
        # dense lexicographic operator summed straight from its definition
        idx = nd_frequency_indices(g)
        lag = (idx[:, None, :] - idx[None, :, :]) / g.width
        D = np.exp(-2j * np.pi * np.einsum("abd,kd->abk", lag, s.positions)).sum(axis=2) / np.prod(g.width)
        structure = max(structure, np.max(np.abs(nd_cgamma(g, s.positions).to_dense() - D)) / np.max(np.abs(D)))
    ok = used > 0 and worst <= 1e-9 and structure <= 1e-12
    return ok, f"{used} runs with kappa <= 1e5, max error = {worst:.3g}, operator mismatch = {structure:.3g}", 60


def _best_time(f, repeats):
    times = []
    for _ in range(repeats):
        t = time.perf_counter()
        f()
        times.append(time.perf_counter() - t)
    return min(times)


def criterion_9():
    rng = np.random.default_rng(0)
    t = {}
    for n in (1024, 4096):
        T = _operator(n, 0.3, 1)
        b = rng.normal(size=n) + 0j
        t[n] = (_best_time(lambda: levinson(T, b), 3),
                _best_time(lambda: solve(T, b, SolveOptions(method="pcg")), 5))
    lev = t[4096][0] / t[1024][0]
    pc = t[4096][1] / t[1024][1]
    return lev <= 25 and pc <= 8, f"time ratio 4096/1024: levinson {lev:.3g}, pcg {pc:.3g}", None


CRITERIA = [
    ("1", criterion_1),
    ("1 (Nyquist-resolved variant, supplementary)", criterion_1_nyquist),
    ("2", criterion_2),
    ("3", criterion_3),
    ("4", criterion_4),
    ("5", criterion_5),
    ("6", criterion_6),
    ("7", criterion_7),
    ("8", criterion_8),
    ("9", criterion_9),
]


def run_criterion(name, check):
    start = time.perf_counter()
    ok, detail, budget = check()
    elapsed = time.perf_counter() - start
    if budget is not None and elapsed > budget:
        ok = False
        detail += f"; over the {budget} s budget"
    line = f"{'PASS' if ok else 'FAIL'} criterion {name}: {detail} [{elapsed:.1f} s]"
    print(line)
    return ok, line


@pytest.mark.slow
@pytest.mark.parametrize("name,check", CRITERIA, ids=[c[0].split()[0] if "(" not in c[0] else "1-nyquist"
                                                     for c in CRITERIA])
def test_criterion(name, check, acceptance_log):
    ok, line = run_criterion(name, check)
    acceptance_log.append(line)
    assert ok, line


if __name__ == "__main__":
    results = [run_criterion(name, check)[0] for name, check in CRITERIA]
    sys.exit(0 if all(results) else 1)
