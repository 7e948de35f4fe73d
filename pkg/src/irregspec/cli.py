"""Command-line entry point: ``irregspec {synth,transform,reconstruct,sweep}``.

Exit codes: 0 success, 2 invalid usage or input, 3 the operator is not
positive definite, 4 the iterative solver did not converge.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .errors import IrregSpecError, NotPositiveDefinite, PcgDidNotConverge
from .grid import SampleSet, build_grid, jittered_grid, read_samples_csv, write_samples_csv
from .ndim import (
    build_nd_grid,
    nd_forward,
    nd_reconstruct,
    read_nd_samples_csv,
    write_nd_spectrum_csv,
)
from .nudft import compensated_phasor_sum, forward, read_spectrum_csv, write_spectrum_csv
from .reconstruct import WindowKind, apply_window, reconstruct, reference_spectrum, theoretical_error_norm
from .signals import evaluate, interferogram, periodic_mix, ricker
from .sweep import Configuration, SweepConfig, fit_error_model, run_sweep, write_sweep_csv
from .toeplitz import SolveOptions, SolverMethod

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_CONVERGENCE = 0, 2, 3, 4

SIGNALS = {"periodic-mix": periodic_mix, "interferogram": interferogram, "ricker": ricker}
# Options whose values may start with "-" (negative spans and numbers).
_VALUE_OPTIONS = ("--span", "--periodic", "--jitters")


class UsageError(Exception):
    pass


def _span(text: str) -> tuple[float, float]:
    try:
        a, b = (float(t) for t in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b, got {text!r}") from None
    if not b > a:
        raise argparse.ArgumentTypeError(f"span end must exceed start, got {text!r}")
    return a, b


def _periods(text: str):
    return [float(t) for t in text.split(",")]


def _join_value_options(argv):
    """Turn ``--span -0.72:0.72`` into ``--span=-0.72:0.72`` so argparse accepts it."""
    out, i = [], 0
    while i < len(argv):
        if argv[i] in _VALUE_OPTIONS and i + 1 < len(argv):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="irregspec", description="Exact DFT spectra from irregular samples.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="write samples of a test signal on a jittered grid")
    s.add_argument("--signal", choices=sorted(SIGNALS), required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--span", type=_span, required=True, help="a:b")
    s.add_argument("--periodic", type=float, default=None, help="period P; grid step becomes (b-a)/n")
    s.add_argument("--jitter", type=float, default=0.0, help="amplitude in units of the step")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default="-")

    t = sub.add_parser("transform", help="direct nonuniform DFT of a sample file")
    t.add_argument("input")
    t.add_argument("--periodic", type=_periods, default=None)
    t.add_argument("--window", choices=[w.value for w in WindowKind], default="none")
    t.add_argument("--out", default="-")

    r = sub.add_parser("reconstruct", help="recover the regular-grid spectrum of a sample file")
    r.add_argument("input")
    r.add_argument("--periodic", type=_periods, default=None)
    r.add_argument("--window", choices=[w.value for w in WindowKind], default="none")
    r.add_argument("--solver", choices=[m.value for m in SolverMethod], default="levinson")
    r.add_argument("--reference", default="none", help="none | closed-form | file:PATH")
    r.add_argument("--signal", choices=sorted(SIGNALS), default=None, help="closed form for --reference/--theory")
    r.add_argument("--theory", action="store_true", help="also compute the leakage error norm")
    r.add_argument("--seed", type=int, default=None, help="recorded in the report")
    r.add_argument("--out", default="-")
    r.add_argument("--report", default=None, help="report JSON path (default: next to --out, or stderr)")
    r.add_argument("--resampled", default=None, help="write the signal on the regular grid to this CSV")

    w = sub.add_parser("sweep", help="reconstruction error against condition number")
    w.add_argument("--config", choices=["all"] + [c.value for c in Configuration], default="all")
    w.add_argument("--n", type=int, default=128)
    w.add_argument("--jitters", type=_periods, default=[0.5, 1.0, 1.5, 2.0])
    w.add_argument("--realizations", type=int, default=50)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--solver", choices=[m.value for m in SolverMethod], default="levinson")
    w.add_argument("--theory", action="store_true")
    w.add_argument("--out", default="-")
    return p


def _write_via(writer, path, *args):
    writer(sys.stdout if path == "-" else path, *args)


def _header(path) -> list:
    with open(path, encoding="utf-8") as fh:
        return [h.strip() for h in fh.readline().split(",")]


def _single_period(periods):
    if periods is None:
        return None
    if len(periods) != 1:
        raise UsageError("one-dimensional samples take a single period")
    return periods[0]


def cmd_synth(args) -> int:
    a, b = args.span
    if args.n < 2:
        raise UsageError("--n must be at least 2")
    if args.jitter < 0:
        raise UsageError("--jitter must be non-negative")
    # periodic mode keeps the window [a, b) with b the first sample of the next period
    step = (b - a) / args.n if args.periodic is not None else (b - a) / (args.n - 1)
    x = jittered_grid(args.n, a, step, args.jitter, args.seed)
    samples = SampleSet(x, evaluate(SIGNALS[args.signal](), x))
    _write_via(write_samples_csv, args.out, samples)
    return EXIT_OK


def _nd_periods(periods, dim):
    if periods is not None and len(periods) == 1:
        return periods * dim
    return periods


def cmd_transform(args) -> int:
    if _header(args.input)[0] == "x1":
        samples = read_nd_samples_csv(args.input)
        grid = build_nd_grid(samples, _nd_periods(args.periodic, samples.dim))
        _write_via(write_nd_spectrum_csv, args.out, grid, nd_forward(samples, grid))
        return EXIT_OK
    samples = read_samples_csv(args.input)
    grid = build_grid(samples, _single_period(args.periodic))
    _write_via(write_spectrum_csv, args.out, forward(apply_window(samples, grid, args.window), grid))
    return EXIT_OK


def _resample(spectrum) -> SampleSet:
    """Inverse DFT of ``spectrum`` onto the regular counterpart positions."""
    g = spectrum.grid
    x = g.x0 + g.mean_step * np.arange(g.n)
    # same kernel with the roles of positions and frequencies swapped
    vals = compensated_phasor_sum(spectrum.frequencies[:, None], -x[:, None], spectrum.amplitudes) / g.n
    return SampleSet(x, vals)


def _report_path(args):
    if args.report:
        return args.report
    if args.out != "-":
        return str(Path(args.out).with_suffix(".report.json"))
    return None


def _reconstruct_nd(args) -> int:
    samples = read_nd_samples_csv(args.input)
    grid = build_nd_grid(samples, _nd_periods(args.periodic, samples.dim))
    if args.window != "none" or args.theory or args.reference != "none":
        raise UsageError("d-dimensional reconstruction takes no window, theory or reference")
    report = nd_reconstruct(samples, grid, SolveOptions(method=SolverMethod(args.solver)))
    _write_via(write_nd_spectrum_csv, args.out, grid, report.amplitudes)
    info = {
        "n": list(grid.counts),
        "delta_x": grid.width.tolist(),
        "delta_sigma": grid.freq_step.tolist(),
        "condition_number": report.condition_number,
        "residual": report.residual,
        "solver_used": report.solver_used.value,
        "converged": report.converged,
    }
    _emit_report(args, json.dumps(info, indent=2))
    return EXIT_OK if report.converged else EXIT_CONVERGENCE


def _emit_report(args, text: str):
    path = _report_path(args)
    if path is None:
        sys.stderr.write(text + "\n")
    else:
        Path(path).write_text(text + "\n", encoding="utf-8")


def cmd_reconstruct(args) -> int:
    if _header(args.input)[0] == "x1":
        return _reconstruct_nd(args)
    samples = read_samples_csv(args.input)
    grid = build_grid(samples, _single_period(args.periodic))
    window = WindowKind(args.window)
    signal = SIGNALS[args.signal]() if args.signal else None
    ref = None
    if args.reference == "closed-form":
        if signal is None:
            raise UsageError("--reference closed-form needs --signal")
        ref = reference_spectrum(signal, grid, window)
    elif args.reference.startswith("file:"):
        ref = read_spectrum_csv(args.reference[len("file:"):], grid)
    elif args.reference != "none":
        raise UsageError(f"unknown --reference {args.reference!r}")
    report = reconstruct(samples, grid, SolveOptions(method=SolverMethod(args.solver)), window, ref, args.seed)
    if args.theory:
        if signal is None:
            raise UsageError("--theory needs --signal")
        th = theoretical_error_norm(signal, grid, samples.positions, window, reference=ref)
        report = replace(report, theoretical_error_norm=th)
    _write_via(write_spectrum_csv, args.out, report.solution)
    if args.resampled:
        write_samples_csv(args.resampled, _resample(report.solution))
    _emit_report(args, report.to_json())
    return EXIT_OK if report.converged else EXIT_CONVERGENCE


def cmd_sweep(args) -> int:
    if args.realizations < 1:
        raise UsageError("--realizations must be at least 1")
    configs = list(Configuration) if args.config == "all" else [Configuration(args.config)]
    rows, summary = [], {}
    for c in configs:
        cfg = SweepConfig(c, args.n, tuple(args.jitters), args.realizations, args.seed,
                          SolverMethod(args.solver), args.theory)
        part = run_sweep(cfg)
        rows.extend(part)
        summary[c.value] = fit_error_model(part)
    _write_via(write_sweep_csv, args.out, rows)
    sys.stderr.write(json.dumps(summary, indent=2) + "\n")
    return EXIT_OK


COMMANDS = {"synth": cmd_synth, "transform": cmd_transform, "reconstruct": cmd_reconstruct, "sweep": cmd_sweep}


def main(argv=None) -> int:
    argv = _join_value_options(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write(f"irregspec: error: {exc}\n")
        return EXIT_USAGE
    except PcgDidNotConverge as exc:
        sys.stderr.write(f"irregspec: solver did not converge: {exc}\n")
        return EXIT_CONVERGENCE
    except (NotPositiveDefinite, ArithmeticError) as exc:
        sys.stderr.write(f"irregspec: {exc}\n")
        return EXIT_DOMAIN
    except (IrregSpecError, ValueError, OSError) as exc:
        sys.stderr.write(f"irregspec: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
