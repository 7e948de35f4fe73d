"""Exact regular-grid DFT spectra from irregularly sampled signals.

The direct transform of irregular samples equals a Hermitian Toeplitz
operator applied to the regular-grid spectrum; inverting that operator
recovers the spectrum, exactly for periodic band-limited signals sampled in
periodic mode and up to a computable leakage term otherwise.
"""

from .errors import (
    DegenerateGrid,
    DuplicatePositions,
    GenerationFailed,
    IrregSpecError,
    LengthMismatch,
    MissingReference,
    NoClosedForm,
    NonHermitianInput,
    NotPositiveDefinite,
    OffGridFrequency,
    PcgDidNotConverge,
    ShapeMismatch,
    WindowTooShort,
)
from .grid import (
    GridSpec,
    SampleSet,
    build_grid,
    frequencies,
    jittered_grid,
    make_rng,
    read_samples_csv,
    regular_counterpart,
    write_samples_csv,
)
from .ndim import (
    MultilevelToeplitz,
    NdGridSpec,
    NdSampleSet,
    build_nd_grid,
    nd_cgamma,
    nd_forward,
    nd_frequencies,
    nd_jittered_grid,
    nd_reconstruct,
    nd_regular_counterpart,
)
from .nudft import CGammaCoefficients, Spectrum, cgamma, forward, read_spectrum_csv, write_spectrum_csv
from .reconstruct import (
    ReconstructionReport,
    WindowKind,
    apply_window,
    dynamic_range,
    reconstruct,
    reference_spectrum,
    relative_error,
    theoretical_error,
    theoretical_error_norm,
)
from .signals import (
    ClosedFormSignal,
    SignalKind,
    analytic_line_spectrum,
    custom_tones,
    evaluate,
    interferogram,
    periodic_mix,
    ricker,
    sample_signal,
)
from .toeplitz import (
    HermitianToeplitz,
    SolveOptions,
    SolverMethod,
    condition_number,
    from_cgamma,
    levinson,
    matvec,
    pcg,
    solve,
)

__all__ = [
    "DegenerateGrid",
    "DuplicatePositions",
    "GenerationFailed",
    "IrregSpecError",
    "LengthMismatch",
    "MissingReference",
    "NoClosedForm",
    "NonHermitianInput",
    "NotPositiveDefinite",
    "OffGridFrequency",
    "PcgDidNotConverge",
    "ShapeMismatch",
    "WindowTooShort",
    "GridSpec",
    "SampleSet",
    "build_grid",
    "frequencies",
    "jittered_grid",
    "make_rng",
    "read_samples_csv",
    "regular_counterpart",
    "write_samples_csv",
    "MultilevelToeplitz",
    "NdGridSpec",
    "NdSampleSet",
    "build_nd_grid",
    "nd_cgamma",
    "nd_forward",
    "nd_frequencies",
    "nd_jittered_grid",
    "nd_reconstruct",
    "nd_regular_counterpart",
    "CGammaCoefficients",
    "Spectrum",
    "cgamma",
    "forward",
    "read_spectrum_csv",
    "write_spectrum_csv",
    "ReconstructionReport",
    "WindowKind",
    "apply_window",
    "dynamic_range",
    "reconstruct",
    "reference_spectrum",
    "relative_error",
    "theoretical_error",
    "theoretical_error_norm",
    "ClosedFormSignal",
    "SignalKind",
    "analytic_line_spectrum",
    "custom_tones",
    "evaluate",
    "interferogram",
    "periodic_mix",
    "ricker",
    "sample_signal",
    "HermitianToeplitz",
    "SolveOptions",
    "SolverMethod",
    "condition_number",
    "from_cgamma",
    "levinson",
    "matvec",
    "pcg",
    "solve",
]

__version__ = "0.1.0"
