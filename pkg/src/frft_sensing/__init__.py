"""Quantum sensing in fractional Fourier (time-frequency) domains.

Chirped bang-bang decoupling filters address measurements along arbitrary
linear trajectories of the time-frequency plane.  This package synthesizes
such filters, simulates the phase a driven qubit accumulates under a
chirped stimulus, and runs the estimation/detection pipeline quantifying
the advantage of chirp-matched sensing.

Units everywhere: time in us, frequency in MHz, chirp rates in MHz^2.
"""

from ._version import __version__
from .errors import (
    ChirpThroughDCError,
    ContractViolationError,
    DegenerateInputError,
    DomainError,
    ResolutionError,
    ValidationError,
)
from .timefreq import (
    FrftSpectrum,
    SampledWaveform,
    TimeGrid,
    WignerMap,
    energy_interval,
    fourier,
    frft,
    overlap_integral,
    smooth,
    wigner,
    wigner_frequency_axis,
    wigner_stochastic,
)
from .filters import (
    FilterSpec,
    PulseSequence,
    alpha_of_chirp,
    filter_kernel,
    flip_times,
    kernel_from_pulses,
    make_filter_spec,
    u_alpha_of_f,
)
from .sensing import (
    GAMMA_NV_MHZ_PER_GAUSS,
    MeasurementEntry,
    MeasurementRecord,
    NoiseModel,
    SignalSpec,
    Spectrum,
    accumulated_phase,
    amplitude_from_field,
    empirical_autocorr,
    measure,
    measurement_grid,
    random_phase_ensemble,
    spectrum_sweep,
    stochastic_phase_variance,
    synth_signal,
)
from .inference import (
    BoundReport,
    EstimationResult,
    FisherInformation,
    ForwardModel,
    HypothesisModel,
    TestResult,
    adaptive_crb,
    bayes_error,
    bayesian_crb,
    fisher_information,
    fit_least_squares,
    map_test,
    mse_bootstrap,
)
from .config import DEFAULTS, ExperimentConfig

__all__ = [
    "__version__",
    # errors
    "ValidationError", "DomainError", "ChirpThroughDCError",
    "ContractViolationError", "DegenerateInputError", "ResolutionError",
    # timefreq
    "TimeGrid", "SampledWaveform", "FrftSpectrum", "WignerMap",
    "frft", "fourier", "wigner", "wigner_stochastic", "wigner_frequency_axis",
    "overlap_integral", "smooth", "energy_interval",
    # filters
    "FilterSpec", "PulseSequence", "make_filter_spec", "flip_times",
    "filter_kernel", "kernel_from_pulses", "alpha_of_chirp", "u_alpha_of_f",
    # sensing
    "GAMMA_NV_MHZ_PER_GAUSS", "SignalSpec", "NoiseModel", "MeasurementEntry",
    "MeasurementRecord", "Spectrum", "amplitude_from_field", "synth_signal",
    "measurement_grid", "accumulated_phase", "measure", "spectrum_sweep",
    "random_phase_ensemble", "empirical_autocorr", "stochastic_phase_variance",
    # inference
    "ForwardModel", "EstimationResult", "BoundReport", "HypothesisModel",
    "TestResult", "FisherInformation", "fit_least_squares", "mse_bootstrap",
    "fisher_information", "bayesian_crb", "adaptive_crb", "map_test",
    "bayes_error",
    # config
    "DEFAULTS", "ExperimentConfig",
]
