"""Stimulus synthesis, phase accumulation, and simulated measurements.

The measured observable is photodetector contrast cos(Phi) + noise, where
Phi is the phase the qubit accumulates under a stimulus g filtered by a
decoupling kernel h:  Phi = integral of g*h dt.  Spectra are recovered by
sweeping the filter frequency with a quadrature pair of pulse phases and
inverting the contrast through arccos.

All randomness flows through counter-based streams keyed by the physical
identity of each measurement (filter frequency, pulse phase, trial), so
records are reproducible and stable under subsetting.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import randomness
from .errors import ContractViolationError, DegenerateInputError, DomainError, ResolutionError
from .filters import OVERSAMPLE_FACTOR, FilterSpec, filter_kernel, max_kernel_dt
from .timefreq import (
    SampledWaveform,
    TimeGrid,
    overlap_integral,
    wigner,
    wigner_frequency_axis,
    wigner_stochastic,
)

__all__ = [
    "GAMMA_NV_MHZ_PER_GAUSS",
    "SignalSpec",
    "NoiseModel",
    "MeasurementEntry",
    "MeasurementRecord",
    "Spectrum",
    "amplitude_from_field",
    "synth_signal",
    "measurement_grid",
    "accumulated_phase",
    "measure",
    "spectrum_sweep",
    "random_phase_ensemble",
    "empirical_autocorr",
    "stochastic_phase_variance",
]

# electron gyromagnetic ratio of the sensing defect, MHz per gauss (x 2*pi rad)
GAMMA_NV_MHZ_PER_GAUSS = 2.8
_MICROTESLA_PER_GAUSS = 100.0


def amplitude_from_field(b1_microtesla: float) -> float:
    """Angular coupling amplitude A (rad/us) for an AC field given in microtesla."""
    return 2 * np.pi * GAMMA_NV_MHZ_PER_GAUSS * (b1_microtesla / _MICROTESLA_PER_GAUSS)


@dataclass(frozen=True)
class SignalSpec:
    """Chirped-cosine stimulus: A*cos(2*pi*t*(-q1/2*t + f1)) on [0, T], zero outside.

    A in rad/us, f1 in MHz, q1 in MHz^2, T in us.
    """

    A: float
    f1: float
    q1: float
    T: float

    def __post_init__(self):
        if not (self.T > 0):
            raise DomainError(f"duration must be positive, got T={self.T}")
        if self.A < 0:
            raise DomainError(f"amplitude must be >= 0, got A={self.A}")

    @property
    def f_inst_max(self) -> float:
        return abs(self.f1) + abs(self.q1) * self.T


@dataclass(frozen=True)
class NoiseModel:
    """Gaussian contrast noise of fixed variance with a 64-bit master seed."""

    variance: float
    seed: int = 0

    def __post_init__(self):
        if self.variance < 0:
            raise DomainError(f"variance must be >= 0, got {self.variance}")

    @property
    def sigma(self) -> float:
        return float(np.sqrt(self.variance))


@dataclass(frozen=True)
class MeasurementEntry:
    filter: FilterSpec
    phi: float
    contrast: float


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    """Noisy contrast samples for one filter family applied to one signal."""

    entries: tuple[MeasurementEntry, ...]
    noise: NoiseModel
    signal: SignalSpec
    trial: int = 0

    def __post_init__(self):
        if not self.entries:
            raise DegenerateInputError("record has no entries")
        qs = {e.filter.q for e in self.entries}
        ts = {e.filter.T for e in self.entries}
        if len(qs) > 1 or len(ts) > 1:
            raise ContractViolationError("all filters in a record must share one (q, T)")
        keys = [(e.filter.f_j, e.phi) for e in self.entries]
        if keys != sorted(keys):
            raise ContractViolationError("entries must be sorted by f_j then phi")

    @property
    def q(self) -> float:
        return self.entries[0].filter.q

    @property
    def T(self) -> float:
        return self.entries[0].filter.T

    def contrasts(self) -> np.ndarray:
        return np.array([e.contrast for e in self.entries])


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Magnitude spectrum |Phi|(f_j) recovered from a quadrature pair of sweeps."""

    f_j: np.ndarray
    magnitude: np.ndarray
    clamp_count: int = 0


def synth_signal(spec: SignalSpec, grid: TimeGrid) -> SampledWaveform:
    """Sample the stimulus on ``grid``; rect window includes both endpoints."""
    dt_required = 1.0 / (OVERSAMPLE_FACTOR * spec.f_inst_max) if spec.f_inst_max > 0 else np.inf
    if grid.dt > dt_required * (1 + 1e-9):
        raise ResolutionError(
            f"grid dt = {grid.dt:.6g} us too coarse for instantaneous frequency up to "
            f"{spec.f_inst_max:.6g} MHz: need dt <= {dt_required:.6g} us",
            required_dt=dt_required,
        )
    t = grid.times()
    vals = spec.A * np.cos(2 * np.pi * t * (-spec.q1 / 2 * t + spec.f1))
    window_tol = 1e-9 * grid.dt
    vals[(t < -window_tol) | (t > spec.T + window_tol)] = 0.0
    return SampledWaveform(grid=grid, values=vals)


def measurement_grid(T: float, f_inst_max: float, pad: float = 0.0) -> TimeGrid:
    """Grid spanning [-pad, T + pad] satisfying the sampling rule for f_inst_max."""
    if f_inst_max <= 0:
        raise DomainError(f"f_inst_max must be positive, got {f_inst_max}")
    return TimeGrid.cover(-pad, T + pad, 1.0 / (OVERSAMPLE_FACTOR * f_inst_max))


def accumulated_phase(g: SampledWaveform, h: SampledWaveform) -> float:
    """Trapezoid value of the phase integral of g*h dt (rad)."""
    if g.grid != h.grid:
        raise ContractViolationError("waveforms must share one time grid")
    integrand = g.values * h.values
    if np.iscomplexobj(integrand):
        raise ContractViolationError("accumulated phase is defined for real waveforms")
    return float(np.trapezoid(integrand, dx=g.grid.dt))


def _auto_grid(signal: SignalSpec, filters) -> TimeGrid:
    f_max = max([signal.f_inst_max] + [f.f_inst_max for f in filters])
    return measurement_grid(signal.T, f_max)


def measure(
    signal: SignalSpec,
    filters,
    noise: NoiseModel,
    trial: int = 0,
    grid: TimeGrid | None = None,
) -> MeasurementRecord:
    """Simulate one contrast measurement per filter.

    Contrast is cos(Phi) plus Gaussian noise whose stream is keyed by
    (seed, f_j, phi, trial); duplicate calls with the same key reproduce
    the same record exactly.
    """
    filters = sorted(filters, key=lambda s: (s.f_j, s.phi))
    if not filters:
        raise DegenerateInputError("no filters supplied")
    for f in filters:
        if f.T != signal.T:
            raise ContractViolationError(
                f"filter duration {f.T} does not match signal duration {signal.T}"
            )
    if grid is None:
        grid = _auto_grid(signal, filters)
    g = synth_signal(signal, grid)
    entries = []
    for spec in filters:
        h = filter_kernel(spec, grid)
        phase = accumulated_phase(g, h)
        eps = 0.0
        if noise.variance > 0:
            eps = float(
                randomness.normal(
                    noise.seed,
                    ("contrast", spec.f_j, spec.phi, int(trial)),
                    sigma=noise.sigma,
                )
            )
        entries.append(
            MeasurementEntry(filter=spec, phi=spec.phi, contrast=float(np.cos(phase)) + eps)
        )
    return MeasurementRecord(
        entries=tuple(entries), noise=noise, signal=signal, trial=int(trial)
    )


_QUADRATURE_PHASES = (0.0, np.pi / 2)


def spectrum_sweep(
    signal: SignalSpec,
    q: float,
    f_grid,
    noise: NoiseModel,
    trial: int = 0,
) -> Spectrum:
    """Sweep filter frequency and recover the phase-magnitude spectrum.

    Each f_j is measured with pulse phases 0 and pi/2; the magnitude is
    sqrt(Phi_0^2 + Phi_90^2) with Phi = arccos of the contrast clamped to
    [-1, 1].  Clamped samples are counted in the result.
    """
    f_grid = np.asarray(f_grid, dtype=np.float64)
    specs = [
        FilterSpec(q=q, f_j=float(fj), phi=phi, T=signal.T)
        for fj in f_grid
        for phi in _QUADRATURE_PHASES
    ]
    record = measure(signal, specs, noise, trial=trial)
    contrasts = record.contrasts().reshape(len(f_grid), 2)
    clamp_count = int(np.sum((contrasts < -1.0) | (contrasts > 1.0)))
    phases = np.arccos(np.clip(contrasts, -1.0, 1.0))
    magnitude = np.hypot(phases[:, 0], phases[:, 1])
    return Spectrum(f_j=f_grid, magnitude=magnitude, clamp_count=clamp_count)


def random_phase_ensemble(spec: SignalSpec, grid: TimeGrid, seed: int, n_draws: int):
    """Yield waveforms of the stimulus with uniformly random global phase."""
    t = grid.times()
    window = ((t >= -1e-9 * grid.dt) & (t <= spec.T + 1e-9 * grid.dt)).astype(float)
    base_phase = 2 * np.pi * t * (-spec.q1 / 2 * t + spec.f1)
    for i in range(n_draws):
        offset = 2 * np.pi * float(randomness.uniform_open(seed, ("ensemble-phase", i)))
        yield SampledWaveform(grid=grid, values=spec.A * np.cos(base_phase + offset) * window)


def empirical_autocorr(draws: np.ndarray, grid: TimeGrid):
    """Lattice-backed autocorrelation estimator from ensemble draws.

    ``draws`` has one waveform per row, sampled on ``grid``.  Returns a
    callable r(t, t_lag) = mean of g(t + t_lag/2)*g(t - t_lag/2), defined on
    the lattice t = grid points, t_lag = even multiples of dt (the lattice
    used by :func:`wigner_stochastic` at its default lag step); off-lattice
    queries raise.
    """
    draws = np.asarray(draws, dtype=np.float64)
    if draws.ndim != 2 or draws.shape[1] != grid.n:
        raise ContractViolationError(
            f"draws must be (n_draws, {grid.n}), got {draws.shape}"
        )
    n = grid.n
    table = (draws.T @ draws) / len(draws)  # mean of g[a]*g[b]

    def autocorr(t, lag):
        t = np.asarray(t, dtype=np.float64)
        lag = np.asarray(lag, dtype=np.float64)
        m = (t - grid.t_start) / grid.dt
        k = lag / (2.0 * grid.dt)
        m_idx = np.rint(m).astype(int)
        k_idx = np.rint(k).astype(int)
        if np.max(np.abs(m - m_idx)) > 1e-6 or np.max(np.abs(k - k_idx)) > 1e-6:
            raise ContractViolationError("query off the estimator's (t, lag) lattice")
        a = m_idx + k_idx
        b = m_idx - k_idx
        valid = (a >= 0) & (a < n) & (b >= 0) & (b < n)
        a = np.clip(a, 0, n - 1)
        b = np.clip(b, 0, n - 1)
        return np.where(valid, table[a, b], 0.0)

    return autocorr


def stochastic_phase_variance(ensemble, h: SampledWaveform, n_trials: int) -> dict:
    """Monte-Carlo mean-square phase versus its Wigner-overlap prediction.

    Draws ``n_trials`` waveforms from ``ensemble`` (an iterable of
    SampledWaveform on h's grid).  The Monte-Carlo estimate is the mean of
    (integral g*h dt)^2; the prediction is the overlap of h's Wigner map
    with the stochastic Wigner map built from the same draws' empirical
    autocorrelation.
    """
    if n_trials < 2:
        raise DomainError(f"need at least 2 trials, got {n_trials}")
    grid = h.grid
    hv = h.real_values()
    weights = np.full(grid.n, grid.dt)
    weights[0] = weights[-1] = grid.dt / 2

    draws = np.empty((n_trials, grid.n))
    it = iter(ensemble)
    for i in range(n_trials):
        try:
            w = next(it)
        except StopIteration as exc:
            raise DegenerateInputError(
                f"ensemble exhausted after {i} of {n_trials} draws"
            ) from exc
        if w.grid != grid:
            raise ContractViolationError("ensemble draw grid does not match filter grid")
        draws[i] = w.real_values()

    phis = draws @ (hv * weights)
    mc_estimate = float(np.mean(phis**2))

    f_axis = wigner_frequency_axis(grid)
    w_h = wigner(h, f_axis)
    w_g = wigner_stochastic(empirical_autocorr(draws, grid), grid.times(), f_axis)
    return {
        "mc_estimate": mc_estimate,
        "wigner_prediction": float(overlap_integral(w_g, w_h)),
    }
