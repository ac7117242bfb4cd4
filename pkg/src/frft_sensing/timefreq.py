"""Sampled waveforms, fractional Fourier transforms, and Wigner distributions.

Unit convention (fixed package-wide): time in microseconds, frequency in
MHz, chirp rates in MHz^2 (= MHz per us).  Because us * MHz = 1, phases
like 2*pi*f*t are dimensionless and the fractional order alpha = arccot(q)
is well defined once this convention is adopted.

The fractional transform is evaluated by direct O(n*m) quadrature of its
kernel; at desk-scale record lengths this is fast enough and keeps every
value independently checkable against the defining integral.

Wigner maps use integer lags on the native sample grid (lag step 2*dt), so
no interpolation enters the pipeline and the discrete overlap identity
(time-domain inner product squared == Wigner overlap) holds to well below
1e-3 at the package's standard sampling density.  The price is the usual
factor-of-two reduction of the unambiguous band, irrelevant at 64x
oversampling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.fft import next_fast_len, rfft, fft
from scipy.ndimage import gaussian_filter1d
from scipy.signal import czt

from .errors import (
    ContractViolationError,
    DegenerateInputError,
    DomainError,
    ResolutionError,
)

__all__ = [
    "TimeGrid",
    "SampledWaveform",
    "FrftSpectrum",
    "WignerMap",
    "frft",
    "fourier",
    "wigner",
    "wigner_stochastic",
    "wigner_frequency_axis",
    "overlap_integral",
    "smooth",
    "energy_interval",
]

_IMAG_RESIDUE_TOL = 1e-10


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid: ``t_k = t_start + k*dt`` for ``k = 0..n-1`` (us)."""

    t_start: float
    dt: float
    n: int

    def __post_init__(self):
        if not (self.dt > 0):
            raise DomainError(f"dt must be positive, got {self.dt}")
        if self.n < 2:
            raise DomainError(f"need at least 2 samples, got n={self.n}")

    @property
    def span(self) -> float:
        return (self.n - 1) * self.dt

    @property
    def t_end(self) -> float:
        return self.t_start + self.span

    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.n)

    @classmethod
    def cover(cls, t_min: float, t_max: float, dt_max: float) -> "TimeGrid":
        """Smallest uniform grid spanning [t_min, t_max] with step <= dt_max."""
        if t_max <= t_min:
            raise DomainError(f"empty interval [{t_min}, {t_max}]")
        if not (dt_max > 0):
            raise DomainError(f"dt_max must be positive, got {dt_max}")
        n = int(np.ceil((t_max - t_min) / dt_max)) + 1
        return cls(t_min, (t_max - t_min) / (n - 1), max(n, 2))


@dataclass(frozen=True, eq=False)
class SampledWaveform:
    """Waveform samples on a :class:`TimeGrid`.

    Real signals keep a real dtype; complex values are allowed everywhere
    except operations documented as real-only.
    """

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.ndim != 1 or len(vals) != self.grid.n:
            raise ContractViolationError(
                f"values must be 1-D with length {self.grid.n}, got shape {vals.shape}"
            )
        if not np.issubdtype(vals.dtype, np.complexfloating):
            vals = vals.astype(np.float64)
        object.__setattr__(self, "values", vals)

    @property
    def is_real(self) -> bool:
        if not np.issubdtype(self.values.dtype, np.complexfloating):
            return True
        return bool(np.all(self.values.imag == 0.0))

    def real_values(self) -> np.ndarray:
        if not self.is_real:
            raise ContractViolationError("waveform has nonzero imaginary parts")
        return self.values.real if np.iscomplexobj(self.values) else self.values

    def energy(self) -> float:
        """Trapezoid value of the integral of |w|^2 dt."""
        return float(np.trapezoid(np.abs(self.values) ** 2, dx=self.grid.dt))


@dataclass(frozen=True, eq=False)
class FrftSpectrum:
    """Fractional-domain amplitudes on strictly increasing coordinates u."""

    alpha: float
    u_points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if not (0.0 < self.alpha < np.pi):
            raise DomainError(f"alpha must lie in (0, pi), got {self.alpha}")
        u = np.asarray(self.u_points, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.complex128)
        if u.ndim != 1 or v.shape != u.shape:
            raise ContractViolationError("u_points and values must be 1-D and equal-length")
        if len(u) > 1 and not np.all(np.diff(u) > 0):
            raise DomainError("u_points must be strictly increasing")
        object.__setattr__(self, "u_points", u)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True, eq=False)
class WignerMap:
    """Real-valued time-frequency density; rows index time, columns frequency."""

    t_axis: np.ndarray
    f_axis: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t_axis, dtype=np.float64)
        f = np.asarray(self.f_axis, dtype=np.float64)
        v = np.asarray(self.values)
        _require_uniform(t, "t_axis")
        _require_uniform(f, "f_axis")
        if np.iscomplexobj(v):
            raise ContractViolationError("Wigner values must be real")
        if v.shape != (len(t), len(f)):
            raise ContractViolationError(
                f"values shape {v.shape} does not match axes ({len(t)}, {len(f)})"
            )
        object.__setattr__(self, "t_axis", t)
        object.__setattr__(self, "f_axis", f)
        object.__setattr__(self, "values", v.astype(np.float64))

    @property
    def dt(self) -> float:
        return float(self.t_axis[1] - self.t_axis[0])

    @property
    def df(self) -> float:
        return float(self.f_axis[1] - self.f_axis[0])


def _require_uniform(axis: np.ndarray, name: str):
    if axis.ndim != 1 or len(axis) < 2:
        raise ContractViolationError(f"{name} must be 1-D with at least 2 points")
    steps = np.diff(axis)
    if steps[0] <= 0 or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise ContractViolationError(f"{name} must be uniformly increasing")


# ---------------------------------------------------------------------------
# fractional Fourier transform
# ---------------------------------------------------------------------------

_U_CHUNK = 128


def frft(w: SampledWaveform, alpha: float, u_points) -> FrftSpectrum:
    """Fractional Fourier transform of order ``alpha`` at coordinates ``u``.

    Evaluates, for each u,

        sqrt(1 - i*cot(a)) * exp(i*pi*cot(a)*u^2)
            * sum_m w_m * exp(-2*pi*i*(csc(a)*u*t_m - cot(a)/2 * t_m^2)) * dt

    The square root takes the principal branch, which has a positive real
    part for every alpha in (0, pi).  At alpha = pi/2 the kernel reduces to
    the plain Fourier quadrature.

    Raises
    ------
    DomainError
        if ``alpha`` is outside (0, pi) or ``u_points`` is not strictly
        increasing.
    ResolutionError
        if the kernel's instantaneous frequency advances by pi or more per
        sample anywhere on the grid, naming the step that would be needed.
    """
    if not (0.0 < alpha < np.pi):
        raise DomainError(f"alpha must lie in the open interval (0, pi), got {alpha}")
    u = np.atleast_1d(np.asarray(u_points, dtype=np.float64))
    if len(u) > 1 and not np.all(np.diff(u) > 0):
        raise DomainError("u_points must be strictly increasing")

    if alpha == np.pi / 2:
        cot, csc = 0.0, 1.0
    else:
        cot = np.cos(alpha) / np.sin(alpha)
        csc = 1.0 / np.sin(alpha)

    t = w.grid.times()
    dt = w.grid.dt
    # kernel phase rate: |d/dt 2*pi*(csc*u*t - cot/2*t^2)| = 2*pi*|csc*u - cot*t|
    f_kernel = abs(csc) * np.max(np.abs(u)) + abs(cot) * np.max(np.abs(t))
    if f_kernel > 0 and dt > 0.5 / f_kernel:
        raise ResolutionError(
            f"kernel chirp advances >= pi per sample: need dt <= {0.5 / f_kernel:.6g} us, "
            f"grid has dt = {dt:.6g} us",
            required_dt=0.5 / f_kernel,
        )

    vals = np.asarray(w.values, dtype=np.complex128)
    quad_phase = np.exp(1j * np.pi * cot * t * t)  # exp(+2*pi*i*(cot/2)*t^2)
    pre = np.sqrt(1.0 - 1j * cot) * np.exp(1j * np.pi * cot * u * u)
    out = np.empty(len(u), dtype=np.complex128)
    src = vals * quad_phase
    for lo in range(0, len(u), _U_CHUNK):
        hi = min(lo + _U_CHUNK, len(u))
        kern = np.exp(-2j * np.pi * csc * np.outer(u[lo:hi], t))
        out[lo:hi] = kern @ src
    out *= pre * dt
    return FrftSpectrum(alpha=alpha, u_points=u, values=out)


def fourier(w: SampledWaveform, f_points) -> FrftSpectrum:
    """Ordinary Fourier transform quadrature; alias for order pi/2."""
    return frft(w, np.pi / 2, f_points)


# ---------------------------------------------------------------------------
# Wigner distributions
# ---------------------------------------------------------------------------


def wigner_frequency_axis(grid: TimeGrid) -> np.ndarray:
    """Canonical full-band frequency axis for Wigner maps on ``grid``.

    Spans exactly one period of the lag transform, [-1/(4*dt), +1/(4*dt)],
    endpoints included, with enough points that the trapezoid rule over f
    equals the exact periodic sum.  Overlap integrals evaluated on this
    axis satisfy the discrete overlap identity.
    """
    nfft = _lag_fft_length(grid.n)
    df = 1.0 / (2.0 * grid.dt * nfft)
    return (np.arange(nfft + 1) - nfft // 2) * df


def _lag_fft_length(n: int) -> int:
    nlag = 2 * ((n - 1) // 2) + 1
    nfft = next_fast_len(nlag)
    while nfft % 2:
        nfft = next_fast_len(nfft + 1)
    return nfft


def _lag_products(x: np.ndarray) -> tuple[np.ndarray, int]:
    """Rows of x[m+k]*conj(x[m-k]) for k = -K..K, K = (n-1)//2."""
    n = len(x)
    K = (n - 1) // 2
    prods = np.zeros((n, 2 * K + 1), dtype=x.dtype)
    for k in range(-K, K + 1):
        lo, hi = abs(k), n - abs(k)
        if lo >= hi:
            continue
        sl = slice(lo, hi)
        seg = x[lo + k : hi + k] * np.conj(x[lo - k : hi - k])
        prods[sl, k + K] = seg
    return prods, K


def _is_canonical_axis(f_axis: np.ndarray, dt: float, n: int) -> bool:
    nfft = _lag_fft_length(n)
    if len(f_axis) != nfft + 1:
        return False
    expected = wigner_frequency_axis(TimeGrid(0.0, dt, n))
    return np.allclose(f_axis, expected, rtol=1e-12, atol=1e-12 / (dt * nfft))


def _lag_transform(prods: np.ndarray, K: int, lag_step: float, f_axis: np.ndarray) -> np.ndarray:
    """sum_k prods[:, k] * exp(-2*pi*i*f*(k*lag_step)) * lag_step at each f."""
    df = f_axis[1] - f_axis[0]
    phase_w = np.exp(-2j * np.pi * df * lag_step)
    phase_a = np.exp(2j * np.pi * f_axis[0] * lag_step)
    spec = czt(prods, m=len(f_axis), w=phase_w, a=phase_a, axis=1)
    # undo the index offset: lag index k runs from -K, czt assumes from 0
    spec *= np.exp(2j * np.pi * f_axis * (K * lag_step))[None, :]
    return spec * lag_step


def wigner(w: SampledWaveform, f_axis=None) -> WignerMap:
    """Wigner distribution of a deterministic waveform.

    The lag correlation w(t + t'/2) * conj(w(t - t'/2)) is formed on the
    waveform's own sample grid (lags t' = 2k*dt, values outside the record
    are zero) and transformed to the requested frequencies.  ``f_axis``
    must be uniform and stay within the unambiguous band |f| <= 1/(4*dt);
    omit it to get the canonical full-band axis, on which overlap
    integrals satisfy the discrete overlap identity and the frequency
    marginal is exact.
    """
    grid = w.grid
    if f_axis is None:
        f_axis = wigner_frequency_axis(grid)
    else:
        f_axis = np.asarray(f_axis, dtype=np.float64)
        _require_uniform(f_axis, "f_axis")
        fmax = 0.25 / grid.dt
        if np.max(np.abs(f_axis)) > fmax * (1 + 1e-12):
            raise DomainError(
                f"f_axis exceeds the Wigner band |f| <= 1/(4*dt) = {fmax:.6g} MHz"
            )

    real_input = w.is_real
    x = w.real_values() if real_input else np.asarray(w.values, dtype=np.complex128)
    prods, K = _lag_products(x)
    lag_step = 2.0 * grid.dt

    if real_input and _is_canonical_axis(f_axis, grid.dt, grid.n):
        # fast path: wrap lags mod nfft and reuse the half-spectrum mirror
        nfft = _lag_fft_length(grid.n)
        wrapped = np.zeros((grid.n, nfft))
        wrapped[:, : K + 1] = prods[:, K:]
        wrapped[:, nfft - K :] = prods[:, :K]
        half = rfft(wrapped, axis=1).real * lag_step
        nhalf = nfft // 2
        vals = np.empty((grid.n, nfft + 1))
        vals[:, :nhalf] = half[:, nhalf:0:-1]
        vals[:, nhalf:] = half
    else:
        spec = _lag_transform(prods, K, lag_step, f_axis)
        vals = _discard_imag(spec)
    return WignerMap(t_axis=grid.times(), f_axis=f_axis, values=vals)


def _discard_imag(spec: np.ndarray) -> np.ndarray:
    scale = np.max(np.abs(spec))
    if scale > 0 and np.max(np.abs(spec.imag)) > _IMAG_RESIDUE_TOL * scale:
        raise ContractViolationError(
            "Wigner transform left an imaginary residue above 1e-10 of the "
            "maximum magnitude; input correlation is not lag-symmetric"
        )
    return np.ascontiguousarray(spec.real)


def wigner_stochastic(autocorr, t_axis, f_axis, lag_step: float | None = None) -> WignerMap:
    """Wigner distribution of a stochastic process from its autocorrelation.

    ``autocorr(t, t_lag)`` must return <g(t + t_lag/2) g(t - t_lag/2)>,
    accept ndarray arguments (broadcasting), and be symmetric in the lag.
    A wide-sense stationary autocorrelation (no dependence on t) produces
    rows that are identical to machine precision.

    ``lag_step`` defaults to twice the t_axis step, matching the lag
    lattice of :func:`wigner`, so maps of measured ensembles and of
    deterministic kernels share axes exactly.
    """
    t_axis = np.asarray(t_axis, dtype=np.float64)
    f_axis = np.asarray(f_axis, dtype=np.float64)
    _require_uniform(t_axis, "t_axis")
    _require_uniform(f_axis, "f_axis")
    dt_axis = t_axis[1] - t_axis[0]
    if lag_step is None:
        lag_step = 2.0 * dt_axis
    if lag_step <= 0:
        raise DomainError(f"lag_step must be positive, got {lag_step}")
    if np.max(np.abs(f_axis)) > 0.5 / lag_step * (1 + 1e-12):
        raise DomainError(
            f"f_axis exceeds the lag-transform band |f| <= {0.5 / lag_step:.6g} MHz"
        )

    K = (len(t_axis) - 1) // 2
    lags = lag_step * np.arange(-K, K + 1)

    probe_t = t_axis[:: max(1, len(t_axis) // 7)]
    probe_lag = lags[lags > 0][:: max(1, K // 5)] if K > 0 else np.array([])
    if len(probe_lag):
        fwd = np.asarray(autocorr(probe_t[:, None], probe_lag[None, :]), dtype=np.float64)
        bwd = np.asarray(autocorr(probe_t[:, None], -probe_lag[None, :]), dtype=np.float64)
        scale = max(np.max(np.abs(fwd)), np.max(np.abs(bwd)), 1e-300)
        if np.max(np.abs(fwd - bwd)) > 1e-9 * scale:
            raise ContractViolationError("autocorrelation is not symmetric in the lag")

    prods = np.asarray(autocorr(t_axis[:, None], lags[None, :]), dtype=np.float64)
    spec = _lag_transform(prods.astype(np.complex128), K, lag_step, f_axis)
    return WignerMap(t_axis=t_axis, f_axis=f_axis, values=_discard_imag(spec))


def overlap_integral(wa: WignerMap, wb: WignerMap) -> float:
    """2-D trapezoid value of the product integral of two maps on shared axes."""
    if not (
        wa.values.shape == wb.values.shape
        and np.array_equal(wa.t_axis, wb.t_axis)
        and np.array_equal(wa.f_axis, wb.f_axis)
    ):
        raise ContractViolationError("Wigner maps do not share identical axes")
    inner = np.trapezoid(wa.values * wb.values, x=wa.f_axis, axis=1)
    return float(np.trapezoid(inner, x=wa.t_axis))


def smooth(w: WignerMap, sigma_t: float, sigma_f: float) -> WignerMap:
    """Gaussian blur along each axis, for visualization only.

    ``sigma_t`` and ``sigma_f`` are in the axes' own units; zero leaves the
    corresponding axis untouched.
    """
    if sigma_t < 0 or sigma_f < 0:
        raise DomainError(f"smoothing widths must be >= 0, got ({sigma_t}, {sigma_f})")
    vals = w.values
    if sigma_t > 0:
        vals = gaussian_filter1d(vals, sigma_t / w.dt, axis=0, mode="constant", truncate=6.0)
    if sigma_f > 0:
        vals = gaussian_filter1d(vals, sigma_f / w.df, axis=1, mode="constant", truncate=6.0)
    return WignerMap(t_axis=w.t_axis, f_axis=w.f_axis, values=vals)


def energy_interval(spectrum: FrftSpectrum, fraction: float) -> tuple[float, float]:
    """Smallest contiguous u-interval around the energy median holding ``fraction``.

    Energy is the cell-weighted sum of |value|^2.  Starting from the cell
    containing the cumulative-energy median, the window grows one cell at a
    time toward whichever side offers more energy (ties go left) until it
    holds at least ``fraction`` of the total; returned bounds extend half a
    cell beyond the outermost samples, clipped to the coordinate range.
    """
    if not (0.0 < fraction <= 1.0):
        raise DomainError(f"fraction must lie in (0, 1], got {fraction}")
    u = spectrum.u_points
    if len(u) < 2:
        raise DegenerateInputError("need at least two spectrum samples")
    if not np.all(np.isfinite(spectrum.values)):
        raise DomainError("spectrum values must be finite")
    power = np.abs(spectrum.values) ** 2
    widths = np.empty_like(u)
    widths[1:-1] = 0.5 * (u[2:] - u[:-2])
    widths[0] = 0.5 * (u[1] - u[0])
    widths[-1] = 0.5 * (u[-1] - u[-2])
    cell = power * widths
    total = float(np.sum(cell))
    if total <= 0.0:
        raise DegenerateInputError("spectrum carries no energy")

    cum = np.cumsum(cell)
    lo = hi = int(np.searchsorted(cum, 0.5 * total))
    captured = cell[lo]
    target = fraction * total * (1 - 1e-12)
    while captured < target and (lo > 0 or hi < len(u) - 1):
        left = cell[lo - 1] if lo > 0 else -np.inf
        right = cell[hi + 1] if hi < len(u) - 1 else -np.inf
        if right > left:
            hi += 1
            captured += cell[hi]
        else:
            lo -= 1
            captured += cell[lo]
    u_lo = max(u[0], u[lo] - 0.5 * widths[lo])
    u_hi = min(u[-1], u[hi] + 0.5 * widths[hi])
    return float(u_lo), float(u_hi)
