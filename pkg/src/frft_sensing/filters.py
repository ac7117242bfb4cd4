"""Linearly chirped bang-bang decoupling filters.

A filter is the sign of a quadratic-phase cosine inside a rectangular
window of length T:

    h(t) = sgn( cos( 2*pi*t*(-q/2*t + f_j) - phi ) ),   0 <= t <= T

and zero outside.  The chirp rate q equals cot(alpha) of the fractional
Fourier order the filter addresses; q = 0 recovers the ordinary periodic
sequence.  Specs whose instantaneous frequency f_j - q*t would touch zero
inside the window are rejected: the phase must stay monotonic for flip
times to be single quadratic roots.  sgn(0) is taken as +1 and the window
includes both endpoints, so kernels are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ChirpThroughDCError, ContractViolationError, DomainError, ResolutionError
from .timefreq import SampledWaveform, TimeGrid

__all__ = [
    "FilterSpec",
    "PulseSequence",
    "make_filter_spec",
    "flip_times",
    "filter_kernel",
    "kernel_from_pulses",
    "alpha_of_chirp",
    "u_alpha_of_f",
    "OVERSAMPLE_FACTOR",
    "max_kernel_dt",
]

# Sampling rule: at least this many samples per period of the fastest
# instantaneous frequency present.  Sign flips are step discontinuities, so
# generous oversampling keeps quadrature errors below test tolerances.
OVERSAMPLE_FACTOR = 64

_BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class FilterSpec:
    """Parameters of one chirped filter: rate q (MHz^2), frequency f_j (MHz),
    phase offset phi (rad), duration T (us)."""

    q: float
    f_j: float
    phi: float
    T: float

    def __post_init__(self):
        if not (self.T > 0):
            raise DomainError(f"duration must be positive, got T={self.T}")
        if not (self.f_j > 0):
            raise DomainError(f"modulation frequency must be positive, got f_j={self.f_j}")
        f_end = self.f_j - self.q * self.T
        if min(self.f_j, f_end) <= 0:
            raise ChirpThroughDCError(
                f"instantaneous frequency f_j - q*t crosses zero on [0, {self.T}]: "
                f"f(0) = {self.f_j:.6g} MHz, f(T) = {f_end:.6g} MHz"
            )

    def instantaneous_frequency(self, t):
        return self.f_j - self.q * np.asarray(t)

    @property
    def f_inst_max(self) -> float:
        return max(self.f_j, self.f_j - self.q * self.T)

    def phase(self, t):
        """Argument of the cosine: 2*pi*t*(-q/2*t + f_j) - phi."""
        t = np.asarray(t)
        return 2 * np.pi * t * (-self.q / 2 * t + self.f_j) - self.phi

    @property
    def alpha(self) -> float:
        return alpha_of_chirp(self.q)

    @property
    def u_alpha(self) -> float:
        return u_alpha_of_f(self.f_j, self.alpha)


@dataclass(frozen=True, eq=False)
class PulseSequence:
    """Exact sign-flip table of one filter: strictly increasing times in (0, T)."""

    duration: float
    initial_sign: int
    flip_times: np.ndarray

    def __post_init__(self):
        flips = np.asarray(self.flip_times, dtype=np.float64)
        if self.initial_sign not in (-1, 1):
            raise DomainError(f"initial_sign must be +1 or -1, got {self.initial_sign}")
        if flips.ndim != 1:
            raise ContractViolationError("flip_times must be 1-D")
        if len(flips) and (flips[0] <= 0 or flips[-1] >= self.duration):
            raise ContractViolationError("flip times must lie strictly inside (0, T)")
        if len(flips) > 1 and not np.all(np.diff(flips) > 0):
            raise ContractViolationError("flip times must be strictly increasing")
        object.__setattr__(self, "flip_times", flips)


def make_filter_spec(q: float, f_j: float, phi: float, T: float) -> FilterSpec:
    """Validated constructor; see :class:`FilterSpec` for the constraints."""
    return FilterSpec(q=q, f_j=f_j, phi=phi, T=T)


def alpha_of_chirp(q: float) -> float:
    """Fractional order alpha = arccot(q), continuous with range (0, pi)."""
    return float(np.arctan2(1.0, q))


def u_alpha_of_f(f_j: float, alpha: float) -> float:
    """Fractional-domain coordinate of a modulation frequency: u = f_j*sin(alpha)."""
    return float(f_j * np.sin(alpha))


def flip_times(spec: FilterSpec) -> PulseSequence:
    """Exact sign-change times of the kernel.

    The cosine argument theta(t) increases monotonically (guaranteed by the
    spec's validity check), so each level pi/2 + k*pi in (theta(0),
    theta(T)) has exactly one root.  Quadratic roots use the cancellation-
    free form: the large root from -b - sign(b)*sqrt(disc), the companion
    from the product of roots.
    """
    theta0 = -spec.phi
    thetaT = 2 * np.pi * spec.T * (-spec.q / 2 * spec.T + spec.f_j) - spec.phi
    # levels pi/2 + k*pi strictly between theta0 and thetaT
    k_min = int(np.ceil((theta0 - np.pi / 2) / np.pi))
    while np.pi / 2 + k_min * np.pi <= theta0:
        k_min += 1
    k_max = int(np.floor((thetaT - np.pi / 2) / np.pi))
    while np.pi / 2 + k_max * np.pi >= thetaT:
        k_max -= 1

    roots = []
    tol = _BOUNDARY_TOL * max(1.0, spec.T)
    for k in range(k_min, k_max + 1):
        level = np.pi / 2 + k * np.pi
        t_k = _phase_root(spec, level + spec.phi)
        if tol < t_k < spec.T - tol:
            roots.append(t_k)

    sign0 = 1 if np.cos(theta0) >= 0 else -1
    return PulseSequence(
        duration=spec.T, initial_sign=sign0, flip_times=np.asarray(roots)
    )


def _phase_root(spec: FilterSpec, level: float) -> float:
    """Solve 2*pi*t*(-q/2*t + f_j) = level for the root in [0, T]."""
    if spec.q == 0.0:
        return level / (2 * np.pi * spec.f_j)
    # pi*q*t^2 - 2*pi*f_j*t + level = 0
    a, b, c = np.pi * spec.q, -2 * np.pi * spec.f_j, level
    disc = b * b - 4 * a * c
    if disc < 0:
        raise ContractViolationError("phase level has no real root; spec invariant broken")
    big = -(b + np.sign(b) * np.sqrt(disc)) / 2
    r1 = big / a
    r2 = c / big
    margin = 1e-9 * max(1.0, spec.T)
    in_range = [r for r in (r1, r2) if -margin <= r <= spec.T + margin]
    if not in_range:
        raise ContractViolationError("no quadratic root inside the window")
    return min(in_range, key=lambda r: abs(r - np.clip(r, 0.0, spec.T)))


def filter_kernel(spec: FilterSpec, grid: TimeGrid) -> SampledWaveform:
    """Sampled kernel: +/-1 inside [0, T] by the sign of the cosine, 0 outside."""
    if grid.t_start > _BOUNDARY_TOL or grid.t_end < spec.T * (1 - 1e-12):
        raise ContractViolationError(
            f"grid [{grid.t_start:.6g}, {grid.t_end:.6g}] does not span the "
            f"filter window [0, {spec.T:.6g}]"
        )
    dt_required = max_kernel_dt(spec)
    if grid.dt > dt_required * (1 + 1e-9):
        raise ResolutionError(
            f"grid dt = {grid.dt:.6g} us too coarse for f_inst up to "
            f"{spec.f_inst_max:.6g} MHz: need dt <= {dt_required:.6g} us",
            required_dt=dt_required,
        )
    t = grid.times()
    vals = np.where(np.cos(spec.phase(t)) >= 0, 1.0, -1.0)
    window_tol = 1e-9 * grid.dt
    vals[(t < -window_tol) | (t > spec.T + window_tol)] = 0.0
    return SampledWaveform(grid=grid, values=vals)


def max_kernel_dt(spec: FilterSpec) -> float:
    """Largest admissible sample step for this filter under the sampling rule."""
    return 1.0 / (OVERSAMPLE_FACTOR * spec.f_inst_max)


def kernel_from_pulses(seq: PulseSequence, grid: TimeGrid) -> SampledWaveform:
    """Reconstruct the sampled kernel from a flip table.

    The value at time t is initial_sign * (-1)^(number of flips at or
    before t); zero outside [0, T].
    """
    t = grid.times()
    n_flips = np.searchsorted(seq.flip_times, t, side="right")
    vals = seq.initial_sign * np.where(n_flips % 2 == 0, 1.0, -1.0)
    window_tol = 1e-9 * grid.dt
    vals[(t < -window_tol) | (t > seq.duration + window_tol)] = 0.0
    return SampledWaveform(grid=grid, values=vals)
