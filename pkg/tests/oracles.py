"""Independent oracles used to freeze expected values.

Everything here is deliberately written against the defining integrals and
brute-force constructions, sharing no code path with the package: direct
quadrature for transforms, dense sampling for sign flips, piecewise
adaptive quadrature for phase integrals, moment fits for Gaussians.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad


def fourier_quadrature(values, times, dt, freqs):
    """Direct Riemann quadrature of the Fourier integral at each frequency."""
    freqs = np.atleast_1d(freqs)
    return np.array(
        [np.sum(values * np.exp(-2j * np.pi * f * times)) * dt for f in freqs]
    )


def frft_quadrature(values, times, dt, alpha, u_points):
    """Brute-force fractional-transform quadrature, one coordinate at a time."""
    cot = np.cos(alpha) / np.sin(alpha)
    csc = 1.0 / np.sin(alpha)
    out = []
    for u in np.atleast_1d(u_points):
        pref = np.sqrt(1 - 1j * cot) * np.exp(1j * np.pi * cot * u * u)
        kern = np.exp(-2j * np.pi * (csc * u * times - cot / 2 * times * times))
        out.append(pref * np.sum(values * kern) * dt)
    return np.array(out)


def dense_sign_flips(q, f_j, phi, T, dt=1e-4):
    """Sign-change times of the densely sampled sgn-cos kernel."""
    t = np.arange(0.0, T + dt / 2, dt)
    s = np.where(np.cos(2 * np.pi * t * (-q / 2 * t + f_j) - phi) >= 0, 1, -1)
    idx = np.nonzero(np.diff(s))[0]
    return 0.5 * (t[idx] + t[idx + 1])


def chirped_cosine(A, f1, q1):
    return lambda t: A * np.cos(2 * np.pi * t * (-q1 / 2 * t + f1))


def phase_integral_fine(signal_fn, flip_times_list, initial_sign, T):
    """Phase integral of signal * (bang-bang kernel) by adaptive quadrature.

    Integrates the signal exactly over each constant-sign segment, so the
    only error is scipy's quadrature tolerance.
    """
    edges = np.concatenate([[0.0], np.asarray(flip_times_list), [T]])
    total = 0.0
    sign = initial_sign
    for a, b in zip(edges[:-1], edges[1:]):
        seg, _ = quad(signal_fn, a, b, limit=400)
        total += sign * seg
        sign = -sign
    return total


def gaussian_moment_fit(axis, profile):
    """Mean and sigma of a nonnegative 1-D profile by closed-form moments."""
    w = np.clip(profile, 0.0, None)
    norm = np.sum(w)
    mean = np.sum(axis * w) / norm
    var = np.sum((axis - mean) ** 2 * w) / norm
    return mean, np.sqrt(var)


def radon_projection(wmap_values, t_axis, f_axis, alpha, u_bins):
    """Radon slice of a time-frequency map: rotate-and-sum by mass binning.

    Bins the map's mass by u = t*cos(alpha) + f*sin(alpha).  Dividing the
    binned mass by the binned cell area gives the strip-average of the map,
    which times the analytic chord length of the strip through the domain
    yields the line integral; this removes the sawtooth quantization a
    naive fixed-bin-width normalization suffers when the projection
    direction aligns with a grid axis.
    """
    dt = t_axis[1] - t_axis[0]
    df = f_axis[1] - f_axis[0]
    tt, ff = np.meshgrid(t_axis, f_axis, indexing="ij")
    u = (tt * np.cos(alpha) + ff * np.sin(alpha)).ravel()
    mass, _ = np.histogram(u, bins=u_bins, weights=(wmap_values * dt * df).ravel())
    area, _ = np.histogram(u, bins=u_bins, weights=np.full(u.size, dt * df))
    centers = 0.5 * (u_bins[:-1] + u_bins[1:])
    chord = _chord_length(centers, t_axis, f_axis, alpha)
    out = np.zeros_like(mass)
    ok = area > 0
    out[ok] = mass[ok] / area[ok] * chord[ok]
    return out


def _chord_length(u, t_axis, f_axis, alpha):
    """Length of the line t*cos(a) + f*sin(a) = u inside the map rectangle."""
    ca, sa = np.cos(alpha), np.sin(alpha)
    v_lo = np.full_like(u, -np.inf)
    v_hi = np.full_like(u, np.inf)
    # parameterize points on the line as (u*ca - v*sa, u*sa + v*ca)
    if abs(sa) > 1e-12:
        b1 = (u * ca - t_axis[0]) / sa
        b2 = (u * ca - t_axis[-1]) / sa
        v_lo = np.maximum(v_lo, np.minimum(b1, b2))
        v_hi = np.minimum(v_hi, np.maximum(b1, b2))
    if abs(ca) > 1e-12:
        b1 = (f_axis[0] - u * sa) / ca
        b2 = (f_axis[-1] - u * sa) / ca
        v_lo = np.maximum(v_lo, np.minimum(b1, b2))
        v_hi = np.minimum(v_hi, np.maximum(b1, b2))
    return np.clip(v_hi - v_lo, 0.0, None)


def cumulative_energy_interval(u, power, fraction):
    """Brute-force scan: smallest window of cells around the median with the fraction."""
    widths = np.empty_like(u)
    widths[1:-1] = 0.5 * (u[2:] - u[:-2])
    widths[0] = 0.5 * (u[1] - u[0])
    widths[-1] = 0.5 * (u[-1] - u[-2])
    cell = power * widths
    total = cell.sum()
    cum = np.cumsum(cell)
    med = int(np.searchsorted(cum, 0.5 * total))
    lo = hi = med
    captured = cell[med]
    while captured < fraction * total * (1 - 1e-12) and (lo > 0 or hi < len(u) - 1):
        left = cell[lo - 1] if lo > 0 else -np.inf
        right = cell[hi + 1] if hi < len(u) - 1 else -np.inf
        if right > left:
            hi += 1
            captured += cell[hi]
        else:
            lo -= 1
            captured += cell[lo]
    return u[lo], u[hi]
