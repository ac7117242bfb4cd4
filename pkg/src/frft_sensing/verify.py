"""Self-contained invariant suite behind the ``verify`` subcommand.

Each check recomputes a mathematical identity two independent ways and
compares at a fixed tolerance: the time-frequency overlap identity, order
additivity and the Fourier special case of the fractional transform, the
large-T limits relating accumulated phase to the stimulus spectrum, and
the stochastic mean-square-phase identity.  ``inject_variance_error``
scales the Monte-Carlo side of the stochastic check and exists as a
negative control: a nonzero injection must make that check fail.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .filters import FilterSpec, alpha_of_chirp, filter_kernel, u_alpha_of_f
from .sensing import (
    SignalSpec,
    accumulated_phase,
    measurement_grid,
    random_phase_ensemble,
    stochastic_phase_variance,
    synth_signal,
)
from .timefreq import (
    SampledWaveform,
    TimeGrid,
    frft,
    overlap_integral,
    wigner,
    wigner_frequency_axis,
)

__all__ = ["CheckResult", "run_all"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    observed: float
    tolerance: float
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.detail} (observed {self.observed:.3e}, tol {self.tolerance:.1e})"


def _check(name, observed, tolerance, detail) -> CheckResult:
    return CheckResult(
        name=name,
        passed=bool(observed < tolerance),
        observed=float(observed),
        tolerance=float(tolerance),
        detail=detail,
    )


def check_overlap_identity(n_pairs: int = 6, seed: int = 11) -> CheckResult:
    """Squared phase integral vs Wigner overlap for randomized chirped pairs."""
    rng = np.random.default_rng(seed)
    T = 9.6
    worst = 0.0
    for _ in range(n_pairs):
        q1 = rng.uniform(-0.125, 0.0)
        f1 = rng.uniform(1.1, 1.4)
        spec = SignalSpec(A=0.25, f1=f1, q1=q1, T=T)
        filt = FilterSpec(
            q=q1 + rng.uniform(-0.02, 0.02),
            f_j=f1 + rng.uniform(-0.05, 0.05),
            phi=0.0,
            T=T,
        )
        grid = measurement_grid(T, max(spec.f_inst_max, filt.f_inst_max), pad=0.2)
        g = synth_signal(spec, grid)
        h = filter_kernel(filt, grid)
        lhs = accumulated_phase(g, h) ** 2
        f_axis = wigner_frequency_axis(grid)
        rhs = overlap_integral(wigner(g, f_axis), wigner(h, f_axis))
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs)))
    return _check(
        "overlap-identity", worst, 1e-3, f"max relative gap over {n_pairs} random pairs"
    )


def check_frft_additivity() -> CheckResult:
    """Order additivity of the fractional transform on a Gaussian."""
    grid = TimeGrid.cover(-8.0, 8.0, 16.0 / 4000)
    t = grid.times()
    w = SampledWaveform(grid=grid, values=np.exp(-np.pi * t * t))
    u = t.copy()
    a, b = np.pi / 3, np.pi / 4
    step1 = frft(w, a, u)
    mid = SampledWaveform(
        grid=TimeGrid(u[0], u[1] - u[0], len(u)), values=step1.values
    )
    lhs = frft(mid, b, u).values
    rhs = frft(w, a + b, u).values
    err = np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs)
    return _check("frft-additivity", err, 1e-3, "composed pi/3 then pi/4 vs single 7*pi/12")


def check_frft_fourier_case() -> CheckResult:
    """Order pi/2 against an independently coded Fourier quadrature."""
    grid = TimeGrid.cover(0.0, 9.6, 9.6 / 2000)
    t = grid.times()
    vals = 0.25 * np.cos(2 * np.pi * 1.2 * t)
    w = SampledWaveform(grid=grid, values=vals)
    f = np.linspace(0.8, 1.6, 41)
    got = frft(w, np.pi / 2, f).values
    oracle = np.array(
        [np.sum(vals * np.exp(-2j * np.pi * ff * t)) * grid.dt for ff in f]
    )
    err = np.max(np.abs(got - oracle)) / np.max(np.abs(oracle))
    return _check("frft-fourier-case", err, 1e-6, "order pi/2 vs direct quadrature")


def check_phase_spectrum_limit(q: float) -> CheckResult:
    """Large-T limit: |Phi| * pi / (4 sqrt(sin a)) approaches the spectrum."""
    f1 = 1.2
    T = 50.0 / f1
    alpha = alpha_of_chirp(q)
    spec = SignalSpec(A=0.25, f1=f1, q1=q, T=T)
    grid = measurement_grid(T, spec.f_inst_max + 0.5)
    g = synth_signal(spec, grid)
    mags = []
    for phi in (0.0, np.pi / 2):
        h = filter_kernel(FilterSpec(q=q, f_j=f1, phi=phi, T=T), grid)
        mags.append(accumulated_phase(g, h))
    phase_mag = float(np.hypot(*mags))
    u = u_alpha_of_f(f1, alpha)
    spectrum_mag = float(np.abs(frft(g, alpha, [u]).values[0]))
    lhs = phase_mag * np.pi / (4 * np.sqrt(abs(np.sin(alpha))))
    err = abs(lhs - spectrum_mag) / spectrum_mag
    return _check(
        f"phase-spectrum-limit(q={q:g})", err, 2e-2, f"f1*T = {f1 * T:g} convergence"
    )


def check_stochastic_consistency(
    n_trials: int = 3000, inject_variance_error: float = 0.0
) -> CheckResult:
    """Monte-Carlo mean-square phase vs the Wigner-overlap prediction."""
    T = 9.6
    spec = SignalSpec(A=0.25, f1=1.2, q1=-0.1, T=T)
    filt = FilterSpec(q=-0.1, f_j=1.2, phi=0.0, T=T)
    grid = measurement_grid(T, max(spec.f_inst_max, filt.f_inst_max), pad=0.1)
    h = filter_kernel(filt, grid)
    out = stochastic_phase_variance(
        random_phase_ensemble(spec, grid, seed=77, n_draws=n_trials), h, n_trials
    )
    mc = out["mc_estimate"] * (1.0 + inject_variance_error)
    err = abs(mc - out["wigner_prediction"]) / out["wigner_prediction"]
    return _check(
        "stochastic-consistency",
        err,
        5e-2,
        f"{n_trials} random-phase draws vs autocorrelation map",
    )


def check_wss_shift_invariance() -> CheckResult:
    """Wigner prediction is unchanged when a short filter shifts in the record."""
    T_total, T_filter = 12.0, 6.0
    filt = FilterSpec(q=0.0, f_j=1.0, phi=0.0, T=T_filter)
    grid = measurement_grid(T_total, 2.0)
    f_axis = wigner_frequency_axis(grid)
    tau_c = 0.8

    def autocorr(t, lag):
        t = np.asarray(t, dtype=float)
        return np.exp(-np.abs(np.asarray(lag)) / tau_c) * np.ones_like(t)

    from .timefreq import wigner_stochastic

    w_g = wigner_stochastic(autocorr, grid.times(), f_axis)
    shift_cells = int(round(2.0 / grid.dt))
    base = filter_kernel(filt, grid).values
    shifted = np.roll(base, shift_cells)
    preds = []
    for vals in (base, shifted):
        w_h = wigner(SampledWaveform(grid=grid, values=vals), f_axis)
        preds.append(overlap_integral(w_g, w_h))
    err = abs(preds[0] - preds[1]) / abs(preds[0])
    return _check("wss-shift-invariance", err, 1e-3, "filter shifted by 2 us in the record")


def run_all(inject_variance_error: float = 0.0) -> list[CheckResult]:
    if abs(inject_variance_error) >= 1.0:
        raise ValidationError("injected relative error must have magnitude < 1")
    results = [
        check_overlap_identity(),
        check_frft_additivity(),
        check_frft_fourier_case(),
        check_phase_spectrum_limit(0.0),
        check_phase_spectrum_limit(-0.05),
        check_phase_spectrum_limit(-0.125),
        check_stochastic_consistency(inject_variance_error=inject_variance_error),
        check_wss_shift_invariance(),
    ]
    return results
