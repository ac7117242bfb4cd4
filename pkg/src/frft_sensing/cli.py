"""Command-line interface.

Subcommands::

    filter      pulse table + sampled kernel for one filter spec
    spectrum    trial-averaged magnitude spectra for the configured sweep
    stats       estimation/detection statistics versus chirp rate
    frft        fractional transform of a chirped-cosine stimulus
    wigner      Wigner map of a stimulus or filter kernel
    verify      run the numerical invariant suite
    reproduce   fig3 | fig4 batch runs with the paper-scale defaults

Global flags: ``--config PATH`` (JSON, see config.DEFAULTS), ``--seed``,
``--out DIR``, ``--jobs N``.  Exit codes: 0 success, 2 validation error,
3 numerical-resolution error, 1 failed verification.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import serialize, verify
from ._version import __version__
from .config import DEFAULTS, ExperimentConfig
from .errors import ResolutionError, ValidationError
from .filters import FilterSpec, filter_kernel, flip_times, max_kernel_dt
from .inference import (
    ForwardModel,
    HypothesisModel,
    adaptive_crb,
    bayes_error,
    bayesian_crb,
    fit_least_squares,
    map_test,
    mse_bootstrap,
)
from .sensing import (
    NoiseModel,
    SignalSpec,
    measure,
    measurement_grid,
    spectrum_sweep,
    synth_signal,
)
from .timefreq import TimeGrid, frft, wigner

__all__ = ["main"]

_BACKGROUND_TRIAL_OFFSET = 10_000


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ResolutionError as exc:
        print(f"resolution error: {exc}", file=sys.stderr)
        return 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frft-sensing",
        description="Chirped decoupling filters and fractional-domain sensing sweeps",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", type=Path, default=None, help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        p.add_argument("--jobs", type=int, default=None, help="worker processes")

    p = sub.add_parser("filter", help="pulse table and kernel of one filter")
    p.add_argument("--q", type=float, required=True, help="chirp rate (MHz^2)")
    p.add_argument("--f", type=float, required=True, help="modulation frequency (MHz)")
    p.add_argument("--phi", type=float, default=0.0, help="phase offset (rad)")
    p.add_argument("--T", type=float, required=True, help="duration (us)")
    p.add_argument("--dt", type=float, default=None, help="kernel sample step (us)")
    p.add_argument("--out", type=Path, default=Path("out"))
    p.set_defaults(handler=cmd_filter)

    p = sub.add_parser("spectrum", help="trial-averaged spectra for the configured sweep")
    add_common(p)
    p.set_defaults(handler=cmd_spectrum)

    p = sub.add_parser("stats", help="estimation and detection statistics vs chirp rate")
    add_common(p)
    p.set_defaults(handler=cmd_stats)

    p = sub.add_parser("frft", help="fractional transform of a chirped-cosine stimulus")
    p.add_argument("--alpha", type=float, required=True, help="transform order (rad)")
    p.add_argument("--f1", type=float, required=True)
    p.add_argument("--q1", type=float, default=0.0)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--u-start", type=float, required=True)
    p.add_argument("--u-stop", type=float, required=True)
    p.add_argument("--u-num", type=int, default=400)
    p.add_argument("--out", type=Path, default=Path("out"))
    p.set_defaults(handler=cmd_frft)

    p = sub.add_parser("wigner", help="Wigner map of a stimulus or filter kernel")
    p.add_argument("--kind", choices=("signal", "filter"), default="signal")
    p.add_argument("--f", type=float, required=True, help="f1 or f_j (MHz)")
    p.add_argument("--q", type=float, default=0.0, help="q1 or filter q (MHz^2)")
    p.add_argument("--amplitude", type=float, default=1.0, help="signal amplitude")
    p.add_argument("--phi", type=float, default=0.0, help="filter phase (rad)")
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--out", type=Path, default=Path("out"))
    p.set_defaults(handler=cmd_wigner)

    p = sub.add_parser("verify", help="run the numerical invariant suite")
    p.add_argument(
        "--inject-variance-error",
        type=float,
        default=0.0,
        help="negative control: scale the stochastic Monte-Carlo estimate",
    )
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("reproduce", help="paper-scale batch runs")
    p.add_argument("figure", choices=("fig3", "fig4"))
    add_common(p)
    p.set_defaults(handler=cmd_reproduce)

    return parser


def _load_config(args) -> ExperimentConfig:
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "jobs", None) is not None:
        overrides["jobs"] = args.jobs
    return ExperimentConfig.load(getattr(args, "config", None), overrides)


def _provenance(config: ExperimentConfig, command: str) -> dict:
    return {
        "command": command,
        "config": config.to_dict(),
        "config_hash": serialize.config_hash(config.to_dict()),
        "master_seed": config.seed,
    }


# ---------------------------------------------------------------------------
# single-shot commands
# ---------------------------------------------------------------------------


def cmd_filter(args) -> int:
    spec = FilterSpec(q=args.q, f_j=args.f, phi=args.phi, T=args.T)
    seq = flip_times(spec)
    dt = args.dt if args.dt is not None else max_kernel_dt(spec)
    grid = TimeGrid.cover(0.0, spec.T, dt)
    kernel = filter_kernel(spec, grid)
    out = Path(args.out)
    meta = {"q_MHz2": spec.q, "f_j_MHz": spec.f_j, "phi_rad": spec.phi}
    serialize.write_pulse_csv(seq, out / "pulses.csv", metadata=meta)
    serialize.write_pulse_json(seq, out / "pulses.json")
    serialize.write_kernel_csv(kernel, out / "kernel.csv", metadata=meta)
    print(f"wrote {out / 'pulses.csv'}, {out / 'pulses.json'}, {out / 'kernel.csv'}")
    return 0


def cmd_frft(args) -> int:
    if args.u_num < 2 or args.u_stop <= args.u_start:
        raise ValidationError("need an increasing u range with at least 2 points")
    spec = SignalSpec(A=args.amplitude, f1=args.f1, q1=args.q1, T=args.T)
    u = np.linspace(args.u_start, args.u_stop, args.u_num)
    cot = abs(np.cos(args.alpha) / np.sin(args.alpha)) if args.alpha != np.pi / 2 else 0.0
    csc = abs(1.0 / np.sin(args.alpha))
    f_kernel = csc * max(abs(args.u_start), abs(args.u_stop)) + cot * args.T
    dt = min(1.0 / (64 * max(spec.f_inst_max, 1e-9)), 0.5 / max(f_kernel, 1e-9))
    grid = TimeGrid.cover(0.0, args.T, dt)
    spectrum = frft(synth_signal(spec, grid), args.alpha, u)
    out = Path(args.out)
    serialize.write_frft_csv(
        spectrum,
        out / "frft.csv",
        metadata={"signal": {"A": spec.A, "f1": spec.f1, "q1": spec.q1, "T": spec.T}},
    )
    print(f"wrote {out / 'frft.csv'}")
    return 0


def cmd_wigner(args) -> int:
    if args.kind == "signal":
        spec = SignalSpec(A=args.amplitude, f1=args.f, q1=args.q, T=args.T)
        grid = measurement_grid(args.T, spec.f_inst_max, pad=0.1 * args.T)
        wave = synth_signal(spec, grid)
        meta = {"kind": "signal", "A": spec.A, "f1": spec.f1, "q1": spec.q1, "T": spec.T}
    else:
        spec = FilterSpec(q=args.q, f_j=args.f, phi=args.phi, T=args.T)
        grid = measurement_grid(args.T, spec.f_inst_max, pad=0.1 * args.T)
        wave = filter_kernel(spec, grid)
        meta = {"kind": "filter", "q": spec.q, "f_j": spec.f_j, "phi": spec.phi, "T": spec.T}
    wmap = wigner(wave)
    out = Path(args.out)
    serialize.write_wigner_csv(wmap, out / "wigner.csv", metadata=meta)
    print(f"wrote {out / 'wigner.csv'} ({len(wmap.t_axis)} x {len(wmap.f_axis)} grid)")
    return 0


def cmd_verify(args) -> int:
    results = verify.run_all(inject_variance_error=args.inject_variance_error)
    for res in results:
        print(res.line())
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} checks passed")
    return 0 if n_fail == 0 else 1


# ---------------------------------------------------------------------------
# sweep commands
# ---------------------------------------------------------------------------


def _run_indexed(tasks, worker, jobs: int):
    """Evaluate worker over tasks, merging results in task order."""
    if jobs <= 1 or len(tasks) <= 1:
        return [worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, tasks))


def _spectrum_rows(task) -> list[tuple]:
    """Averaged sweep rows for one (q1, mode, f1) combination."""
    cfg_dict, q1, mode, f1, include_background = task
    q_filter = q1 if mode == "matched" else 0.0
    config = ExperimentConfig.from_dict(cfg_dict)
    signal = SignalSpec(A=config.amplitude, f1=f1, q1=q1, T=config.T)
    noise = NoiseModel(variance=config.noise_variance, seed=config.seed)
    f_grid = config.f_grid()
    mags = np.zeros(len(f_grid))
    bg = np.zeros(len(f_grid))
    clamps = 0
    for trial in range(config.trials_per_f1):
        sw = spectrum_sweep(signal, q_filter, f_grid, noise, trial=trial)
        mags += sw.magnitude
        clamps += sw.clamp_count
        if include_background:
            ref_signal = SignalSpec(A=0.0, f1=f1, q1=q1, T=config.T)
            ref = spectrum_sweep(
                ref_signal, q_filter, f_grid, noise, trial=trial + _BACKGROUND_TRIAL_OFFSET
            )
            bg += ref.magnitude
    mags /= config.trials_per_f1
    bg /= config.trials_per_f1
    return [
        (q1, f1, fj, m, b, m - b, clamps)
        for fj, m, b in zip(f_grid, mags, bg)
    ]


def cmd_spectrum(args) -> int:
    config = _load_config(args)
    out = Path(getattr(args, "out", Path("out")))
    jobs = config.jobs
    tasks = []
    for q1 in config.q1_grid():
        for mode in ("matched", "unchirped"):
            for f1 in config.f1_values:
                tasks.append(
                    (config.to_dict(), float(q1), mode, float(f1),
                     config.subtract_background)
                )
    results = _run_indexed(tasks, _spectrum_rows, jobs)
    for task, rows in zip(tasks, results):
        _, q1, mode, f1, _ = task
        name = f"spectrum_q1={q1:+.6g}_{mode}_f1={f1:.6g}.csv"
        serialize.write_csv(
            out / name,
            ["q1_MHz2", "f1_MHz", "f_j_MHz", "magnitude_rad", "background_rad",
             "corrected_rad", "clamped_samples"],
            rows,
        )
        serialize.write_sidecar(out / name, _provenance(config, "spectrum"))
    print(f"wrote {len(tasks)} spectra under {out}")
    return 0


def _fig3_rows(task) -> list[tuple]:
    """One q1 row of the figure-3 style sweep: spectra merged over f1 truths."""
    cfg_dict, q1, mode = task
    config = ExperimentConfig.from_dict(cfg_dict)
    f_grid = config.f_grid()
    acc = np.zeros(len(f_grid))
    bg_acc = np.zeros(len(f_grid))
    clamps = 0
    n = 0
    for f1 in config.f1_values:
        rows = _spectrum_rows((cfg_dict, q1, mode, f1, config.subtract_background))
        acc += np.array([r[3] for r in rows])
        bg_acc += np.array([r[4] for r in rows])
        clamps += rows[0][6]
        n += 1
    acc /= n
    bg_acc /= n
    return [
        (q1, fj, m, b, m - b, clamps) for fj, m, b in zip(f_grid, acc, bg_acc)
    ]


def _reproduce_fig3(config: ExperimentConfig, out: Path) -> int:
    header = ["q1_MHz2", "f_j_MHz", "magnitude_rad", "background_rad",
              "corrected_rad", "clamped_samples"]
    for mode in ("matched", "unchirped"):
        tasks = [(config.to_dict(), float(q1), mode) for q1 in config.q1_grid()]
        results = _run_indexed(tasks, _fig3_rows, config.jobs)
        rows = [row for rows_ in results for row in rows_]
        path = out / f"fig3_{mode}.csv"
        serialize.write_csv(path, header, rows)
        serialize.write_sidecar(path, _provenance(config, f"reproduce fig3 {mode}"))
    print(f"wrote {out / 'fig3_matched.csv'} and {out / 'fig3_unchirped.csv'}")
    return 0


def _fig4_row(task) -> dict:
    """All statistics for one chirp rate; returns one flat row."""
    cfg_dict, q1 = task
    config = ExperimentConfig.from_dict(cfg_dict)
    noise = NoiseModel(variance=config.noise_variance, seed=config.seed)
    f_grid = config.f_grid()
    amplitude = config.amplitude
    f1_ref = float(config.f1_values[0])
    f1_pair = (float(config.f1_values[0]), float(config.f1_values[1]))
    row: dict = {"q1_MHz2": q1}

    for mode, q_filter in (("matched", q1), ("unchirped", 0.0)):
        model = ForwardModel.build(
            signal_q=q1, filter_q=q_filter, T=config.T, f_list=f_grid
        )
        specs = [
            FilterSpec(q=q_filter, f_j=float(fj), phi=float(ph), T=config.T)
            for fj in f_grid
            for ph in (0.0, np.pi / 2)
        ]
        h0 = HypothesisModel(label=f"f1={f1_pair[0]}", model=model, A=amplitude, f1=f1_pair[0])
        h1 = HypothesisModel(label=f"f1={f1_pair[1]}", model=model, A=amplitude, f1=f1_pair[1])

        errors = []
        map_wrong = 0
        n_records = 0
        for fi, f1 in enumerate(f1_pair):
            signal = SignalSpec(A=amplitude, f1=f1, q1=q1, T=config.T)
            for trial in range(config.trials_per_f1):
                record = measure(
                    signal, specs, noise,
                    trial=fi * config.trials_per_f1 + trial,
                    grid=model.grid,
                )
                mags = record.contrasts().reshape(len(f_grid), 2)
                phases = np.arccos(np.clip(mags, -1.0, 1.0))
                init_f1 = float(f_grid[np.argmax(np.hypot(phases[:, 0], phases[:, 1]))])
                fit = fit_least_squares(
                    record, model, init=(0.1, init_f1),
                    f1_grid_step=config.multistart_f1_step,
                )
                errors.append(fit.f1_hat - f1)
                result = map_test(record, h0, h1)
                map_wrong += 0 if result.correct else 1
                n_records += 1

        boot = mse_bootstrap(
            np.asarray(errors), truth=0.0, n_resamples=config.n_bootstrap, seed=config.seed
        )
        bcrb = bayesian_crb(
            model, (amplitude, f1_ref), config.noise_variance,
            prior_variance_grid=config.prior_variance_grid(),
        )
        adaptive = adaptive_crb(
            model, (amplitude, f1_ref), config.noise_variance,
            n_samples=config.adaptive_n_samples,
            energy_fraction=config.energy_fraction,
        )
        pe = bayes_error(h0, h1, config.noise_variance)

        row[f"mse_{mode}"] = float(np.mean(np.square(errors)))
        row[f"mse_boot_mean_{mode}"] = boot["mse_mean"]
        row[f"mse_boot_std_{mode}"] = boot["mse_std"]
        row[f"bcrb_{mode}"] = bcrb.value
        row[f"bcrb_prior_var_{mode}"] = bcrb.prior_variance_argmax
        row[f"crb_adaptive_{mode}"] = adaptive.value
        row[f"adaptive_range_lo_{mode}"] = adaptive.sample_range[0]
        row[f"adaptive_range_hi_{mode}"] = adaptive.sample_range[1]
        row[f"map_error_rate_{mode}"] = map_wrong / n_records
        row[f"bayes_error_{mode}"] = pe
    return row


_FIG4_COLUMNS = [
    "q1_MHz2",
    "mse_matched", "mse_boot_mean_matched", "mse_boot_std_matched",
    "bcrb_matched", "bcrb_prior_var_matched",
    "crb_adaptive_matched", "adaptive_range_lo_matched", "adaptive_range_hi_matched",
    "map_error_rate_matched", "bayes_error_matched",
    "mse_unchirped", "mse_boot_mean_unchirped", "mse_boot_std_unchirped",
    "bcrb_unchirped", "bcrb_prior_var_unchirped",
    "crb_adaptive_unchirped", "adaptive_range_lo_unchirped", "adaptive_range_hi_unchirped",
    "map_error_rate_unchirped", "bayes_error_unchirped",
]


def cmd_stats(args) -> int:
    config = _load_config(args)
    out = Path(getattr(args, "out", Path("out")))
    tasks = [(config.to_dict(), float(q1)) for q1 in config.q1_grid()]
    rows = _run_indexed(tasks, _fig4_row, config.jobs)
    path = out / "stats.csv"
    serialize.write_csv(
        path, _FIG4_COLUMNS, [[row[c] for c in _FIG4_COLUMNS] for row in rows]
    )
    serialize.write_sidecar(path, _provenance(config, "stats"))
    print(f"wrote {path}")
    return 0


def cmd_reproduce(args) -> int:
    config = _load_config(args)
    out = Path(getattr(args, "out", Path("out")))
    if args.figure == "fig3":
        return _reproduce_fig3(config, out)
    return cmd_stats(args)


if __name__ == "__main__":
    sys.exit(main())
