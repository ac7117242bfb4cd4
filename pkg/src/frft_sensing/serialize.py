"""CSV and JSON output formats.

Every CSV carries a header row naming columns and units, numeric values at
12 significant digits, and a JSON sidecar (``<file>.json``) with grid
metadata and provenance (tool version, master seed, config hash) so a run
can be reproduced from its outputs alone.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from ._version import __version__
from .errors import ValidationError
from .filters import FilterSpec, PulseSequence
from .sensing import MeasurementEntry, MeasurementRecord, NoiseModel, SignalSpec, Spectrum
from .timefreq import FrftSpectrum, WignerMap

__all__ = [
    "fmt",
    "write_csv",
    "write_sidecar",
    "config_hash",
    "pulses_to_json",
    "write_pulse_csv",
    "write_pulse_json",
    "write_kernel_csv",
    "write_spectrum_csv",
    "write_frft_csv",
    "write_wigner_csv",
    "write_record",
    "read_record",
]

_SIG_DIGITS = 12


def fmt(x) -> str:
    """Render a number with 12 significant digits."""
    return f"{float(x):.{_SIG_DIGITS}g}"


def write_csv(path, header: list[str], rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])


def write_sidecar(path, metadata: dict) -> None:
    side = Path(str(path) + ".json")
    payload = dict(metadata)
    payload.setdefault("tool_version", __version__)
    side.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# pulse tables and kernels
# ---------------------------------------------------------------------------


def pulses_to_json(seq: PulseSequence) -> dict:
    return {
        "T": seq.duration,
        "initial_sign": int(seq.initial_sign),
        "flips": [float(t) for t in seq.flip_times],
    }


def write_pulse_csv(seq: PulseSequence, path, metadata: dict | None = None) -> None:
    write_csv(path, ["flip_time_us"], [(t,) for t in seq.flip_times])
    write_sidecar(
        path,
        {
            "format": "pulse-table",
            "T_us": seq.duration,
            "initial_sign": int(seq.initial_sign),
            "n_flips": len(seq.flip_times),
            **(metadata or {}),
        },
    )


def write_pulse_json(seq: PulseSequence, path) -> None:
    Path(path).write_text(json.dumps(pulses_to_json(seq), indent=2) + "\n")


def write_kernel_csv(waveform, path, metadata: dict | None = None) -> None:
    t = waveform.grid.times()
    if np.iscomplexobj(waveform.values):
        rows = zip(t, waveform.values.real, waveform.values.imag)
        header = ["t_us", "re", "im"]
    else:
        rows = zip(t, waveform.values)
        header = ["t_us", "value"]
    write_csv(path, header, rows)
    write_sidecar(
        path,
        {
            "format": "sampled-waveform",
            "t_start_us": waveform.grid.t_start,
            "dt_us": waveform.grid.dt,
            "n": waveform.grid.n,
            **(metadata or {}),
        },
    )


# ---------------------------------------------------------------------------
# spectra and Wigner maps
# ---------------------------------------------------------------------------


def write_frft_csv(spectrum: FrftSpectrum, path, metadata: dict | None = None) -> None:
    rows = zip(spectrum.u_points, spectrum.values.real, spectrum.values.imag)
    write_csv(path, ["u_alpha", "re", "im"], rows)
    write_sidecar(
        path,
        {
            "format": "frft-spectrum",
            "alpha_rad": spectrum.alpha,
            "n_points": len(spectrum.u_points),
            "u_units": "MHz-scaled fractional coordinate (f_j sin alpha)",
            **(metadata or {}),
        },
    )


def write_spectrum_csv(spectrum: Spectrum, path, metadata: dict | None = None) -> None:
    write_csv(path, ["f_j_MHz", "magnitude_rad"], zip(spectrum.f_j, spectrum.magnitude))
    write_sidecar(
        path,
        {
            "format": "magnitude-spectrum",
            "n_points": len(spectrum.f_j),
            "clamp_count": spectrum.clamp_count,
            **(metadata or {}),
        },
    )


def write_wigner_csv(wmap: WignerMap, path, metadata: dict | None = None) -> None:
    def rows():
        for i, t in enumerate(wmap.t_axis):
            for j, f in enumerate(wmap.f_axis):
                yield t, f, wmap.values[i, j]

    write_csv(path, ["t_us", "f_MHz", "value"], rows())
    write_sidecar(
        path,
        {
            "format": "wigner-map",
            "t_start_us": float(wmap.t_axis[0]),
            "dt_us": wmap.dt,
            "n_t": len(wmap.t_axis),
            "f_start_MHz": float(wmap.f_axis[0]),
            "df_MHz": wmap.df,
            "n_f": len(wmap.f_axis),
            **(metadata or {}),
        },
    )


# ---------------------------------------------------------------------------
# measurement records (round-trip)
# ---------------------------------------------------------------------------


def write_record(record: MeasurementRecord, path, metadata: dict | None = None) -> None:
    rows = (
        (e.filter.q, e.filter.f_j, e.phi, e.contrast)
        for e in record.entries
    )
    write_csv(path, ["q_MHz2", "f_j_MHz", "phi_rad", "contrast"], rows)
    write_sidecar(
        path,
        {
            "format": "measurement-record",
            "signal": {
                "A_rad_per_us": record.signal.A,
                "f1_MHz": record.signal.f1,
                "q1_MHz2": record.signal.q1,
                "T_us": record.signal.T,
            },
            "noise": {"variance": record.noise.variance, "seed": record.noise.seed},
            "trial": record.trial,
            "T_us": record.T,
            "n_entries": len(record.entries),
            **(metadata or {}),
        },
    )


def read_record(path) -> MeasurementRecord:
    path = Path(path)
    side = json.loads(Path(str(path) + ".json").read_text())
    if side.get("format") != "measurement-record":
        raise ValidationError(f"{path}.json does not describe a measurement record")
    sig = side["signal"]
    signal = SignalSpec(
        A=sig["A_rad_per_us"], f1=sig["f1_MHz"], q1=sig["q1_MHz2"], T=sig["T_us"]
    )
    noise = NoiseModel(variance=side["noise"]["variance"], seed=side["noise"]["seed"])
    entries = []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            spec = FilterSpec(
                q=float(row["q_MHz2"]),
                f_j=float(row["f_j_MHz"]),
                phi=float(row["phi_rad"]),
                T=signal.T,
            )
            entries.append(
                MeasurementEntry(filter=spec, phi=spec.phi, contrast=float(row["contrast"]))
            )
    return MeasurementRecord(
        entries=tuple(entries), noise=noise, signal=signal, trial=side.get("trial", 0)
    )
