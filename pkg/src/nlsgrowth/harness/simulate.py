"""Simulation runs: trajectory, per-record diagnostics, CSV series and manifest."""

from __future__ import annotations

import csv
import json
import platform
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy

from .. import __version__
from ..dynamics import (
    EquationSpec,
    Hartree,
    NumericalAbort,
    PotentialCubic,
    PowerNLS,
    StepperConfig,
    energy,
    evolve,
    grid_size_for,
    mass,
    nonlinear_phase_values,
)
from ..energy import DerivedConstants, calibrate_constants, e1, e2_for
from ..multiplier import SmoothingParams
from ..spectral import FourierTable, SpectralField, lp_blocks, lp_mask, sobolev_norm, to_grid
from .config import SimulationConfig, load_config

# c_psi is a normalization constant, independent of (s, N) and of V^.
# It is fitted once on these reference settings.
CALIBRATION_PARAMS = SmoothingParams(1.0, 2.0)
CALIBRATION_BAND = 16
ACCURACY_WARNING = 0.5


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    mass: float
    energy: float
    h1: float
    hs_norms: dict
    e1: float
    e2: float | None
    lp_spectrum: dict

    def row(self) -> list[str]:
        cells = [self.t, self.mass, self.energy, self.h1, *self.hs_norms.values(), self.e1]
        out = [_fmt(x) for x in cells]
        out.append("" if self.e2 is None else _fmt(self.e2))
        out.extend(_fmt(v) for v in self.lp_spectrum.values())
        return out


def _fmt(x: float) -> str:
    return repr(float(x))


def s_label(s: float) -> str:
    return f"{float(s):g}"


def csv_header(cfg: SimulationConfig) -> list[str]:
    cols = ["t", "mass", "energy", "h1"]
    cols += [f"hs_{s_label(s)}" for s in cfg.s_values]
    cols += ["e1", "e2"]
    cols += [f"lp_{N}" for N in lp_blocks(cfg.band_limit)]
    return cols


def needs_e2(eq: EquationSpec) -> bool:
    return isinstance(eq, (Hartree, PotentialCubic)) or (isinstance(eq, PowerNLS) and eq.k == 1)


def derived_constants_for(eq: EquationSpec) -> DerivedConstants | None:
    if not needs_e2(eq):
        return None
    return calibrate_constants(CALIBRATION_PARAMS, Hartree(FourierTable.constant(1.0)),
                               band_limit=CALIBRATION_BAND)


def diagnostics(cfg: SimulationConfig, t: float, field: SpectralField,
                consts: DerivedConstants | None) -> DiagnosticsRecord:
    eq = cfg.equation
    params = cfg.smoothing
    M = cfg.band_limit
    m = mass(field)
    power = np.abs(field.coeffs) ** 2
    lp = {N: float(2 * np.pi * np.sum(power[lp_mask(M, N)])) for N in lp_blocks(M)}
    rec = DiagnosticsRecord(
        t=t,
        mass=m,
        energy=energy(eq, field),
        h1=sobolev_norm(field, 1.0),
        hs_norms={s: sobolev_norm(field, s) for s in cfg.s_values},
        e1=e1(params, field),
        e2=e2_for(eq, params, field, consts) if consts is not None else None,
        lp_spectrum=lp,
    )
    values = [rec.t, rec.mass, rec.energy, rec.h1, rec.e1, *rec.hs_norms.values(), *lp.values()]
    if rec.e2 is not None:
        values.append(rec.e2)
    if not np.all(np.isfinite(values)):
        raise NumericalAbort(t)
    return rec


def accuracy_diagnostics(cfg: SimulationConfig) -> dict:
    eq = cfg.equation
    P = grid_size_for(eq, cfg.band_limit)
    with np.errstate(over="ignore", invalid="ignore"):
        g = nonlinear_phase_values(eq, to_grid(cfg.initial.coeffs, P))
    g_max = float(np.max(np.abs(g)))
    return {
        "dt_M2": cfg.stiffness,
        "dt_g_max": cfg.dt * g_max,
        "accuracy_warning": cfg.dt * g_max > ACCURACY_WARNING,
    }


def build_info() -> dict:
    return {
        "package": "nlsgrowth",
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


@dataclass
class RunResult:
    records: list[DiagnosticsRecord]
    manifest: dict
    aborted: bool
    csv_path: Path | None = None
    manifest_path: Path | None = None


def run(cfg: SimulationConfig) -> RunResult:
    """Integrate and collect diagnostics; an abort keeps the records computed so far."""
    consts = derived_constants_for(cfg.equation)
    stepper = StepperConfig.for_equation(cfg.equation, cfg.dt)
    aborted, abort_t = False, None
    try:
        traj = evolve(cfg.equation, cfg.initial, stepper, cfg.T, cfg.record_stride)
    except NumericalAbort as exc:
        traj, aborted, abort_t = exc.trajectory, True, exc.t
    records = []
    for t, u in traj:
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                records.append(diagnostics(cfg, t, u, consts))
        except NumericalAbort as exc:
            aborted, abort_t = True, exc.t
            break
    manifest = {
        "config": cfg.raw,
        "build": build_info(),
        "derived_constants": consts.to_dict() if consts is not None else None,
        "diagnostics": accuracy_diagnostics(cfg),
        "records": len(records),
        "aborted": aborted,
        "abort_t": abort_t,
    }
    return RunResult(records, manifest, aborted)


def write_outputs(cfg: SimulationConfig, result: RunResult, out_dir: str | Path) -> RunResult:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / cfg.outputs["csv"]
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(csv_header(cfg))
        for rec in result.records:
            writer.writerow(rec.row())
    manifest_path = out / cfg.outputs["manifest"]
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(result.manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    result.csv_path, result.manifest_path = csv_path, manifest_path
    return result


def run_simulation(config_path: str | Path, out_dir: str | Path) -> RunResult:
    """Load, run and write the CSV series and JSON manifest into ``out_dir``."""
    cfg = load_config(config_path)
    return write_outputs(cfg, run(cfg), out_dir)


def read_series(csv_path: str | Path, column: str) -> tuple[np.ndarray, np.ndarray]:
    """(t, column) from a series CSV; empty cells are dropped."""
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or column not in reader.fieldnames:
            raise KeyError(f"column {column!r} not in {csv_path}")
        rows = [(float(r["t"]), float(r[column])) for r in reader if r[column] != ""]
    if not rows:
        return np.empty(0), np.empty(0)
    t, v = zip(*rows)
    return np.array(t), np.array(v)
