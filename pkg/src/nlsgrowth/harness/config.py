"""JSON configuration for simulation runs and verification suites."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from ..data import plane_wave, random_field, two_mode
from ..dynamics import (
    EquationError,
    EquationSpec,
    Hartree,
    InhomogeneousCubic,
    PotentialCubic,
    PowerNLS,
    check_fits_band,
)
from ..multiplier import MultiplierError, SmoothingParams
from ..spectral import FourierTable, SpectralField

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid configuration; ``field`` is the dotted path of the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def load_schema(name: str) -> dict:
    text = resources.files(__package__).joinpath("schemas", f"{name}.schema.json").read_text("utf-8")
    return json.loads(text)


def _validate(doc: Any, schema_name: str):
    validator = jsonschema.Draft202012Validator(load_schema(schema_name))
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = ".".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(path, err.message)


def read_json(path: str | Path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"not valid JSON: {exc}") from exc
    except OSError as exc:
        raise ConfigError("<file>", str(exc)) from exc


def _complex(value) -> complex:
    if isinstance(value, list):
        return complex(value[0], value[1])
    return complex(value)


def parse_even_table(doc: dict, where: str) -> FourierTable:
    values = {}
    for key, v in doc["values"].items():
        n = int(key)
        if abs(n) in values and values[abs(n)] != v:
            raise ConfigError(f"{where}.values.{key}", "table must be even in n")
        values[abs(n)] = float(v)
    full = {}
    for n, v in values.items():
        full[n] = v
        full[-n] = v
    return FourierTable(full, default=float(doc.get("default", 0.0)))


def parse_coefficient_table(doc: dict, band_limit: int, where: str) -> SpectralField:
    coeffs = {int(k): _complex(v) for k, v in doc["coefficients"].items()}
    K = max(coeffs, default=0)
    if K > band_limit:
        raise ConfigError(f"{where}.coefficients.{K}", f"index outside band {band_limit}")
    if abs(coeffs.get(0, 0).imag) > 0:
        raise ConfigError(f"{where}.coefficients.0", "zero mode of a real function must be real")
    modes = {}
    for n, c in coeffs.items():
        modes[n] = c
        if n:
            modes[-n] = c.conjugate()
    return SpectralField.from_modes(K, modes)


@dataclass(frozen=True)
class SimulationConfig:
    equation: EquationSpec
    band_limit: int
    dt: float
    T: float
    record_stride: int
    s_values: tuple[float, ...]
    threshold: float
    energy_s: float
    initial: SpectralField
    outputs: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    @property
    def smoothing(self) -> SmoothingParams:
        return SmoothingParams(self.energy_s, self.threshold)

    @property
    def stiffness(self) -> float:
        """dt * M^2, reported only: the linear substep is exact."""
        return self.dt * self.band_limit ** 2


def _parse_equation(doc: dict, M: int) -> EquationSpec:
    kind = doc["type"]
    try:
        if kind == "power":
            return PowerNLS(int(doc.get("k", 1)))
        if kind == "hartree":
            if "V_hat" not in doc:
                raise ConfigError("equation.V_hat", "required for the hartree equation")
            return Hartree(parse_even_table(doc["V_hat"], "equation.V_hat"))
        if "lambda" not in doc:
            raise ConfigError("equation.lambda", f"required for the {kind} equation")
        lam = parse_coefficient_table(doc["lambda"], M, "equation.lambda")
        eq = PotentialCubic(lam) if kind == "potential" else InhomogeneousCubic(lam)
        check_fits_band(eq, M)
        return eq
    except EquationError as exc:
        sub = "V_hat" if kind == "hartree" else ("k" if kind == "power" else "lambda")
        raise ConfigError(f"equation.{sub}", str(exc)) from exc


def _parse_initial(doc: dict, M: int) -> SpectralField:
    family = doc["family"]
    amp = _complex(doc.get("amplitude", 1.0))
    try:
        if family == "plane_wave":
            return plane_wave(M, int(doc.get("n", 1)), amp)
        if family == "two_mode":
            return two_mode(M, int(doc.get("n", 1)), int(doc.get("m", 2)), amp)
        return random_field(M, seed=int(doc.get("seed", 0)),
                            h1_size=float(doc.get("h1_size", 1.0)),
                            decay=float(doc.get("decay", 1.5)),
                            support=doc.get("support"))
    except ValueError as exc:
        raise ConfigError("initial_data", str(exc)) from exc


def parse_config(doc: dict) -> SimulationConfig:
    _validate(doc, "config")
    M = int(doc["band_limit"])
    eq = _parse_equation(doc["equation"], M)
    sm = doc["smoothing"]
    s_values = tuple(float(s) for s in sm["s"])
    energy_s = float(sm.get("energy_s", s_values[0]))
    try:
        SmoothingParams(energy_s, float(sm["threshold"]))
    except MultiplierError as exc:
        raise ConfigError("smoothing", str(exc)) from exc
    initial = _parse_initial(doc["initial_data"], M)
    if not np.any(initial.coeffs):
        raise ConfigError("initial_data", "initial field is identically zero")
    outputs = {"csv": "series.csv", "manifest": "manifest.json"}
    outputs.update(doc.get("outputs", {}))
    return SimulationConfig(
        equation=eq,
        band_limit=M,
        dt=float(doc["dt"]),
        T=float(doc["T"]),
        record_stride=int(doc.get("record_stride", 1)),
        s_values=s_values,
        threshold=float(sm["threshold"]),
        energy_s=energy_s,
        initial=initial,
        outputs=outputs,
        raw=doc,
    )


def load_config(path: str | Path) -> SimulationConfig:
    return parse_config(read_json(path))


@dataclass(frozen=True)
class SuiteConfig:
    checks: tuple[str, ...] | None = None
    workers: int = 1
    mutation: str | None = None
    monitoring: dict = field(default_factory=dict)


def parse_suite(doc: dict) -> SuiteConfig:
    _validate(doc, "suite")
    checks = doc.get("checks")
    return SuiteConfig(
        checks=tuple(checks) if checks is not None else None,
        workers=int(doc.get("workers", 1)),
        mutation=doc.get("mutation"),
        monitoring=dict(doc.get("monitoring", {})),
    )


def load_suite(path: str | Path) -> SuiteConfig:
    return parse_suite(read_json(path))
