"""The four periodic NLS-type equations and a Strang split-step integrator.

All equations share the form i u_t + u_xx = g(u) u with g real, so the
nonlinear substep u <- u exp(-i g dt) is solved exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Union

import numpy as np

from .spectral import (
    FourierTable,
    PhysicalSamples,
    SpectralField,
    conj_slot,
    dealiased_grid_size,
    from_grid,
    to_grid,
)


class EquationError(ValueError):
    pass


class NumericalAbort(RuntimeError):
    """Non-finite state met during time stepping."""

    def __init__(self, t: float, trajectory=None):
        super().__init__(f"non-finite values encountered at t = {t:.6g}")
        self.t = t
        self.trajectory = trajectory or []


SMOOTH_TOL = 1e-12


@dataclass(frozen=True)
class PowerNLS:
    """i u_t + u_xx = |u|^{2k} u."""

    k: int = 1

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise EquationError(f"k must be an integer >= 1, got {self.k}")

    @property
    def degree(self) -> int:
        return 2 * self.k + 1


@dataclass(frozen=True)
class Hartree:
    """i u_t + u_xx = (V * |u|^2) u, with the kernel given by its Fourier table."""

    V_hat: FourierTable = dc_field(default_factory=lambda: FourierTable.constant(1.0))

    def __post_init__(self):
        if not self.V_hat.is_even():
            raise EquationError("V^ must be even in n")
        v0 = self.V_hat(0)
        if v0 < 0 or self.V_hat.sup() > v0:
            raise EquationError("V^ must satisfy 0 <= |V^(n)| <= V^(0)")

    degree = 3


def _check_real_function(lam: SpectralField, name: str):
    c = lam.coeffs
    if np.max(np.abs(c - conj_slot(c)), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(c))):
        raise EquationError(f"{name} must be real-valued (Hermitian coefficients)")


@dataclass(frozen=True)
class PotentialCubic:
    """i u_t + u_xx = |u|^2 u + lambda u."""

    lam: SpectralField

    def __post_init__(self):
        _check_real_function(self.lam, "lambda")

    degree = 3


@dataclass(frozen=True)
class InhomogeneousCubic:
    """i u_t + u_xx = lambda |u|^2 u, lambda >= 0."""

    lam: SpectralField

    def __post_init__(self):
        _check_real_function(self.lam, "lambda")
        P = 4 * self.lam.band_limit + 8
        if np.min(to_grid(self.lam.coeffs, P).real) < -1e-12:
            raise EquationError("lambda must be nonnegative on the grid")

    degree = 3


EquationSpec = Union[PowerNLS, Hartree, PotentialCubic, InhomogeneousCubic]


def lambda_band(eq: EquationSpec) -> int:
    """Effective band of the coefficient function lambda (0 if absent)."""
    if not isinstance(eq, (PotentialCubic, InhomogeneousCubic)):
        return 0
    nz = np.nonzero(eq.lam.coeffs)[0]
    if nz.size == 0:
        return 0
    return int(np.max(np.abs(eq.lam.frequencies[nz])))


def grid_size_for(eq: EquationSpec, band_limit: int, degree: int | None = None) -> int:
    """Dealiased grid for the nonlinearity of ``eq``, widened by lambda's band."""
    d = eq.degree if degree is None else degree
    return dealiased_grid_size(band_limit, d, lambda_band(eq))


def check_fits_band(eq: EquationSpec, band_limit: int):
    """lambda must be band-limited ("smooth"): negligible beyond half the band."""
    if isinstance(eq, (PotentialCubic, InhomogeneousCubic)):
        lam = eq.lam
        n = np.abs(lam.frequencies)
        tail = np.abs(lam.coeffs[n > band_limit // 2])
        if tail.size and tail.max() >= SMOOTH_TOL:
            raise EquationError(
                f"lambda has coefficients >= {SMOOTH_TOL} beyond half the band {band_limit}"
            )


@dataclass(frozen=True)
class StepperConfig:
    dt: float
    pad_degree: int
    scheme: str = "strang"
    backward: bool = False

    def __post_init__(self):
        if not self.dt > 0:
            raise EquationError(f"dt must be positive, got {self.dt}")
        if self.scheme != "strang":
            raise EquationError(f"unknown scheme {self.scheme!r}")

    @classmethod
    def for_equation(cls, eq: EquationSpec, dt: float, backward: bool = False) -> "StepperConfig":
        return cls(dt=dt, pad_degree=eq.degree, backward=backward)

    @property
    def signed_dt(self) -> float:
        return -self.dt if self.backward else self.dt


def _lambda_on_grid(lam: SpectralField, P: int) -> np.ndarray:
    K = lam.band_limit
    if P < 2 * K + 1:
        # truncation is safe: check_fits_band certified the tail as negligible
        K = (P - 1) // 2
        lam = lam.resized(K)
    return to_grid(lam.coeffs, P).real


def nonlinear_phase_values(eq: EquationSpec, u: np.ndarray) -> np.ndarray:
    """Real g with nonlinearity g u, pointwise on the grid of ``u``."""
    rho = (u * np.conj(u)).real
    P = u.size
    if isinstance(eq, PowerNLS):
        return rho ** eq.k
    if isinstance(eq, Hartree):
        spec = np.fft.fft(rho)
        m = np.fft.fftfreq(P, d=1.0 / P).round().astype(np.int64)
        return np.fft.ifft(spec * eq.V_hat(m)).real
    if isinstance(eq, PotentialCubic):
        return rho + _lambda_on_grid(eq.lam, P)
    if isinstance(eq, InhomogeneousCubic):
        return _lambda_on_grid(eq.lam, P) * rho
    raise EquationError(f"unknown equation {eq!r}")


def nonlinear_phase(eq: EquationSpec, samples: PhysicalSamples) -> PhysicalSamples:
    return PhysicalSamples(nonlinear_phase_values(eq, samples.values))


def nonlinear_term(eq: EquationSpec, field: SpectralField) -> SpectralField:
    """Band-limited coefficients of g(u) u, computed without aliasing."""
    M = field.band_limit
    P = grid_size_for(eq, M)
    u = to_grid(field.coeffs, P)
    return SpectralField(from_grid(nonlinear_phase_values(eq, u) * u, M))


def mass(field: SpectralField) -> float:
    return float(2 * np.pi * np.sum(np.abs(field.coeffs) ** 2))


def energy(eq: EquationSpec, field: SpectralField) -> float:
    """Conserved energy of ``eq``; integrals are exact on the dealiased grid."""
    M = field.band_limit
    n = field.frequencies
    kinetic = np.pi * float(np.sum(n * n * np.abs(field.coeffs) ** 2))
    if isinstance(eq, Hartree):
        # 1/4 * 2pi * sum_m V^(m) |rho_m|^2 with rho the coefficients of |u|^2
        P = dealiased_grid_size(M, 3)
        u = to_grid(field.coeffs, P)
        rho = from_grid((u * np.conj(u)).real.astype(complex), 2 * M)
        m = np.arange(-2 * M, 2 * M + 1)
        return kinetic + 0.5 * np.pi * float(np.sum(eq.V_hat(m) * np.abs(rho) ** 2))
    P = grid_size_for(eq, M)
    u = to_grid(field.coeffs, P)
    rho = (u * np.conj(u)).real
    w = 2 * np.pi / P
    if isinstance(eq, PowerNLS):
        return kinetic + w * float(np.sum(rho ** (eq.k + 1))) / (2 * eq.k + 2)
    lam = _lambda_on_grid(eq.lam, P)
    if isinstance(eq, PotentialCubic):
        return kinetic + w * float(np.sum(rho * rho)) / 4 + w * float(np.sum(lam * rho)) / 2
    if isinstance(eq, InhomogeneousCubic):
        return kinetic + w * float(np.sum(lam * rho * rho)) / 4
    raise EquationError(f"unknown equation {eq!r}")


class _Stepper:
    """Precomputed propagators for repeated Strang steps on one band."""

    def __init__(self, eq: EquationSpec, band_limit: int, cfg: StepperConfig):
        if cfg.pad_degree < eq.degree:
            raise EquationError(
                f"pad_degree {cfg.pad_degree} below the nonlinearity degree {eq.degree}"
            )
        check_fits_band(eq, band_limit)
        self.eq = eq
        self.M = band_limit
        self.P = grid_size_for(eq, band_limit, cfg.pad_degree)
        self.dt = cfg.signed_dt
        n = np.arange(-band_limit, band_limit + 1)
        self.half_linear = np.exp(-1j * n * n * self.dt / 2)
        self._static = None
        if isinstance(eq, (PotentialCubic, InhomogeneousCubic)):
            self._static = _lambda_on_grid(eq.lam, self.P)
        elif isinstance(eq, Hartree):
            m = np.fft.fftfreq(self.P, d=1.0 / self.P).round().astype(np.int64)
            self._static = eq.V_hat(m)

    def _g(self, u):
        eq = self.eq
        rho = (u * np.conj(u)).real
        if isinstance(eq, PowerNLS):
            return rho ** eq.k
        if isinstance(eq, Hartree):
            return np.fft.ifft(np.fft.fft(rho) * self._static).real
        if isinstance(eq, PotentialCubic):
            return rho + self._static
        return self._static * rho

    def __call__(self, c: np.ndarray) -> np.ndarray:
        c = self.half_linear * c
        u = to_grid(c, self.P)
        u = u * np.exp(-1j * self.dt * self._g(u))
        c = from_grid(u, self.M)
        return self.half_linear * c


def step(eq: EquationSpec, field: SpectralField, cfg: StepperConfig) -> SpectralField:
    """One Strang step: half linear, exact nonlinear phase, half linear."""
    return SpectralField(_Stepper(eq, field.band_limit, cfg)(field.coeffs))


def evolve(eq: EquationSpec, initial: SpectralField, cfg: StepperConfig, T: float,
           record_every: int = 1) -> list[tuple[float, SpectralField]]:
    """Fixed-step trajectory on [0, T], recorded every ``record_every`` steps and at T.

    With ``cfg.backward`` the recorded times run 0, -dt, ... down to -T.
    """
    if not T > 0:
        raise EquationError(f"T must be positive, got {T}")
    if record_every < 1:
        raise EquationError("record_every must be >= 1")
    n_steps = max(1, int(round(T / cfg.dt)))
    stepper = _Stepper(eq, initial.band_limit, cfg)
    sign = -1.0 if cfg.backward else 1.0
    c = np.array(initial.coeffs)
    out = [(0.0, initial)]
    for j in range(1, n_steps + 1):
        with np.errstate(over="ignore", invalid="ignore"):  # caught by the guard below
            c = stepper(c)
        if not np.isfinite(c).all():
            raise NumericalAbort(sign * j * cfg.dt, out)
        if j % record_every == 0 or j == n_steps:
            out.append((sign * j * cfg.dt, SpectralField(c.copy())))
    return out


def hartree_plane_wave(alpha: complex, n: int, V_hat0: float, t: float) -> SpectralField:
    """Exact single-mode solution alpha exp(-i V^(0)|alpha|^2 t) exp(i(nx - n^2 t))."""
    phase = -(V_hat0 * abs(alpha) ** 2 + n * n) * t
    return SpectralField.from_modes(abs(n), {n: alpha * complex(math.cos(phase), math.sin(phase))})


def gauge_transform(field: SpectralField, lambda0: float, t: float) -> SpectralField:
    return SpectralField(field.coeffs * np.exp(-1j * lambda0 * t))
