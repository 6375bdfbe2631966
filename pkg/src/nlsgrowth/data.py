"""Initial-data families used by the harness and the test-suite."""

from __future__ import annotations

import numpy as np

from .spectral import SpectralField, bracket, sobolev_norm


def plane_wave(band_limit: int, n: int = 1, amplitude: complex = 1.0) -> SpectralField:
    return SpectralField.from_modes(band_limit, {n: amplitude})


def two_mode(band_limit: int, n: int = 1, m: int = 2, amplitude: complex = 1.0) -> SpectralField:
    """amplitude * (e^{inx} + e^{imx})."""
    if n == m:
        raise ValueError("two_mode needs distinct frequencies")
    return SpectralField.from_modes(band_limit, {n: amplitude, m: amplitude})


def random_field(band_limit: int, seed: int = 0, h1_size: float = 1.0,
                 decay: float = 1.5, support: int | None = None) -> SpectralField:
    """Seeded field with |c_n| ~ <n>^{-decay} and uniform random phases.

    The result is rescaled to H^1 norm ``h1_size``. ``support`` restricts the
    nonzero modes to |n| <= support (default: the whole band).
    """
    rng = np.random.default_rng(seed)
    n = np.arange(-band_limit, band_limit + 1)
    phases = rng.uniform(0.0, 2 * np.pi, size=n.size)
    coeffs = bracket(n) ** (-decay) * np.exp(1j * phases)
    if support is not None:
        coeffs[np.abs(n) > support] = 0
    field = SpectralField(coeffs)
    return field * (h1_size / sobolev_norm(field, 1.0))
