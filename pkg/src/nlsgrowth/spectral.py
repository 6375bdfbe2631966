"""Fourier-side representation of functions on the circle [0, 2*pi).

A field is stored by its normalized coefficients c_n, u(x) = sum_n c_n e^{inx},
on a symmetric band |n| <= M. Index ``n`` lives at array position ``n + M``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.fft import fft, ifft, next_fast_len


class SpectralError(ValueError):
    """Raised when a transform or projection request is inconsistent."""


def _as_complex(values) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128)
    if arr.ndim != 1:
        raise SpectralError("coefficient array must be one-dimensional")
    return arr


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Normalized Fourier coefficients on the band [-M, M]."""

    coeffs: np.ndarray

    def __post_init__(self):
        arr = _as_complex(self.coeffs)
        if arr.size % 2 != 1:
            raise SpectralError(f"coefficient array has even length {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise SpectralError("coefficients contain NaN or Inf")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @property
    def band_limit(self) -> int:
        return (self.coeffs.size - 1) // 2

    @property
    def frequencies(self) -> np.ndarray:
        M = self.band_limit
        return np.arange(-M, M + 1)

    @classmethod
    def zeros(cls, band_limit: int) -> "SpectralField":
        return cls(np.zeros(2 * band_limit + 1, dtype=np.complex128))

    @classmethod
    def from_modes(cls, band_limit: int, modes: Mapping[int, complex]) -> "SpectralField":
        arr = np.zeros(2 * band_limit + 1, dtype=np.complex128)
        for n, c in modes.items():
            if abs(n) > band_limit:
                raise SpectralError(f"mode {n} outside band {band_limit}")
            arr[n + band_limit] = c
        return cls(arr)

    def coeff(self, n: int) -> complex:
        M = self.band_limit
        if abs(n) > M:
            return 0j
        return complex(self.coeffs[n + M])

    def with_coeffs(self, coeffs: np.ndarray) -> "SpectralField":
        return SpectralField(coeffs)

    def resized(self, band_limit: int) -> "SpectralField":
        """Zero-pad or truncate to a new band."""
        M = self.band_limit
        out = np.zeros(2 * band_limit + 1, dtype=np.complex128)
        K = min(M, band_limit)
        out[band_limit - K:band_limit + K + 1] = self.coeffs[M - K:M + K + 1]
        return SpectralField(out)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        M = max(self.band_limit, other.band_limit)
        return SpectralField(self.resized(M).coeffs + other.resized(M).coeffs)

    def __mul__(self, scalar: complex) -> "SpectralField":
        return SpectralField(self.coeffs * scalar)

    __rmul__ = __mul__

    def __repr__(self):
        return f"SpectralField(band_limit={self.band_limit})"


@dataclass(frozen=True, eq=False)
class PhysicalSamples:
    """Samples on the uniform grid x_j = 2*pi*j/P."""

    values: np.ndarray

    def __post_init__(self):
        arr = _as_complex(self.values)
        if arr.size < 1:
            raise SpectralError("empty sample array")
        object.__setattr__(self, "values", arr)

    @property
    def grid_size(self) -> int:
        return self.values.size

    @property
    def grid(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.grid_size) / self.grid_size


def bracket(n):
    """Japanese bracket <n> = sqrt(1 + n^2)."""
    return np.sqrt(1.0 + np.square(np.asarray(n, dtype=float)))


def dealiased_grid_size(band_limit: int, degree: int, extra_band: int = 0) -> int:
    """Smallest FFT-friendly P with P >= (degree + 1) * M + extra_band + 1.

    On such a grid a degree-``degree`` product of band-M fields (times one
    fixed factor of band ``extra_band``), truncated back to the band, carries
    no aliased modes.
    """
    return next_fast_len((degree + 1) * band_limit + extra_band + 1)


def to_grid(coeffs: np.ndarray, grid_size: int) -> np.ndarray:
    """Raw synthesis of a symmetric coefficient array onto ``grid_size`` points."""
    M = (coeffs.size - 1) // 2
    if grid_size < 2 * M + 1:
        raise SpectralError(
            f"grid of {grid_size} points cannot hold band {M} (need >= {2 * M + 1})"
        )
    buf = np.zeros(grid_size, dtype=np.complex128)
    buf[:M + 1] = coeffs[M:]
    if M:
        buf[-M:] = coeffs[:M]
    return ifft(buf, norm="forward")


def from_grid(values: np.ndarray, band_limit: int) -> np.ndarray:
    """Raw analysis: coefficients |n| <= band_limit of grid samples."""
    P = values.size
    if P < 2 * band_limit + 1:
        raise SpectralError(
            f"band {band_limit} too large for grid of {P} points "
            f"(need >= {2 * band_limit + 1})"
        )
    spec = fft(values, norm="forward")
    M = band_limit
    out = np.empty(2 * M + 1, dtype=np.complex128)
    out[M:] = spec[:M + 1]
    if M:
        out[:M] = spec[-M:]
    return out


def synthesize(field: SpectralField, grid_size: int) -> PhysicalSamples:
    """values[j] = sum_n c_n exp(i n x_j). Refuses grids that would alias."""
    return PhysicalSamples(to_grid(field.coeffs, grid_size))


def analyze(samples: PhysicalSamples, band_limit: int) -> SpectralField:
    """c_n = (1/P) sum_j values[j] exp(-i n x_j) for |n| <= band_limit."""
    return SpectralField(from_grid(samples.values, band_limit))


def conj_slot(coeffs: np.ndarray) -> np.ndarray:
    """Coefficients of the conjugate function: (u-bar)^(m) = conj(c_{-m})."""
    return np.conj(coeffs[::-1])


def sobolev_norm(field: SpectralField, s: float) -> float:
    weights = bracket(field.frequencies) ** (2 * s)
    return float(np.sqrt(np.sum(weights * np.abs(field.coeffs) ** 2)))


def _is_dyadic(block) -> bool:
    return isinstance(block, (int, np.integer)) and block >= 1 and (block & (block - 1)) == 0


def dyadic_block(n):
    """Dyadic block containing |n|: largest power of two <= |n|, and 1 for n = 0."""
    a = np.maximum(np.abs(np.asarray(n, dtype=np.int64)), 1)
    _, exponent = np.frexp(a.astype(float))
    out = np.left_shift(np.int64(1), (exponent - 1).astype(np.int64))
    return out if out.ndim else int(out)


def lp_blocks(band_limit: int) -> list[int]:
    """Dyadic blocks 1, 2, 4, ... that meet the band."""
    blocks = [1]
    while blocks[-1] * 2 <= band_limit:
        blocks.append(blocks[-1] * 2)
    return blocks


def lp_mask(band_limit: int, block: int) -> np.ndarray:
    if not _is_dyadic(block):
        raise SpectralError(f"block {block!r} is not a dyadic integer")
    n = np.arange(-band_limit, band_limit + 1)
    return dyadic_block(n) == block


def lp_project(field: SpectralField, block: int) -> SpectralField:
    """Keep N <= |n| < 2N; block 1 also keeps the zero mode."""
    mask = lp_mask(field.band_limit, block)
    return SpectralField(np.where(mask, field.coeffs, 0))


@dataclass(frozen=True, eq=False)
class FourierTable:
    """Integer-indexed real table, e.g. the Hartree kernel V^(n).

    Entries listed in ``values`` (index -> value) are explicit; every other
    frequency takes ``default``. ``FourierTable.constant(1.0)`` is the kernel
    of a delta potential.
    """

    values: Mapping[int, float]
    default: float = 0.0

    def __post_init__(self):
        vals = {int(k): float(v) for k, v in dict(self.values).items()}
        for v in list(vals.values()) + [self.default]:
            if not np.isfinite(v):
                raise SpectralError("table entries must be finite")
        object.__setattr__(self, "values", vals)
        K = max((abs(k) for k in vals), default=0)
        lut = np.full(2 * K + 1, float(self.default))
        for k, v in vals.items():
            lut[k + K] = v
        object.__setattr__(self, "_K", K)
        object.__setattr__(self, "_lut", lut)

    @classmethod
    def constant(cls, value: float) -> "FourierTable":
        return cls({}, default=value)

    @classmethod
    def from_array(cls, arr, default: float = 0.0) -> "FourierTable":
        arr = np.asarray(arr, dtype=float)
        K = (arr.size - 1) // 2
        return cls({n: arr[n + K] for n in range(-K, K + 1)}, default=default)

    def __call__(self, n):
        n = np.asarray(n, dtype=np.int64)
        K = self._K
        inside = np.abs(n) <= K
        out = np.where(inside, self._lut[np.clip(n, -K, K) + K], self.default)
        return out if out.ndim else float(out)

    def is_even(self) -> bool:
        return all(self(-k) == v for k, v in self.values.items())

    def sup(self) -> float:
        return float(max([abs(v) for v in self.values.values()] + [abs(self.default)]))
