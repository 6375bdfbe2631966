"""Smoothing multiplier theta, the operator D, and the quartic corrections Psi."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .spectral import FourierTable, SpectralField, dyadic_block


class MultiplierError(ValueError):
    pass


@dataclass(frozen=True)
class SmoothingParams:
    """Regularity ``s`` and frequency threshold ``threshold`` (N) of theta."""

    s: float
    threshold: float

    def __post_init__(self):
        if not self.s >= 1:
            raise MultiplierError(f"s must be >= 1, got {self.s}")
        if not self.threshold > 1:
            raise MultiplierError(f"threshold must be > 1, got {self.threshold}")


def theta(params: SmoothingParams, n):
    """(|n|/N)^s above the threshold, 1 below it."""
    a = np.abs(np.asarray(n, dtype=float))
    out = np.where(a >= params.threshold, (a / params.threshold) ** params.s, 1.0)
    return out if out.ndim else float(out)


def theta_squared_table(params: SmoothingParams, band_limit: int) -> np.ndarray:
    return theta(params, np.arange(-band_limit, band_limit + 1)) ** 2


def apply_D(params: SmoothingParams, field: SpectralField) -> SpectralField:
    return SpectralField(theta(params, field.frequencies) * field.coeffs)


def _check_gamma(tup: Sequence[int], r: int) -> tuple[int, ...]:
    t = tuple(int(x) for x in tup)
    if len(t) != r:
        raise MultiplierError(f"expected a {r}-tuple, got {tup!r}")
    if sum(t) != 0:
        raise MultiplierError(f"{tup!r} does not sum to zero")
    return t


def resonance_factor(quad: Sequence[int]) -> int:
    """n1^2 - n2^2 + n3^2 - n4^2 on Gamma_4, cross-checked against 2(n1+n2)(n1+n4)."""
    n1, n2, n3, n4 = _check_gamma(quad, 4)
    direct = n1 * n1 - n2 * n2 + n3 * n3 - n4 * n4
    factored = 2 * (n1 + n2) * (n1 + n4)
    if direct != factored:  # pragma: no cover - integer identity
        raise AssertionError(f"factorization identity broken at {quad}")
    return direct


def psi_values(params: SmoothingParams, V_hat: Callable | None, n1, n2, n3, n4) -> np.ndarray:
    """Vectorized raw Psi on Gamma_4 (no normalization constant).

    ``V_hat=None`` means V^ == 1, which gives Psi_2 of the potential equation.
    The resonant set is detected on the exact integer denominator.
    """
    n1, n2, n3, n4 = (np.asarray(a, dtype=np.int64) for a in (n1, n2, n3, n4))
    den = n1 * n1 - n2 * n2 + n3 * n3 - n4 * n4
    num = (theta(params, n1) ** 2 - theta(params, n2) ** 2
           + theta(params, n3) ** 2 - theta(params, n4) ** 2)
    if V_hat is not None:
        num = num * V_hat(n3 + n4)
    resonant = den == 0
    return np.where(resonant, 0.0, num / np.where(resonant, 1, den))


def psi_hartree(params: SmoothingParams, V_hat: Callable, quad: Sequence[int]) -> float:
    n = _check_gamma(quad, 4)
    return float(psi_values(params, V_hat, *n))


def psi_potential(params: SmoothingParams, quad: Sequence[int]) -> float:
    n = _check_gamma(quad, 4)
    return float(psi_values(params, None, *n))


def psi_majorant(params: SmoothingParams, n1, n2, n3, n4) -> np.ndarray:
    """theta(N1*) theta(N2*) N3* N4* / N1*^2 over the sorted dyadic blocks."""
    blocks = np.stack([dyadic_block(a) for a in (n1, n2, n3, n4)])
    blocks = -np.sort(-blocks, axis=0)
    b1, b2, b3, b4 = blocks.astype(float)
    return theta(params, b1) * theta(params, b2) * b3 * b4 / (b1 * b1)


@dataclass(frozen=True)
class BoundReport:
    sup_ratio: float
    witness: tuple[int, int, int, int] | None
    configs_checked: int
    band: int
    s: float
    threshold: float

    def to_dict(self) -> dict:
        return {
            "sup_ratio": self.sup_ratio,
            "witness": list(self.witness) if self.witness is not None else None,
            "configs_checked": self.configs_checked,
            "band": self.band,
            "s": self.s,
            "threshold": self.threshold,
        }


MAX_CERTIFY_CONFIGS = 200_000_000


def _certify_slab(params, V_hat, M, n1_values):
    n = np.arange(-M, M + 1, dtype=np.int64)
    n2, n3 = np.meshgrid(n, n, indexing="ij")
    best, witness, count = 0.0, None, 0
    for a in n1_values:
        n4 = -(a + n2 + n3)
        ok = np.abs(n4) <= M
        b2, b3, b4 = n2[ok], n3[ok], n4[ok]
        b1 = np.full_like(b2, a)
        count += b2.size
        ratio = np.abs(psi_values(params, V_hat, b1, b2, b3, b4)) / psi_majorant(params, b1, b2, b3, b4)
        j = int(np.argmax(ratio))
        # boolean-mask order is (n2, n3) row-major: first max is lexicographically smallest
        if ratio[j] > best:
            best = float(ratio[j])
            witness = (int(a), int(b2[j]), int(b3[j]), int(b4[j]))
    return best, witness, count


def certify_psi_bound(params: SmoothingParams, V_hat: Callable | None, band: int,
                      workers: int = 1, max_configs: int = MAX_CERTIFY_CONFIGS) -> BoundReport:
    """Brute-force sup of |Psi| / majorant over Gamma_4 with |n_j| <= band."""
    M = int(band)
    if M < params.threshold:
        raise MultiplierError(f"band {M} below threshold {params.threshold}")
    if V_hat is not None and isinstance(V_hat, FourierTable):
        if V_hat.sup() > abs(V_hat(0)) or V_hat(0) < 0:
            raise MultiplierError("V^ must satisfy |V^(n)| <= V^(0)")
    cost = (2 * M + 1) ** 3
    if cost > max_configs:
        raise MultiplierError(
            f"band {M} needs ~{cost:.3g} evaluations (O(M^3)); budget is {max_configs:.3g}"
        )
    n1_all = list(range(-M, M + 1))
    chunks = [n1_all[i::max(workers, 1)] for i in range(max(workers, 1))]
    chunks = [sorted(c) for c in chunks if c]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda c: _certify_slab(params, V_hat, M, c), chunks))
    else:
        parts = [_certify_slab(params, V_hat, M, chunks[0])]
    best, witness, total = 0.0, None, 0
    for ratio, wit, count in parts:
        total += count
        if wit is None:
            continue
        if ratio > best or (ratio == best and (witness is None or wit < witness)):
            best, witness = ratio, wit
    return BoundReport(best, witness, total, M, params.s, params.threshold)


NONRESONANT = "nonresonant"
RESONANT_ZERO = "resonant-zero-numerator"
RESONANT_NONZERO = "resonant-nonzero-numerator"


@dataclass(frozen=True)
class ResonanceProbe:
    tuple: tuple[int, ...]
    denominator: int
    numerator: float
    classification: str

    def to_dict(self) -> dict:
        return {
            "tuple": list(self.tuple),
            "denominator": self.denominator,
            "numerator": self.numerator,
            "classification": self.classification,
        }


def probe_gamma6(base: Sequence[int], scale: int, s: float, atol: float = 1e-9) -> ResonanceProbe:
    """Evaluate the sextic resonance function at ``scale * base`` with threshold 1.

    The tuple carries its signs already (u, u-bar, u, ... slots on Gamma_6), so
    the admissibility condition is an ordinary zero sum while the dispersive
    denominator alternates: n1^2 - n2^2 + n3^2 - n4^2 + n5^2 - n6^2.
    """
    base = _check_gamma(base, 6)
    if int(scale) < 1:
        raise MultiplierError("scale must be a positive integer")
    tup = tuple(int(scale) * b for b in base)
    signs = (1, -1, 1, -1, 1, -1)
    den = sum(sg * n * n for sg, n in zip(signs, tup))
    # threshold 1: theta(n) = |n|^s for n != 0 and theta(0) = 1
    th2 = [float(abs(n)) ** (2 * s) if n else 1.0 for n in tup]
    num = math.fsum(sg * t for sg, t in zip(signs, th2))
    if den != 0:
        cls = NONRESONANT
    elif abs(num) <= atol * max(1.0, max(th2)):
        cls = RESONANT_ZERO
    else:
        cls = RESONANT_NONZERO
    return ResonanceProbe(tup, den, num, cls)
