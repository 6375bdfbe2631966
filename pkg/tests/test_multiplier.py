import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlsgrowth.data import random_field
from nlsgrowth.multiplier import (
    MultiplierError,
    SmoothingParams,
    apply_D,
    certify_psi_bound,
    probe_gamma6,
    psi_hartree,
    psi_majorant,
    psi_potential,
    psi_values,
    resonance_factor,
    theta,
)
from nlsgrowth.spectral import FourierTable, lp_blocks, lp_project

P4 = SmoothingParams(1.0, 4.0)


class TestParams:
    def test_s_below_one(self):
        with pytest.raises(MultiplierError):
            SmoothingParams(0.5, 4)

    def test_threshold_at_most_one(self):
        with pytest.raises(MultiplierError):
            SmoothingParams(1, 1)


def test_theta_examples():
    p = SmoothingParams(2.0, 4.0)
    assert theta(p, 0) == 1.0
    assert theta(p, 3) == 1.0
    assert theta(p, 4) == 1.0
    assert theta(p, 8) == 4.0
    assert theta(p, -8) == 4.0


def test_resonance_factor():
    assert resonance_factor((3, -1, 2, -4)) == 2 * (3 - 1) * (3 - 4)
    with pytest.raises(MultiplierError):
        resonance_factor((1, 1, 1, 1))


def test_psi_zero_on_resonant_set():
    # n1 = -n2 makes the denominator vanish
    assert psi_potential(P4, (5, -5, 2, -2)) == 0.0


def test_psi_potential_value():
    # 6^2 - 2^2 + 0 - 4^2 = 16; theta^2: 2.25 - 1 + 1 - 1 = 1.25
    assert psi_potential(P4, (6, -2, 0, -4)) == pytest.approx(0.078125, abs=1e-15)


def test_psi_hartree_with_unit_kernel_matches_potential():
    one = FourierTable.constant(1.0)
    for quad in [(6, -2, 0, -4), (9, -3, 1, -7), (12, 5, -8, -9)]:
        assert psi_hartree(P4, one, quad) == psi_potential(P4, quad)


def test_psi_rejects_off_hyperplane():
    with pytest.raises(MultiplierError):
        psi_potential(P4, (1, 2, 3, 4))


def test_psi_symmetry_pair_swap():
    rng = np.random.default_rng(0)
    V = FourierTable({0: 1.0, 1: 0.5, -1: 0.5, 2: 0.25, -2: 0.25})
    for _ in range(200):
        n1, n2, n3 = rng.integers(-30, 31, size=3)
        n4 = -(n1 + n2 + n3)
        a = psi_values(P4, V, n1, n2, n3, n4)
        b = psi_values(P4, V, n3, n4, n1, n2)
        assert a == pytest.approx(b, abs=1e-14)


def test_majorant_example():
    # blocks 8, 4, 2, 1 -> theta(8) theta(4) * 2 * 1 / 64
    assert psi_majorant(P4, 8, -4, -3, -1) == pytest.approx(2 * 1 * 2 / 64)


def test_certify_small_band():
    rep = certify_psi_bound(SmoothingParams(1.0, 4.0), None, 8)
    assert math.isfinite(rep.sup_ratio) and rep.sup_ratio > 0
    assert rep.configs_checked > 0
    assert sum(rep.witness) == 0


def test_certify_is_worker_independent():
    a = certify_psi_bound(SmoothingParams(1.5, 4.0), None, 12, workers=1)
    b = certify_psi_bound(SmoothingParams(1.5, 4.0), None, 12, workers=3)
    assert a == b


def test_certify_refuses_band_below_threshold():
    with pytest.raises(MultiplierError):
        certify_psi_bound(SmoothingParams(1.0, 16.0), None, 8)


def test_certify_refuses_oversize():
    with pytest.raises(MultiplierError):
        certify_psi_bound(P4, None, 64, max_configs=1000)


def test_resonance_probe_scale_one():
    r = probe_gamma6((6, -2, 5, -3, 1, -7), 1, 2.0)
    assert r.denominator == 0
    assert r.classification == "resonant-nonzero-numerator"
    # numerator is homogeneous of degree 2s in the scale
    assert probe_gamma6((6, -2, 5, -3, 1, -7), 2, 2.0).numerator == pytest.approx(16 * r.numerator)


def test_resonance_probe_zero_numerator():
    r = probe_gamma6((1, -1, 2, -2, 3, -3), 1, 2.0)
    assert r.denominator == 0
    assert r.classification == "resonant-zero-numerator"


def test_resonance_probe_rejects_bad_tuple():
    with pytest.raises(MultiplierError):
        probe_gamma6((1, 1, 1, 1, 1, 1), 1, 2.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(1, 4), st.floats(1.5, 32), st.integers(-300, 300))
def test_theta_even_and_monotone(s, N, n):
    p = SmoothingParams(s, N)
    assert theta(p, n) == theta(p, -n)
    assert theta(p, abs(n) + 1) >= theta(p, n)
    assert theta(p, n) >= 1.0


@settings(max_examples=50, deadline=None)
@given(st.floats(1, 3), st.sampled_from([2.0, 4.0, 8.0, 16.0]), st.integers(1, 256), st.integers(1, 256))
def test_leibniz_type_bound(s, N, n, m):
    # theta(n + m) <= 2^s max(theta(n), theta(m)) for positive frequencies
    p = SmoothingParams(s, N)
    assert theta(p, n + m) <= 2 ** s * max(theta(p, n), theta(p, m)) * (1 + 1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(4, 40), st.integers(0, 2**31 - 1))
def test_D_commutes_with_lp(M, seed):
    f = random_field(M, seed=seed)
    for N in lp_blocks(M):
        assert np.array_equal(apply_D(P4, lp_project(f, N)).coeffs, lp_project(apply_D(P4, f), N).coeffs)
