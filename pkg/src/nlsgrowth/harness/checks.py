"""Registered verification checks.

Each check takes a ``CheckContext`` and returns ``(passed, details)``. Hard
checks decide the suite's exit status; soft checks only report.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable

import numpy as np

from ..data import random_field, two_mode
from ..dynamics import (
    Hartree,
    InhomogeneousCubic,
    PotentialCubic,
    PowerNLS,
    StepperConfig,
    energy,
    evolve,
    gauge_transform,
    hartree_plane_wave,
    mass,
    nonlinear_term,
)
from ..energy import (
    CALIBRATION_TOL,
    DerivedConstants,
    calibrate_constants,
    constant_multiplier,
    d_e1_inhomogeneous,
    d_e1_inhomogeneous_naive,
    d_e1_power_naive,
    d_e1_quintic,
    d_e2_hartree,
    d_e2_hartree_naive,
    d_e2_potential,
    d_e2_potential_naive,
    e1,
    e2_hartree,
    e2_potential,
    equivalence_ratio,
    first_contribution_multiplier,
    flow_derivative,
    lambda4,
    lambda4_naive,
    lambda6_naive,
    psi_multiplier,
    sextic_insertion,
    shifted_m6,
)
from ..multiplier import SmoothingParams, certify_psi_bound, probe_gamma6
from ..spectral import FourierTable, SpectralField, sobolev_norm
from .fit import fit_growth

MUTATIONS = (None, "flip_psi_numerator")

REFERENCE_PARAMS = SmoothingParams(1.0, 2.0)
DEFAULT_V_HAT = FourierTable({0: 1.0, 1: 0.6, -1: 0.6, 2: 0.2, -2: 0.2}, default=0.0)
DEFAULT_LAMBDA = SpectralField.from_modes(2, {0: 1.0, 1: 0.3, -1: 0.3, 2: 0.1j, -2: -0.1j})

DEFAULT_MONITORING = {
    "T": 50.0,
    "dt": 1e-3,
    "band_limit": 32,
    "delta": 0.1,
    "thresholds": [4.0, 8.0, 16.0],
    "epsilons": [0.05, 0.1, 0.2],
}


@dataclass(frozen=True)
class CheckContext:
    mutation: str | None = None
    monitoring: dict = field(default_factory=lambda: dict(DEFAULT_MONITORING))


@lru_cache(maxsize=None)
def _fresh_constants() -> tuple[DerivedConstants, DerivedConstants]:
    hartree = calibrate_constants(REFERENCE_PARAMS, Hartree(FourierTable.constant(1.0)))
    quintic = calibrate_constants(REFERENCE_PARAMS, PowerNLS(2))
    return hartree, quintic


def constants(ctx: CheckContext) -> tuple[DerivedConstants, DerivedConstants]:
    """Calibrated constants; the mutation hook flips the sign of the Psi numerator."""
    hartree, quintic = _fresh_constants()
    if ctx.mutation == "flip_psi_numerator":
        hartree = replace(hartree, c_psi=-hartree.c_psi)
    return hartree, quintic


def _l2(a: SpectralField, b: SpectralField) -> float:
    return float(np.sqrt(2 * np.pi * np.sum(np.abs(a.coeffs - b.coeffs) ** 2)))


def _relerr(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


# ---------------------------------------------------------------- regressions

def check_plane_wave(ctx: CheckContext):
    M, dt, T, n, alpha = 64, 1e-3, 5.0, 3, 0.8 + 0.3j
    eq = Hartree(DEFAULT_V_HAT)
    u0 = SpectralField.from_modes(M, {n: alpha})
    t0 = time.perf_counter()
    traj = evolve(eq, u0, StepperConfig.for_equation(eq, dt), T, record_every=100)
    runtime = time.perf_counter() - t0
    err = max(_l2(u, hartree_plane_wave(alpha, n, DEFAULT_V_HAT(0), t).resized(M)) for t, u in traj)
    hs_dev = 0.0
    for s in (0.0, 1.0, 2.0, 3.0):
        norms = np.array([sobolev_norm(u, s) for _, u in traj])
        hs_dev = max(hs_dev, float(np.max(np.abs(norms - norms[0])) / norms[0]))
    details = {"max_l2_error": err, "max_hs_deviation": hs_dev, "records": len(traj),
               "runtime_s": runtime}
    return err < 1e-10 and hs_dev < 1e-10, details


def check_gauge(ctx: CheckContext):
    M, dt, T, lam0 = 64, 1e-3, 5.0, 2.0
    u0 = random_field(M, seed=0, h1_size=0.5, support=M // 4)
    pot = PotentialCubic(SpectralField.from_modes(0, {0: lam0}))
    cub = PowerNLS(1)
    t0 = time.perf_counter()
    a = evolve(pot, u0, StepperConfig.for_equation(pot, dt), T, record_every=100)
    b = evolve(cub, u0, StepperConfig.for_equation(cub, dt), T, record_every=100)
    runtime = time.perf_counter() - t0
    disc = max(_l2(ua, gauge_transform(ub, lam0, t)) for (t, ua), (_, ub) in zip(a, b))
    return disc < 1e-10, {"max_l2_discrepancy": disc, "runtime_s": runtime}


def conservation_equations() -> dict:
    return {
        "cubic": PowerNLS(1),
        "hartree": Hartree(DEFAULT_V_HAT),
        "potential": PotentialCubic(DEFAULT_LAMBDA),
        "inhomogeneous": InhomogeneousCubic(DEFAULT_LAMBDA),
    }


def conservation_data(M: int = 128) -> SpectralField:
    """Random-family member with modes |n| <= M/8, so that dt n^2 stays below 1/4 at dt = 1e-3."""
    return random_field(M, seed=0, h1_size=0.5, support=M // 8)


def drift(eq, u0, dt, T, stride) -> tuple[float, float]:
    traj = evolve(eq, u0, StepperConfig.for_equation(eq, dt), T, stride)
    m = np.array([mass(u) for _, u in traj])
    e = np.array([energy(eq, u) for _, u in traj])
    return float(np.max(np.abs(m - m[0])) / m[0]), float(np.max(np.abs(e - e[0])) / abs(e[0]))


def check_conservation(ctx: CheckContext):
    M, T, dt = 128, 10.0, 1e-3
    u0 = conservation_data(M)
    out, ok = {}, True
    t0 = time.perf_counter()
    for name, eq in conservation_equations().items():
        m1, e1_ = drift(eq, u0, dt, T, 100)
        _, e2_ = drift(eq, u0, dt / 2, T, 200)
        ratio = e1_ / e2_
        out[name] = {"mass_drift": m1, "energy_drift": e1_, "energy_drift_half_dt": e2_,
                     "drift_ratio": ratio}
        out[name]["passed"] = bool(m1 < 1e-8 and e1_ < 1e-6 and 3.0 <= ratio <= 5.0)
        ok &= out[name]["passed"]
    out["runtime_s"] = time.perf_counter() - t0
    return ok, out


def strang_errors(eq, u0, T, dts) -> list[float]:
    finals = [evolve(eq, u0, StepperConfig.for_equation(eq, dt), T, 10**9)[-1][1] for dt in dts]
    return [_l2(a, b) for a, b in zip(finals, finals[1:])]


def check_strang_order(ctx: CheckContext):
    eq = PowerNLS(2)
    u0 = two_mode(64, 1, 2, 0.5)
    dts = [0.02, 0.01, 0.005, 0.0025]
    errs = strang_errors(eq, u0, 1.0, dts)
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    return all(abs(p - 2.0) <= 0.2 for p in orders), {"dts": dts, "errors": errs, "orders": orders}


# ------------------------------------------------------------ multiplier side

PSI_BOUND_GRID = [(s, N) for s in (1.0, 1.5, 2.0) for N in (4.0, 8.0, 16.0)]


def check_psi_bound(ctx: CheckContext):
    rows, ok = [], True
    for s, N in PSI_BOUND_GRID:
        params = SmoothingParams(s, N)
        r32 = certify_psi_bound(params, None, 32)
        r64 = certify_psi_bound(params, None, 64)
        q = r64.sup_ratio / r32.sup_ratio
        good = bool(math.isfinite(r32.sup_ratio) and math.isfinite(r64.sup_ratio) and 0.8 <= q <= 1.25)
        ok &= good
        rows.append({"s": s, "threshold": N, "sup_32": r32.sup_ratio, "sup_64": r64.sup_ratio,
                     "ratio": q, "witness_64": list(r64.witness), "passed": good})
    return ok, {"grid": rows}


def check_resonance_probe(ctx: CheckContext):
    probe = probe_gamma6((6, -2, 5, -3, 1, -7), 2, 2.0)
    ok = (probe.denominator == 0 and abs(probe.numerator + 9216) < 1e-9
          and probe.classification == "resonant-nonzero-numerator")
    return ok, probe.to_dict()


EQUIVALENCE_THRESHOLDS = [8, 16, 32, 64, 128]
EQUIVALENCE_BAND = 160


def equivalence_scan(consts: DerivedConstants, s: float = 1.0, seed: int = 0,
                     band: int = EQUIVALENCE_BAND, h1_size: float = 1.0) -> dict:
    u = random_field(band, seed=seed, h1_size=h1_size)
    ratios = [equivalence_ratio(SmoothingParams(s, N), u, consts) for N in EQUIVALENCE_THRESHOLDS]
    slope = float(np.polyfit(np.log(EQUIVALENCE_THRESHOLDS), np.log(ratios), 1)[0])
    return {"s": s, "seed": seed, "band": band, "h1_size": h1_size,
            "thresholds": EQUIVALENCE_THRESHOLDS, "ratios": ratios, "slope": slope}


def check_equivalence_scaling(ctx: CheckContext):
    hartree, _ = constants(ctx)
    scan = equivalence_scan(hartree)
    ok = -1.3 <= scan["slope"] <= -0.7 and scan["ratios"][-1] < 0.5
    return ok, scan


# ------------------------------------------------------------- energy side

def check_calibration(ctx: CheckContext):
    in_use, in_use_q = constants(ctx)
    details, ok = {}, True
    for name, eq, attr, used in (
        ("c_psi", Hartree(FourierTable.constant(1.0)), "c_psi", in_use.c_psi),
        ("c_quintic", PowerNLS(2), "c_quintic", in_use_q.c_quintic),
    ):
        fits = {}
        for band in (16, 32):
            for seeds in ((0, 1, 2, 3, 4), (5, 6, 7, 8, 9)):
                c = getattr(calibrate_constants(REFERENCE_PARAMS, eq, band_limit=band, seeds=seeds), attr)
                fits[f"M{band}_seeds{seeds[0]}"] = c
        vals = np.array(list(fits.values()))
        spread = float(np.max(vals) - np.min(vals))
        mismatch = abs(used - vals[0])
        good = bool(spread < 1e-6 and mismatch < 1e-6)
        ok &= good
        details[name] = {"fits": fits, "spread": spread, "in_use": used,
                         "mismatch": mismatch, "passed": good}
    details["tolerance"] = CALIBRATION_TOL
    return ok, details


def derivative_cases(ctx: CheckContext):
    """(name, evaluator, functional, equation, naive reference) for the four identities."""
    cH, cQ = constants(ctx)
    V, lam = DEFAULT_V_HAT, DEFAULT_LAMBDA

    def cases(params):
        return [
            ("d_e2_hartree", lambda u: d_e2_hartree(params, V, u, cH),
             lambda u: e2_hartree(params, V, u, cH), Hartree(V),
             lambda u: d_e2_hartree_naive(params, V, u, cH)),
            ("d_e1_quintic", lambda u: d_e1_quintic(params, u, 2, cQ),
             lambda u: e1(params, u), PowerNLS(2),
             lambda u: d_e1_power_naive(params, u, cQ)),
            ("d_e2_potential", lambda u: d_e2_potential(params, lam, u, cH),
             lambda u: e2_potential(params, u, cH), PotentialCubic(lam),
             lambda u: d_e2_potential_naive(params, lam, u, cH)),
            ("d_e1_inhomogeneous", lambda u: d_e1_inhomogeneous(params, lam, u, cH),
             lambda u: e1(params, u), InhomogeneousCubic(lam),
             lambda u: d_e1_inhomogeneous_naive(params, lam, u, cH)),
        ]

    return cases


FD_PARAMS = SmoothingParams(1.0, 4.0)
NAIVE_PARAMS = SmoothingParams(1.0, 2.0)


def check_derivative_identities(ctx: CheckContext):
    cases = derivative_cases(ctx)
    fd_fields = [random_field(32, seed=s, h1_size=2.0) for s in range(5)]
    naive_fields = [random_field(4, seed=s, h1_size=2.0) for s in range(3)]
    details, ok = {}, True
    naive_cases = {c[0]: c for c in cases(NAIVE_PARAMS)}
    for name, fast, functional, eq, _ in cases(FD_PARAMS):
        fd_err = [_relerr(fast(u), flow_derivative(functional, eq, u)) for u in fd_fields]
        _, fast_n, _, _, naive = naive_cases[name]
        bf_err = [_relerr(fast_n(u), naive(u)) for u in naive_fields]
        good = bool(max(fd_err) < 1e-3 and max(bf_err) < 1e-9)
        ok &= good
        details[name] = {"fd_rel_errors": fd_err, "brute_force_rel_errors": bf_err, "passed": good}
    return ok, details


def check_lambda_evaluators(ctx: CheckContext):
    cH, _ = constants(ctx)
    worst4, worst6 = 0.0, 0.0
    for j in range(20):
        M4 = (4, 8, 12, 16)[j % 4]
        u = random_field(M4, seed=100 + j, h1_size=1.0)
        m = (constant_multiplier(1.0), psi_multiplier(NAIVE_PARAMS, None, cH.c_psi),
             first_contribution_multiplier(NAIVE_PARAMS, DEFAULT_V_HAT))[j % 3]
        worst4 = max(worst4, abs(lambda4(m, u) - lambda4_naive(m, u)) / abs(lambda4_naive(m, u)))
        M6 = 3 + j % 4
        v = random_field(M6, seed=200 + j, h1_size=1.0)
        m4 = psi_multiplier(NAIVE_PARAMS, DEFAULT_V_HAT, cH.c_psi)
        w = nonlinear_term(Hartree(DEFAULT_V_HAT), v).coeffs
        fast = sextic_insertion(m4, v, w)
        naive = -1j * lambda6_naive(shifted_m6(m4, DEFAULT_V_HAT, M6), v)
        worst6 = max(worst6, abs(fast - naive) / abs(naive))
    return worst4 < 1e-10 and worst6 < 1e-10, {"lambda4_max_rel": worst4, "lambda6_max_rel": worst6}


# ------------------------------------------------------------- monitoring

def _monitor_run(eq, mon: dict, s: float, e2_consts: DerivedConstants | None):
    M, dt, T, delta = mon["band_limit"], mon["dt"], mon["T"], mon["delta"]
    stride = max(1, int(round(delta / dt)))
    u0 = random_field(M, seed=0, h1_size=1.0, support=M // 4)
    traj = evolve(eq, u0, StepperConfig.for_equation(eq, dt), T, stride)
    t = np.array([tt for tt, _ in traj])
    h2 = np.array([sobolev_norm(u, 2.0) for _, u in traj])
    series = {}
    for N in mon["thresholds"]:
        p = SmoothingParams(s, N)
        if e2_consts is None:
            series[N] = np.array([e1(p, u) for _, u in traj])
        else:
            series[N] = np.array([e2_hartree(p, eq.V_hat, u, e2_consts) for _, u in traj])
    return t, h2, series


def _increment_report(series: dict, power: float) -> dict:
    rows = []
    for N, E in series.items():
        inc = np.abs(np.diff(E)) / np.abs(E[:-1])
        peak = float(np.max(inc))
        rows.append({"threshold": N, "max_increment": peak, "constant": peak / N ** (-power)})
    Ns = np.array([r["threshold"] for r in rows])
    peaks = np.array([r["max_increment"] for r in rows])
    slope = float(np.polyfit(np.log(Ns), np.log(peaks), 1)[0]) if np.all(peaks > 0) else None
    return {"form": f"N^-{power:g}", "rows": rows, "fitted_N_slope": slope}


def check_increment_monitoring(ctx: CheckContext):
    mon = {**DEFAULT_MONITORING, **ctx.monitoring}
    cH, _ = constants(ctx)
    _, _, q = _monitor_run(PowerNLS(2), mon, 2.0, None)
    _, _, h = _monitor_run(Hartree(DEFAULT_V_HAT), mon, 2.0, cH)
    return True, {"delta": mon["delta"], "quintic_e1": _increment_report(q, 0.5),
                  "hartree_e2": _increment_report(h, 2.0)}


def check_growth_monitoring(ctx: CheckContext):
    mon = {**DEFAULT_MONITORING, **ctx.monitoring}
    out = {}
    for name, eq, base in (("quintic", PowerNLS(2), 4.0), ("hartree", Hartree(DEFAULT_V_HAT), 1.0)):
        t, h2, _ = _monitor_run(eq, {**mon, "thresholds": []}, 2.0, None)
        fit = fit_growth(t, h2, (0.0, mon["T"]))
        out[name] = {
            "fit": fit.to_dict(),
            "bound_exponent": base,
            "within_bound": {f"{eps:g}": fit.alpha <= base + eps for eps in mon["epsilons"]},
        }
    return True, out


@dataclass(frozen=True)
class Check:
    name: str
    run: Callable
    hard: bool = True


REGISTRY = [
    Check("plane_wave", check_plane_wave),
    Check("gauge", check_gauge),
    Check("conservation", check_conservation),
    Check("strang_order", check_strang_order),
    Check("derivative_identities", check_derivative_identities),
    Check("calibration", check_calibration),
    Check("psi_bound", check_psi_bound),
    Check("equivalence_scaling", check_equivalence_scaling),
    Check("resonance_probe", check_resonance_probe),
    Check("lambda_evaluators", check_lambda_evaluators),
    Check("increment_monitoring", check_increment_monitoring, hard=False),
    Check("growth_monitoring", check_growth_monitoring, hard=False),
]

CHECKS = {c.name: c for c in REGISTRY}
