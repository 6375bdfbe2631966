import copy
import json
from pathlib import Path

import numpy as np
import pytest

from nlsgrowth.harness.checks import CHECKS, REGISTRY, CheckContext, constants
from nlsgrowth.harness.cli import main
from nlsgrowth.harness.config import ConfigError, parse_config, parse_suite
from nlsgrowth.harness.fit import FitError, fit_growth
from nlsgrowth.harness.simulate import csv_header, read_series, run, write_outputs
from nlsgrowth.harness.verify import verify_claims
from nlsgrowth.energy import calibrate_constants
from nlsgrowth.dynamics import Hartree
from nlsgrowth.multiplier import SmoothingParams
from nlsgrowth.spectral import FourierTable

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def load(name):
    return json.loads((CONFIGS / name).read_text())


class TestConfig:
    def test_example_configs_parse(self):
        for path in CONFIGS.glob("*_*.json"):
            if not path.name.startswith("suite"):
                parse_config(json.loads(path.read_text()))

    def test_missing_field_is_named(self):
        doc = load("cubic_random.json")
        del doc["dt"]
        with pytest.raises(ConfigError) as info:
            parse_config(doc)
        assert "dt" in str(info.value)

    def test_bad_value_names_path(self):
        doc = load("cubic_random.json")
        doc["smoothing"]["threshold"] = 0.5
        with pytest.raises(ConfigError) as info:
            parse_config(doc)
        assert info.value.field == "smoothing.threshold"

    def test_kernel_must_be_bounded_by_zero_mode(self):
        doc = load("hartree_plane_wave.json")
        doc["equation"]["V_hat"]["values"]["1"] = 2.0
        with pytest.raises(ConfigError) as info:
            parse_config(doc)
        assert info.value.field == "equation.V_hat"

    def test_lambda_must_fit_band(self):
        doc = load("potential_random.json")
        doc["equation"]["lambda"]["coefficients"]["20"] = 0.1
        with pytest.raises(ConfigError) as info:
            parse_config(doc)
        assert info.value.field == "equation.lambda"

    def test_lambda_negative_modes_are_conjugates(self):
        cfg = parse_config(load("potential_random.json"))
        lam = cfg.equation.lam
        assert lam.coeff(-2) == np.conj(lam.coeff(2))
        assert lam.coeff(2) == 0.1j

    def test_even_kernel_is_mirrored(self):
        cfg = parse_config(load("hartree_plane_wave.json"))
        assert cfg.equation.V_hat(-2) == 0.2

    def test_unknown_key_rejected(self):
        doc = load("cubic_random.json")
        doc["colour"] = "blue"
        with pytest.raises(ConfigError):
            parse_config(doc)

    def test_suite_parse(self):
        s = parse_suite(load("suite_mutation.json"))
        assert s.mutation == "flip_psi_numerator"
        with pytest.raises(ConfigError):
            parse_suite({"schema_version": 1, "workers": 0})


class TestSimulate:
    def test_header_order(self):
        cfg = parse_config(load("cubic_random.json"))
        assert csv_header(cfg) == ["t", "mass", "energy", "h1", "hs_1", "hs_2", "e1", "e2",
                                   "lp_1", "lp_2", "lp_4", "lp_8", "lp_16", "lp_32", "lp_64"]

    def test_hartree_plane_wave_norms_constant(self, tmp_path):
        cfg = parse_config(load("hartree_plane_wave.json"))
        res = write_outputs(cfg, run(cfg), tmp_path)
        for col in ("hs_1", "hs_2", "hs_3", "mass"):
            _, v = read_series(res.csv_path, col)
            assert np.max(np.abs(v - v[0])) / v[0] < 1e-10
        _, e1 = read_series(res.csv_path, "e1")
        _, e2 = read_series(res.csv_path, "e2")
        assert np.array_equal(e1, e2)

    def test_cubic_mass_constant(self, tmp_path):
        cfg = parse_config(load("cubic_random.json"))
        res = write_outputs(cfg, run(cfg), tmp_path)
        _, m = read_series(res.csv_path, "mass")
        assert np.max(np.abs(m - m[0])) / m[0] < 1e-8

    def test_lp_spectrum_sums_to_mass(self):
        cfg = parse_config(load("potential_random.json"))
        for rec in run(cfg).records:
            assert sum(rec.lp_spectrum.values()) == pytest.approx(rec.mass, rel=1e-13)

    def test_quintic_has_no_e2(self, tmp_path):
        doc = load("quintic_random.json")
        doc["T"] = 0.5
        cfg = parse_config(doc)
        res = write_outputs(cfg, run(cfg), tmp_path)
        assert res.manifest["derived_constants"] is None
        with open(res.csv_path) as fh:
            fh.readline()
            row = fh.readline().rstrip("\n").split(",")
        assert row[csv_header(cfg).index("e2")] == ""

    def test_csv_byte_identical(self, tmp_path):
        cfg = parse_config(load("potential_random.json"))
        a = write_outputs(cfg, run(cfg), tmp_path / "a")
        b = write_outputs(cfg, run(cfg), tmp_path / "b")
        assert a.csv_path.read_bytes() == b.csv_path.read_bytes()
        assert a.manifest_path.read_bytes() == b.manifest_path.read_bytes()

    def test_manifest_constants_match_independent_calibration(self):
        cfg = parse_config(load("potential_random.json"))
        c = run(cfg).manifest["derived_constants"]["c_psi"]
        fresh = calibrate_constants(SmoothingParams(1.5, 2.0), Hartree(FourierTable.constant(1.0)),
                                    band_limit=24, seeds=(11, 12, 13))
        assert abs(c - fresh.c_psi) < 1e-6

    def test_abort_flushes_partial_output(self, tmp_path, monkeypatch):
        fake_abort(monkeypatch)
        cfg = parse_config(load("cubic_random.json"))
        res = write_outputs(cfg, run(cfg), tmp_path)
        assert res.aborted and res.manifest["aborted"]
        assert res.manifest["abort_t"] == pytest.approx(0.3)
        assert len(res.records) == 2
        assert res.csv_path.read_text().count("\n") == 3

    def test_overflow_is_an_abort(self, tmp_path):
        doc = load("quintic_random.json")
        doc["equation"]["k"] = 3
        doc["initial_data"] = {"family": "two_mode", "n": 0, "m": 1, "amplitude": 1e80}
        cfg = parse_config(doc)
        res = run(cfg)
        assert res.aborted and res.records == []


def fake_abort(monkeypatch):
    """Make the integrator fail at t = 0.3 after recording two states."""
    from nlsgrowth.dynamics import NumericalAbort
    from nlsgrowth.harness import simulate

    real = simulate.evolve

    def evolve(eq, initial, cfg, T, record_every):
        traj = real(eq, initial, cfg, 0.2, 100)
        raise NumericalAbort(0.3, traj[:2])

    monkeypatch.setattr(simulate, "evolve", evolve)


class TestFit:
    def test_exact_power(self):
        t = np.linspace(0, 20, 40)
        f = fit_growth(t, (1 + t) ** 0.5)
        assert f.alpha == pytest.approx(0.5, abs=1e-10)
        assert f.C == pytest.approx(1.0, abs=1e-10)
        assert f.residual < 1e-12

    def test_constant(self):
        t = np.linspace(0, 5, 10)
        assert fit_growth(t, np.full(10, 3.0)).alpha == pytest.approx(0.0, abs=1e-12)

    def test_noisy(self):
        rng = np.random.default_rng(0)
        t = np.linspace(0, 50, 200)
        v = (1 + t) * (1 + 0.01 * rng.standard_normal(t.size))
        assert 0.9 <= fit_growth(t, v).alpha <= 1.1

    def test_scale_invariance(self):
        t = np.linspace(0, 10, 30)
        v = 2.0 * (1 + t) ** 1.7
        a, b = fit_growth(t, v), fit_growth(t, 1e5 * v)
        assert abs(a.alpha - b.alpha) < 1e-12
        assert b.C == pytest.approx(1e5 * a.C)

    def test_window_and_refusal(self):
        t = np.arange(20.0)
        f = fit_growth(t, 1 + t, (5, 15))
        assert f.points == 11 and f.window == (5.0, 15.0)
        with pytest.raises(FitError):
            fit_growth(t, 1 + t, (0, 3))
        with pytest.raises(FitError):
            fit_growth(t, -(1 + t))

    def test_deterministic(self):
        t = np.linspace(0, 9, 12)
        v = np.exp(np.sin(t))
        assert fit_growth(t, v) == fit_growth(t, v)


class TestVerify:
    def test_registry(self):
        hard = {c.name for c in REGISTRY if c.hard}
        assert {"psi_bound", "equivalence_scaling", "derivative_identities", "plane_wave", "gauge",
                "resonance_probe", "calibration"} <= hard
        assert {c.name for c in REGISTRY if not c.hard} == {"increment_monitoring", "growth_monitoring"}

    def test_quick_suite_passes(self):
        rep = verify_claims(parse_suite({"schema_version": 1,
                                         "checks": ["resonance_probe", "plane_wave", "gauge"]}))
        assert rep["passed"]
        assert [c["name"] for c in rep["checks"]] == ["plane_wave", "gauge", "resonance_probe"]
        probe = rep["checks"][-1]["details"]
        assert probe["tuple"] == [12, -4, 10, -6, 2, -14]
        assert probe["classification"] == "resonant-nonzero-numerator"

    def test_mutation_is_caught(self):
        rep = verify_claims(parse_suite(load("suite_mutation.json")))
        assert not rep["passed"]
        assert not any(c["passed"] for c in rep["checks"])

    def test_unmutated_calibration_and_derivatives_pass(self):
        doc = copy.deepcopy(load("suite_mutation.json"))
        doc["mutation"] = None
        assert verify_claims(parse_suite(doc))["passed"]

    def test_mutation_flips_constant_only(self):
        a, _ = constants(CheckContext())
        b, _ = constants(CheckContext(mutation="flip_psi_numerator"))
        assert b.c_psi == -a.c_psi

    def test_crash_recorded_as_failure(self, monkeypatch):
        def boom(ctx):
            raise RuntimeError("deliberate")

        from nlsgrowth.harness import checks as mod
        broken = mod.Check("gauge", boom)
        monkeypatch.setitem(CHECKS, "gauge", broken)
        rep = verify_claims(parse_suite({"schema_version": 1, "checks": ["gauge", "resonance_probe"]}))
        gauge = rep["checks"][0]
        assert not gauge["passed"] and "deliberate" in gauge["error"]
        assert rep["checks"][1]["passed"]

    def test_worker_pool_same_order(self):
        doc = {"schema_version": 1, "checks": ["resonance_probe", "plane_wave", "gauge"], "workers": 2}
        rep = verify_claims(parse_suite(doc))
        assert [c["name"] for c in rep["checks"]] == ["plane_wave", "gauge", "resonance_probe"]
        assert rep["passed"]

    def test_unknown_check(self):
        with pytest.raises(ConfigError):
            verify_claims(parse_suite({"schema_version": 1, "checks": ["nope"]}))


class TestCLI:
    def test_probe(self, capsys):
        assert main(["probe-resonance", "--base", "6,-2,5,-3,1,-7", "--scale", "2", "--s", "2"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["denominator"] == 0 and out["numerator"] == -9216.0

    def test_certify(self, capsys):
        assert main(["certify-bound", "--s", "1", "--threshold", "4", "--band", "8"]) == 0
        assert json.loads(capsys.readouterr().out)["band"] == 8

    def test_certify_bad_band(self, capsys):
        assert main(["certify-bound", "--s", "1", "--threshold", "16", "--band", "8"]) == 1

    def test_usage_error(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["simulate"])
        assert info.value.code == 1

    def test_simulate_and_fit(self, tmp_path, capsys):
        assert main(["simulate", "--config", str(CONFIGS / "cubic_random.json"), "--out", str(tmp_path)]) == 0
        assert (tmp_path / "series.csv").exists() and (tmp_path / "manifest.json").exists()
        capsys.readouterr()
        assert main(["fit", "--input", str(tmp_path / "series.csv"), "--column", "hs_2",
                     "--t-min", "0", "--t-max", "2"]) == 0
        fit = json.loads(capsys.readouterr().out)
        assert abs(fit["alpha"]) < 1

    def test_fit_missing_column(self, tmp_path):
        main(["simulate", "--config", str(CONFIGS / "cubic_random.json"), "--out", str(tmp_path)])
        assert main(["fit", "--input", str(tmp_path / "series.csv"), "--column", "nope",
                     "--t-min", "0", "--t-max", "2"]) == 1

    def test_bad_config_exit_code(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"schema_version": 1}')
        assert main(["simulate", "--config", str(bad), "--out", str(tmp_path)]) == 1

    def test_abort_exit_code(self, tmp_path, monkeypatch):
        fake_abort(monkeypatch)
        assert main(["simulate", "--config", str(CONFIGS / "cubic_random.json"), "--out", str(tmp_path)]) == 3
        assert json.loads((tmp_path / "manifest.json").read_text())["aborted"]

    def test_verify_exit_codes(self, tmp_path):
        assert main(["verify", "--suite", str(CONFIGS / "suite_mutation.json"), "--out", str(tmp_path)]) == 2
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["mutation"] == "flip_psi_numerator"
        ok = tmp_path / "ok.json"
        ok.write_text('{"schema_version": 1, "checks": ["resonance_probe"]}')
        assert main(["verify", "--suite", str(ok), "--out", str(tmp_path)]) == 0
