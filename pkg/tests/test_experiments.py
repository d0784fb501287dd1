"""Tests for the experiment runners, fits and the CLI wrapper."""

import numpy as np
import pytest

from mkvlattice.certify import build_certificate, bounds_from_coefficients
from mkvlattice.cli import main
from mkvlattice.experiments import (fit_exponential_rate, fit_loglog_slope,
                                    run_absorption, run_contraction,
                                    run_certify, run_eps_sweep,
                                    run_experiment, run_mixing,
                                    run_picard_check, run_tails)
from mkvlattice.scenario import (ScenarioConfig, render_record,
                                 render_scenario, render_series_csv,
                                 scenario_hash)


def fast_scenario(**kw):
    """Small lattice and short horizon so each runner stays sub-second."""
    defaults = dict(dt=0.01, half_width=4, particles=32, delay=0.1,
                    horizon=1.5, record_every=0.05, fit_start=0.25,
                    fit_end=1.25, seed=2)
    defaults.update(kw)
    return ScenarioConfig(**defaults)


class TestFitters:
    def test_exponential_exact(self):
        t = np.linspace(0, 3, 61)
        y = 5.0 * np.exp(-2.0 * t)
        fit = fit_exponential_rate(t, y, 0.5, 2.5)
        assert fit["rate"] == pytest.approx(2.0, abs=1e-9)
        assert fit["intercept"] == pytest.approx(np.log(5.0), abs=1e-9)
        assert fit["residual"] == pytest.approx(0.0, abs=1e-9)

    def test_exponential_window_respected(self):
        t = np.linspace(0, 4, 81)
        y = np.exp(-t)
        y[t > 2.0] = 7.0  # garbage outside the fit window
        fit = fit_exponential_rate(t, y, 0.0, 2.0)
        assert fit["rate"] == pytest.approx(1.0, abs=1e-9)

    def test_exponential_underdetermined(self):
        fit = fit_exponential_rate([0.0], [1.0], 0.0, 1.0)
        assert np.isnan(fit["rate"])
        assert fit["points"] <= 1

    def test_exponential_ignores_zeros(self):
        t = np.linspace(0, 1, 11)
        y = np.exp(-3.0 * t)
        y[5] = 0.0
        fit = fit_exponential_rate(t, y, 0.0, 1.0)
        assert fit["rate"] == pytest.approx(3.0, abs=1e-9)
        assert fit["points"] == 10

    def test_loglog_exact_power(self):
        x = np.array([0.02, 0.04, 0.08, 0.16])
        y = 0.7 * x**2
        fit = fit_loglog_slope(x, y)
        assert fit["slope"] == pytest.approx(2.0, abs=1e-9)

    def test_loglog_linear(self):
        x = np.linspace(0.1, 1.0, 10)
        fit = fit_loglog_slope(x, 3.0 * x)
        assert fit["slope"] == pytest.approx(1.0, abs=1e-9)


class TestContraction:
    def test_record_structure_and_rate(self):
        sc = fast_scenario(kind="contract")
        rec = run_contraction(sc)
        assert rec.kind == "contract"
        assert rec.scenario == scenario_hash(sc)
        assert set(rec.series) == {"t", "coupled_gap"}
        assert rec.scalars["cert_feasible"] is True
        # gap decays and the fitted rate clears the certified one
        assert rec.series["coupled_gap"][-1] < rec.series["coupled_gap"][0]
        assert rec.scalars["fit_rate"] > 0
        assert rec.scalars["rate_at_least_0.8_eps_star"]

    def test_wall_clock_populated_in_memory(self):
        rec = run_contraction(fast_scenario(kind="contract"))
        assert rec.wall_clock > 0
        assert "wall_clock" not in render_record(rec)


class TestMixing:
    def test_identical_initial_states_stay_glued(self):
        sc = fast_scenario(kind="mix", autonomous=True, ic_a="const:0.3:1",
                           ic_b="const:0.3:1")
        rec = run_mixing(sc)
        assert np.all(rec.series["coupling_rms"] == 0.0)
        assert np.all(rec.series["rho"] == 0.0)
        assert rec.scalars["rho_below_rms_everywhere"]

    def test_distinct_states_contract(self):
        sc = fast_scenario(kind="mix", autonomous=True)
        rec = run_mixing(sc)
        rms = rec.series["coupling_rms"]
        assert rms[-1] < rms[0]
        assert rec.scalars["rho_below_rms_everywhere"]
        assert rec.scalars["rms_rate_at_least_0.4_eps_star"]

    def test_time_dependent_rejected(self):
        with pytest.raises(ValueError):
            run_mixing(fast_scenario(kind="mix", autonomous=False))


class TestEpsSweep:
    def test_zero_eps_exact_and_monotone(self):
        sc = fast_scenario(kind="sweep-eps", horizon=1.0,
                           eps_list=(0.0, 0.05, 0.1, 0.2, 0.4))
        rec = run_eps_sweep(sc)
        assert rec.scalars["mse_at_zero"] == 0.0
        assert rec.scalars["monotone_in_eps"]
        assert rec.scalars["fit_slope"] >= 0.9

    def test_eps_out_of_range(self):
        with pytest.raises(ValueError):
            run_eps_sweep(fast_scenario(kind="sweep-eps", eps_list=(0.0, 1.0)))


class TestAbsorption:
    def test_moments_converge_to_common_band(self):
        sc = fast_scenario(kind="absorb", horizon=2.0, particles=64,
                           ic_a="zero", ic_b="spike:1.0")
        rec = run_absorption(sc)
        assert rec.scalars["absorbed"]
        assert rec.scalars["absorption_time"] <= sc.horizon
        assert rec.scalars["band_lo"] <= rec.scalars["band_hi"]
        assert len(rec.series["t"]) == len(rec.series["m4_small"])


class TestTails:
    def test_fractions_monotone(self):
        sc = fast_scenario(kind="tails", half_width=8, horizon=1.0,
                           tail_indices=(0, 2, 4, 8))
        rec = run_tails(sc)
        assert rec.scalars["monotone_in_n"]
        assert rec.scalars["tail_fraction_0"] == pytest.approx(1.0)
        assert rec.scalars["tail_fraction_8"] < rec.scalars["tail_fraction_2"]

    def test_zero_cutoff_always_included(self):
        sc = fast_scenario(kind="tails", horizon=0.5, tail_indices=(2, 4))
        rec = run_tails(sc)
        assert 0.0 in rec.series["t"]


class TestCertifyRunner:
    def test_matches_direct_certificate(self):
        sc = fast_scenario(kind="certify")
        rec = run_certify(sc)
        bounds = bounds_from_coefficients(
            sc.benchmark().to_coefficients(), sc.half_width, sc.lam, sc.nu,
            sc.delay, sc.bdg_c1)
        cert = build_certificate(bounds)
        assert rec.scalars["cert_eps_star"] == pytest.approx(
            cert.eps_star, abs=1e-9)
        assert rec.scalars["eta_inf"] == bounds.eta_inf
        assert rec.series == {}


class TestPicardRunner:
    def test_fixed_point_exact(self):
        sc = fast_scenario(kind="picard-check", horizon=0.5, particles=8)
        rec = run_picard_check(sc)
        assert rec.scalars["max_abs_diff"] == 0.0
        assert rec.scalars["steps"] == 50


class TestDeterminism:
    def test_rendered_outputs_identical_across_reruns(self):
        sc = fast_scenario(kind="contract")
        a = run_experiment(sc)
        b = run_experiment(sc)
        assert render_record(a) == render_record(b)
        assert render_series_csv(a) == render_series_csv(b)

    def test_seed_changes_output(self):
        a = run_experiment(fast_scenario(kind="simulate", seed=1))
        b = run_experiment(fast_scenario(kind="simulate", seed=2))
        assert render_series_csv(a) != render_series_csv(b)


class TestCli:
    def write_scenario(self, tmp_path, sc):
        path = tmp_path / "scenario.ini"
        path.write_text(render_scenario(sc))
        return str(path)

    def test_certify_end_to_end(self, tmp_path, capsys):
        path = self.write_scenario(tmp_path, fast_scenario())
        stem = str(tmp_path / "out")
        code = main(["certify", "--scenario", path, "--out", stem])
        assert code == 0
        record = (tmp_path / "out.record").read_text()
        assert record.startswith("kind=certify ")
        assert "cert_eps_star=" in record
        assert record in capsys.readouterr().out

    def test_seed_override(self, tmp_path, capsys):
        path = self.write_scenario(tmp_path, fast_scenario(seed=5))
        main(["certify", "--scenario", path, "--seed", "99"])
        assert "seed=99" in capsys.readouterr().out

    def test_defaults_without_scenario_file(self, capsys):
        assert main(["certify"]) == 0
        assert "cert_feasible=true" in capsys.readouterr().out

    def test_bad_scenario_reports_error(self, tmp_path, capsys):
        path = tmp_path / "bad.ini"
        path.write_text("[solver]\ndt = sideways\n")
        assert main(["certify", "--scenario", str(path)]) == 1
        assert "error:" in capsys.readouterr().err
