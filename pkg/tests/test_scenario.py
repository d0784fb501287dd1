"""Tests for scenario parsing, rendering and run records."""

import numpy as np
import pytest

from mkvlattice.scenario import (RunRecord, ScenarioConfig, ScenarioError,
                                 parse_scenario, render_record,
                                 render_scenario, render_series_csv,
                                 scenario_hash, write_records)

MINIMAL = """
[solver]
dt = 0.02
particles = 32

[experiment]
kind = contract
"""


class TestParsing:
    def test_minimal_with_defaults(self):
        sc = parse_scenario(MINIMAL)
        assert sc.dt == 0.02
        assert sc.particles == 32
        assert sc.kind == "contract"
        # untouched fields keep their defaults
        assert sc.half_width == 8
        assert sc.lam == 10.0
        assert sc.ic_b == "spike:1.0"

    def test_empty_text_is_all_defaults(self):
        assert parse_scenario("") == ScenarioConfig()

    def test_unknown_section_named(self):
        with pytest.raises(ScenarioError, match="telemetry"):
            parse_scenario("[telemetry]\nrate = 1\n")

    def test_unknown_key_named(self):
        with pytest.raises(ScenarioError, match="warp"):
            parse_scenario("[solver]\nwarp = 9\n")

    def test_bad_value_reported_with_location(self):
        with pytest.raises(ScenarioError, match=r"\[solver\] dt"):
            parse_scenario("[solver]\ndt = fast\n")

    def test_unknown_kind_rejected(self):
        with pytest.raises(ScenarioError):
            parse_scenario("[experiment]\nkind = teleport\n")

    def test_list_fields(self):
        sc = parse_scenario(
            "[experiment]\neps_list = 0.02,0.04\ntail_indices = 0,2,4\n")
        assert sc.eps_list == (0.02, 0.04)
        assert sc.tail_indices == (0, 2, 4)

    def test_bool_spellings(self):
        for raw, want in (("true", True), ("off", False), ("1", True)):
            sc = parse_scenario(f"[coefficients]\nautonomous = {raw}\n")
            assert sc.autonomous is want


class TestRoundTrip:
    def random_scenario(self, rng):
        return ScenarioConfig(
            dt=float(rng.choice([0.005, 0.01, 0.02])),
            half_width=int(rng.integers(2, 16)),
            particles=int(rng.integers(4, 256)),
            delay=float(rng.choice([0.1, 0.2, 0.4])),
            horizon=float(rng.uniform(1.0, 8.0)),
            seed=int(rng.integers(0, 1 << 31)),
            psi_bar=float(rng.uniform(0, 0.1)),
            chi_bar=float(rng.uniform(0, 0.1)),
            lam=float(rng.uniform(1.0, 30.0)),
            kind=str(rng.choice(["simulate", "contract", "mix", "tails"])),
            eps_list=tuple(float(x) for x in np.round(rng.uniform(0, 0.4, 3), 6)),
            tail_indices=tuple(int(x) for x in rng.integers(0, 9, 3)),
            autonomous=bool(rng.integers(0, 2)),
            ic_a=str(rng.choice(["zero", "spike:0.5", "gaussian:1.0:-1"])),
        )

    def test_parse_render_identity(self):
        rng = np.random.default_rng(131)
        for _ in range(50):
            sc = self.random_scenario(rng)
            assert parse_scenario(render_scenario(sc)) == sc

    def test_render_is_stable(self):
        sc = ScenarioConfig()
        assert render_scenario(sc) == render_scenario(sc)

    def test_hash_tracks_content(self):
        a = ScenarioConfig()
        b = ScenarioConfig(seed=1)
        assert scenario_hash(a) != scenario_hash(b)
        assert scenario_hash(a) == scenario_hash(ScenarioConfig())
        assert len(scenario_hash(a)) == 16


class TestScenarioHelpers:
    def test_solver_config_mapping(self):
        sc = ScenarioConfig(dt=0.02, half_width=4, particles=16, delay=0.1,
                            seed=7)
        cfg = sc.solver_config()
        assert cfg.dt == 0.02
        assert cfg.half_width == 4
        assert cfg.particle_count == 16
        assert cfg.seed == 7

    def test_benchmark_mapping(self):
        fam = ScenarioConfig(psi_bar=0.07, autonomous=True).benchmark()
        assert fam.psi_bar == 0.07
        assert fam.autonomous

    def test_initial_condition_helpers(self):
        sc = ScenarioConfig(ic_a="const:0.3:1", ic_b="spike:2.0")
        assert sc.initial_a().kind == "const"
        assert sc.initial_b().value == 2.0


class TestRecords:
    def make_record(self):
        return RunRecord(kind="contract", scenario="ab" * 8, seed=3,
                         scalars={"fit_rate": 1.5, "ok": True, "n": 7},
                         series={"t": [0.0, 0.5], "gap": [1.0, 0.25]},
                         wall_clock=123.4)

    def test_render_record_header_and_lines(self):
        text = render_record(self.make_record())
        lines = text.splitlines()
        assert lines[0] == "kind=contract scenario=abababababababab seed=3"
        assert "fit_rate=1.5" in lines
        assert "ok=true" in lines
        assert "n=7" in lines

    def test_wall_clock_never_serialized(self):
        rec = self.make_record()
        assert "123.4" not in render_record(rec)
        assert "wall_clock" not in render_record(rec)
        assert "123.4" not in render_series_csv(rec)

    def test_series_csv(self):
        csv = render_series_csv(self.make_record())
        lines = csv.splitlines()
        assert lines[0] == "t,gap"
        assert lines[1] == "0.0,1.0"
        assert lines[2] == "0.5,0.25"

    def test_empty_series_renders_nothing(self):
        rec = RunRecord(kind="certify", scenario="x" * 16, seed=0)
        assert render_series_csv(rec) == ""

    def test_write_records_files(self, tmp_path):
        base = str(tmp_path / "out")
        write_records(self.make_record(), base)
        record = (tmp_path / "out.record").read_text()
        csv = (tmp_path / "out.csv").read_text()
        assert record == render_record(self.make_record())
        assert csv == render_series_csv(self.make_record())

    def test_write_records_skips_empty_csv(self, tmp_path):
        base = str(tmp_path / "bare")
        write_records(RunRecord(kind="certify", scenario="y" * 16, seed=0),
                      base)
        assert (tmp_path / "bare.record").exists()
        assert not (tmp_path / "bare.csv").exists()
