"""Tests for empirical laws, W2 and the site-family metric."""

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from mkvlattice.lattice import DimensionError
from mkvlattice.measures import (EmpiricalLaw1D, SiteLawFamily,
                                 law_of_ensemble, rho, w2_1d, w2_to_delta0)
from mkvlattice.solver import InitialCondition, SolverConfig, init_ensemble


def assignment_w2(a, b):
    """Optimal-transport oracle: exact assignment on the cost matrix."""
    cost = (a[:, None] - b[None, :]) ** 2
    rows, cols = linear_sum_assignment(cost)
    return np.sqrt(cost[rows, cols].mean())


class TestW2:
    def test_point_masses(self):
        assert w2_1d(EmpiricalLaw1D([0, 0]), EmpiricalLaw1D([1, 1])) == 1.0

    def test_monotone_shift(self):
        assert w2_1d(EmpiricalLaw1D([0, 2]), EmpiricalLaw1D([1, 3])) == 1.0

    def test_against_assignment_oracle(self):
        rng = np.random.default_rng(41)
        for _ in range(200):
            a = rng.normal(size=8)
            b = rng.normal(size=8) + rng.normal()
            got = w2_1d(EmpiricalLaw1D(a), EmpiricalLaw1D(b))
            want = assignment_w2(np.sort(a), np.sort(b))
            assert got == pytest.approx(want, rel=1e-12, abs=1e-14)

    def test_unequal_counts_rejected(self):
        with pytest.raises(DimensionError):
            w2_1d(EmpiricalLaw1D([0.0]), EmpiricalLaw1D([0.0, 1.0]))

    def test_symmetry_and_identity(self):
        rng = np.random.default_rng(43)
        a = EmpiricalLaw1D(rng.normal(size=16))
        b = EmpiricalLaw1D(rng.normal(size=16))
        assert w2_1d(a, b) == w2_1d(b, a)
        assert w2_1d(a, a) == 0.0


class TestW2ToDelta0:
    def test_symmetric_pair(self):
        assert w2_to_delta0(EmpiricalLaw1D([1.0, -1.0])) == 1.0

    def test_zeros(self):
        assert w2_to_delta0(EmpiricalLaw1D([0.0, 0.0, 0.0])) == 0.0

    def test_equals_distance_to_zero_law(self):
        rng = np.random.default_rng(47)
        samples = rng.normal(size=32)
        a = EmpiricalLaw1D(samples)
        zero = EmpiricalLaw1D(np.zeros(32))
        assert w2_to_delta0(a) == w2_1d(a, zero)


def random_family(rng, half_width, n):
    mat = rng.normal(size=(2 * half_width + 1, n))
    return SiteLawFamily.from_matrix(mat, half_width)


class TestRho:
    def test_identity(self):
        rng = np.random.default_rng(53)
        fam = random_family(rng, 4, 8)
        assert rho(fam, fam) == 0.0

    def test_single_site_unit_shift(self):
        half_width = 3
        base = np.zeros((7, 4))
        shifted = base.copy()
        shifted[3] += 1.0  # site 0
        a = SiteLawFamily.from_matrix(base, half_width)
        b = SiteLawFamily.from_matrix(shifted, half_width)
        assert rho(a, b) == pytest.approx(1.0)

    def test_triangle_inequality(self):
        rng = np.random.default_rng(59)
        for _ in range(100):
            a = random_family(rng, 8, 16)
            b = random_family(rng, 8, 16)
            c = random_family(rng, 8, 16)
            assert rho(a, c) <= rho(a, b) + rho(b, c) + 1e-12

    def test_symmetry(self):
        rng = np.random.default_rng(61)
        a = random_family(rng, 5, 8)
        b = random_family(rng, 5, 8)
        assert rho(a, b) == rho(b, a)

    def test_shape_mismatch(self):
        rng = np.random.default_rng(67)
        with pytest.raises(DimensionError):
            rho(random_family(rng, 3, 8), random_family(rng, 4, 8))
        with pytest.raises(DimensionError):
            rho(random_family(rng, 3, 8), random_family(rng, 3, 9))


class TestLawOfEnsemble:
    def make_ensemble(self, frames):
        k1, n, s = frames.shape
        half_width = (s - 1) // 2
        cfg = SolverConfig(dt=0.1, half_width=half_width, particle_count=n,
                           delay=0.1 * (k1 - 1), seed=0)
        from mkvlattice.solver import ParticleEnsemble
        return ParticleEnsemble(cfg, frames)

    def test_identical_particles_give_point_masses(self):
        frames = np.ones((3, 5, 7)) * 1.25
        fam = law_of_ensemble(self.make_ensemble(frames))
        for i in range(-3, 4):
            assert np.all(fam.law_at(i).samples == 1.25)

    def test_two_particle_site_law(self):
        frames = np.zeros((2, 2, 5))
        frames[-1, 0, 2] = 1.0
        frames[-1, 1, 2] = 3.0
        fam = law_of_ensemble(self.make_ensemble(frames))
        assert np.array_equal(fam.law_at(0).samples, [1.0, 3.0])
        assert w2_to_delta0(fam.law_at(0)) == pytest.approx(np.sqrt(5.0))

    def test_offset_out_of_range(self):
        frames = np.zeros((3, 2, 5))
        ens = self.make_ensemble(frames)
        with pytest.raises(ValueError):
            law_of_ensemble(ens, at=-1.0)

    def test_coupling_bound(self):
        # rho(law A, law B)^2 <= mean over particles of ||A_k - B_k||^2
        rng = np.random.default_rng(71)
        for _ in range(20):
            fa = rng.normal(size=(2, 16, 9))
            fb = rng.normal(size=(2, 16, 9))
            ea, eb = self.make_ensemble(fa), self.make_ensemble(fb)
            lhs = rho(law_of_ensemble(ea), law_of_ensemble(eb)) ** 2
            rhs = np.mean(np.sum((fa[-1] - fb[-1]) ** 2, axis=1))
            assert lhs <= rhs + 1e-12

    def test_gaussian_sampling_matches_law(self):
        cfg = SolverConfig(dt=0.1, half_width=2, particle_count=64,
                           delay=0.2, seed=5)
        ens = init_ensemble(cfg, InitialCondition.from_spec("gaussian:0.7:-1"))
        fam = law_of_ensemble(ens)
        assert fam.sample_count == 64
        assert fam.half_width == 2
