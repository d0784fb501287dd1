"""Simulator and certification toolkit for distribution-dependent
stochastic delay lattice systems on a truncated integer lattice."""

from .certify import (Certificate, NormBounds, build_certificate,
                      bounds_from_coefficients, check_lambda,
                      check_lambda_add, contraction_constant,
                      lipschitz_constants, max_epsilon_with_add,
                      max_feasible_epsilon)
from .coefficients import (BenchmarkFamily, CoefficientSet, PerturbedFamily,
                           ProbeReport, eval_diffusion, eval_drift,
                           eval_forcing, eval_perturbed, probe_hypotheses)
from .lattice import (DimensionError, LatticeVector, SegmentBuffer, apply_A,
                      apply_B, apply_Bstar, inner, l2_norm, lp_norm,
                      segment_sup_norm, tail_mass)
from .measures import (EmpiricalLaw1D, SiteLawFamily, law_of_ensemble, rho,
                       w2_1d, w2_to_delta0)
from .scenario import (RunRecord, ScenarioConfig, parse_scenario,
                       render_scenario, write_records)
from .solver import (CoupledPair, DivergenceError, InitialCondition,
                     ParticleEnsemble, SolverConfig, couple_run,
                     fourth_moment_segment, init_ensemble, picard_solve,
                     run_until, second_moment_segment, step)

__version__ = "0.1.0"
