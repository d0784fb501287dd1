"""Coefficient families for the delay lattice system and hypothesis probes.

A coefficient set packages the per-site drift f_i, diffusion sigma_i and
forcing g_i together with per-site envelope profiles (psi, chi, eta, Theta,
kappa) that the structural inequalities are stated against.  Laws enter
only through the scalar channel m = W2(mu, delta_0), the root second
moment of the site law.

All maps are vectorized: `sites` is an integer array of lattice indices
and u, v, m broadcast against it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass
class CoefficientSet:
    """Drift/diffusion/forcing maps plus the envelopes used by the probes."""

    drift: Callable  # (t, sites, u, v, m) -> array
    diffusion: Callable  # (t, sites, u, v, m) -> array
    forcing: Callable  # (t, sites) -> array
    psi_site: Callable  # sites -> array, delay/law Lipschitz envelope of f
    chi_site: Callable  # sites -> array, Lipschitz envelope of sigma
    eta_site: Callable  # sites -> array, dissipativity envelope
    theta_site: Callable  # sites -> array, upper bound on d f/d u
    kappa_site: Callable  # sites -> array, sigma at the origin
    phi_site: Callable  # sites -> array, f at the origin
    alpha: float  # superlinear damping strength in the dissipativity bound
    p: float  # damping exponent, >= 2
    time_dependent: bool = True

    def coefficient_norms(self, half_width: int) -> dict:
        """l2 norms of the envelope profiles over the truncation."""
        sites = np.arange(-half_width, half_width + 1)

        def nrm(profile):
            return float(np.sqrt(np.sum(profile(sites) ** 2)))

        return {
            "psi_inf": nrm(self.psi_site),
            "chi_inf": nrm(self.chi_site),
            "eta_inf": nrm(self.eta_site),
            "theta_inf": nrm(self.theta_site),
            "kappa_inf": nrm(self.kappa_site),
        }


def eval_drift(cs: CoefficientSet, i: int, t: float, u: float, v: float,
               m2root: float) -> float:
    if m2root < 0:
        raise ValueError("m2root must be non-negative")
    return float(cs.drift(t, np.asarray(i), u, v, m2root))


def eval_diffusion(cs: CoefficientSet, i: int, t: float, u: float, v: float,
                   m2root: float) -> float:
    if m2root < 0:
        raise ValueError("m2root must be non-negative")
    return float(cs.diffusion(t, np.asarray(i), u, v, m2root))


def eval_forcing(cs: CoefficientSet, i: int, t: float) -> float:
    return float(cs.forcing(t, np.asarray(i)))


@dataclass(frozen=True)
class BenchmarkFamily:
    """Concrete family with polynomial damping and l2 site weights.

    f_i = -alpha u |u|^{p-2} - beta u + psi_bar w_i (sin v + m)
    sigma_i = chi_bar w_i (u + sin v + m)/3 + kappa_bar w_i
    g_i(t) = g_bar_i (1 + sin t)      (constant g_bar_i when autonomous)

    with spatial weight w_i = (1+|i|)^{-q}, q > 1/2, and g_bar_i equal to
    g_amp on |i| <= g_support_radius, zero elsewhere.
    """

    alpha: float = 1.0
    beta: float = 0.0
    p: float = 4.0
    psi_bar: float = 0.05
    chi_bar: float = 0.05
    kappa_bar: float = 0.05
    g_amp: float = 0.5
    g_support_radius: int = 2
    decay_q: float = 1.0
    autonomous: bool = False

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.p < 2:
            raise ValueError("p must be >= 2")
        if self.decay_q <= 0.5:
            raise ValueError("decay_q must exceed 1/2 for square summability")
        for name in ("beta", "psi_bar", "chi_bar", "kappa_bar"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    def weight(self, sites) -> np.ndarray:
        return (1.0 + np.abs(np.asarray(sites, dtype=float))) ** (-self.decay_q)

    def g_profile(self, sites) -> np.ndarray:
        sites = np.asarray(sites)
        return np.where(np.abs(sites) <= self.g_support_radius, self.g_amp, 0.0)

    def to_coefficients(self) -> CoefficientSet:
        fam = self

        def drift(t, sites, u, v, m):
            w = fam.weight(sites)
            return (-fam.alpha * u * np.abs(u) ** (fam.p - 2.0)
                    - fam.beta * u
                    + fam.psi_bar * w * (np.sin(v) + m))

        def diffusion(t, sites, u, v, m):
            w = fam.weight(sites)
            return (fam.chi_bar * w * (u + np.sin(v) + m) / 3.0
                    + fam.kappa_bar * w)

        def forcing(t, sites):
            prof = fam.g_profile(sites)
            if fam.autonomous:
                return prof
            return prof * (1.0 + np.sin(t))

        # eta = 2 psi_bar w makes the dissipativity inequality hold by
        # Young's inequality, with a closed-form norm for the certificate.
        return CoefficientSet(
            drift=drift,
            diffusion=diffusion,
            forcing=forcing,
            psi_site=lambda s: fam.psi_bar * fam.weight(s),
            chi_site=lambda s: fam.chi_bar * fam.weight(s),
            eta_site=lambda s: 2.0 * fam.psi_bar * fam.weight(s),
            theta_site=lambda s: np.zeros_like(fam.weight(s)),
            kappa_site=lambda s: fam.kappa_bar * fam.weight(s),
            phi_site=lambda s: np.zeros_like(fam.weight(s)),
            alpha=fam.alpha,
            p=fam.p,
            time_dependent=not fam.autonomous,
        )


@dataclass(frozen=True)
class PerturbedFamily:
    """Small perturbation of a distribution-independent base family.

    The perturbed drift/diffusion deviate from the base by at most
    eps * rho_i(t) (|u| + |v| + m), resp. eps * tau_i(t) (|u| + |v| + m),
    by construction: the deviation is eps * weight * (u + sin v + m)/3.
    """

    base: CoefficientSet
    eps: float
    rho_site: Callable  # sites -> array, drift perturbation weight
    tau_site: Callable  # sites -> array, diffusion perturbation weight

    def __post_init__(self):
        if not 0.0 <= self.eps < 1.0:
            raise ValueError(f"eps must lie in [0, 1), got {self.eps}")

    def to_coefficients(self) -> CoefficientSet:
        fam = self
        base = self.base

        def drift(t, sites, u, v, m):
            dev = fam.rho_site(sites) * (u + np.sin(v) + m) / 3.0
            return base.drift(t, sites, u, v, m) + fam.eps * dev

        def diffusion(t, sites, u, v, m):
            dev = fam.tau_site(sites) * (u + np.sin(v) + m) / 3.0
            return base.diffusion(t, sites, u, v, m) + fam.eps * dev

        return CoefficientSet(
            drift=drift,
            diffusion=diffusion,
            forcing=base.forcing,
            psi_site=lambda s: base.psi_site(s) + fam.eps * fam.rho_site(s),
            chi_site=lambda s: base.chi_site(s) + fam.eps * fam.tau_site(s),
            eta_site=lambda s: base.eta_site(s) + fam.eps * fam.rho_site(s),
            theta_site=lambda s: base.theta_site(s) + fam.eps * fam.rho_site(s),
            kappa_site=base.kappa_site,
            phi_site=base.phi_site,
            alpha=base.alpha,
            p=base.p,
            time_dependent=base.time_dependent,
        )


def eval_perturbed(fam: PerturbedFamily, i: int, t: float, u: float, v: float,
                   m2root: float) -> tuple:
    cs = fam.to_coefficients()
    return (eval_drift(cs, i, t, u, v, m2root),
            eval_diffusion(cs, i, t, u, v, m2root))


@dataclass(frozen=True)
class ProbeResult:
    name: str
    samples: int
    violations: int
    worst_margin: float  # min over samples of (bound - quantity); < 0 is a violation
    witness: tuple  # (t, i, u, v, m) at the worst margin

    @property
    def passed(self) -> bool:
        return self.violations == 0


@dataclass(frozen=True)
class ProbeReport:
    results: tuple

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def result(self, name: str) -> ProbeResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)


def probe_hypotheses(cs: CoefficientSet, sample_count: int, domain_box: float,
                     seed: int, half_width: int = 8,
                     fd_step: float = 1e-5) -> ProbeReport:
    """Monte Carlo check of the structural inequalities on a coefficient set.

    Samples (t, i, u, v, m) uniformly with |u|,|v| <= domain_box and
    0 <= m <= domain_box, and evaluates each inequality with a small
    tolerance for rounding.  Deterministic given the seed.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    n = sample_count
    t = rng.uniform(-10.0, 10.0, n)
    sites = rng.integers(-half_width, half_width + 1, n)
    u = rng.uniform(-domain_box, domain_box, n)
    v = rng.uniform(-domain_box, domain_box, n)
    m = rng.uniform(0.0, domain_box, n)
    v2 = rng.uniform(-domain_box, domain_box, n)
    m2 = rng.uniform(0.0, domain_box, n)
    u2 = rng.uniform(-domain_box, domain_box, n)

    tol = 1e-9
    psi = cs.psi_site(sites)
    chi = cs.chi_site(sites)
    eta = cs.eta_site(sites)
    theta = cs.theta_site(sites)
    kappa = cs.kappa_site(sites)
    phi = cs.phi_site(sites)

    results = []

    def record(name, quantity, bound):
        margin = bound - quantity + tol
        worst = int(np.argmin(margin))
        results.append(ProbeResult(
            name=name,
            samples=n,
            violations=int(np.sum(margin < 0)),
            worst_margin=float(margin[worst]),
            witness=(float(t[worst]), int(sites[worst]), float(u[worst]),
                     float(v[worst]), float(m[worst])),
        ))

    f1 = cs.drift(t, sites, u, v, m)
    f2 = cs.drift(t, sites, u, v2, m2)
    record("drift_delay_law_lipschitz",
           np.abs(f1 - f2),
           psi * (np.abs(v - v2) + np.abs(m - m2)))

    record("drift_dissipativity",
           u * f1,
           -cs.alpha * np.abs(u) ** cs.p + eta * (1.0 + u**2 + v**2 + m**2))

    f_plus = cs.drift(t, sites, u + fd_step, v, m)
    f_minus = cs.drift(t, sites, u - fd_step, v, m)
    record("drift_state_derivative",
           (f_plus - f_minus) / (2.0 * fd_step),
           theta + 1e-4)  # finite-difference slack

    s1 = cs.diffusion(t, sites, u, v, m)
    s2 = cs.diffusion(t, sites, u2, v2, m2)
    record("diffusion_lipschitz",
           np.abs(s1 - s2),
           chi * (np.abs(u - u2) + np.abs(v - v2) + np.abs(m - m2)))

    record("diffusion_linear_growth",
           np.abs(s1),
           chi * (np.abs(u) + np.abs(v) + m) + kappa)

    # Derived linear growth of the drift.  The envelope is only local, so
    # the slope absorbs the polynomial damping over the sampled box.
    gamma = (np.maximum(np.maximum(psi, theta), np.abs(phi))
             + cs.alpha * (cs.p - 1.0) * domain_box ** (cs.p - 2.0)
             + 1e-6)
    record("drift_local_growth",
           np.abs(f1),
           gamma * (1.0 + np.abs(u) + np.abs(v) + m))

    return ProbeReport(tuple(results))
