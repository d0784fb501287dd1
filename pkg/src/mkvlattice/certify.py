"""Explicit feasibility conditions, rate constants and the certificate.

Everything here is closed-form arithmetic in the coefficient norm bounds:
the dissipativity threshold in epsilon, the Lipschitz-propagation
constants of the law map, and the contraction constant that governs the
coupled decay and the mixing rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import math

# Keep the certified epsilon strictly inside (0, 1).
_EPS_CAP = 1.0 - 1e-9


@dataclass(frozen=True)
class NormBounds:
    """Coefficient norm bounds plus the system parameters they certify."""

    eta_inf: float
    chi_inf: float
    kappa_inf: float
    psi_inf: float
    theta_inf: float
    lam: float
    nu: float = 0.0
    r: float = 1.0
    alpha: float = 1.0
    p: float = 2.0
    c1: float = 2.0  # martingale (BDG) constant; conservative default

    def __post_init__(self):
        for name in ("eta_inf", "chi_inf", "kappa_inf", "psi_inf",
                     "theta_inf", "alpha", "c1", "nu"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.lam <= 0:
            raise ValueError("lam must be positive")
        if self.r <= 0:
            raise ValueError("r must be positive")
        if self.p < 2:
            raise ValueError("p must be >= 2")


@dataclass(frozen=True)
class Certificate:
    feasible: bool
    eps_star: float
    c1_tilde: float
    c2_tilde: float
    c3_tilde: float
    mixing_rate: float
    lambda_ok: bool
    lambda_add_ok: bool

    def as_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "eps_star": self.eps_star,
            "c1_tilde": self.c1_tilde,
            "c2_tilde": self.c2_tilde,
            "c3_tilde": self.c3_tilde,
            "mixing_rate": self.mixing_rate,
            "lambda_ok": self.lambda_ok,
            "lambda_add_ok": self.lambda_add_ok,
        }


def _threshold(b: NormBounds, eps: float) -> float:
    """Right-hand side of the epsilon-dependent dissipativity condition."""
    bump = 5.0 + math.exp(2.0 * eps * b.r)
    martingale = 3.0 + 8.0 * b.c1**2
    return (8.0 * b.eta_inf * bump
            + (24.0 * b.chi_inf**2 * bump + 16.0 * b.kappa_inf**2) * martingale)


def check_lambda(b: NormBounds, eps: float) -> bool:
    """Whether lambda - 4 eps clears the dissipativity threshold."""
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    return b.lam - 4.0 * eps > _threshold(b, eps)


def max_feasible_epsilon(b: NormBounds, tol: float = 1e-9) -> float | None:
    """Largest eps in (0, 1) passing check_lambda, or None if infeasible.

    The threshold plus 4 eps is strictly increasing in eps, so the
    feasible set is an interval anchored at 0 and bisection applies.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    # Feasibility at the eps -> 0 limit, where the bump factor is 6.
    limit = (48.0 * b.eta_inf
             + (144.0 * b.chi_inf**2 + 16.0 * b.kappa_inf**2)
             * (3.0 + 8.0 * b.c1**2))
    if b.lam <= limit:
        return None
    if check_lambda(b, _EPS_CAP):
        return _EPS_CAP
    lo, hi = tol, _EPS_CAP
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if check_lambda(b, mid):
            lo = mid
        else:
            hi = mid
    return lo


def check_lambda_add(b: NormBounds) -> bool:
    """The extra lambda condition behind the singleton/mixing results."""
    return b.lam > (2.0 * b.theta_inf + 5.0 * b.psi_inf
                    + 9.0 * b.chi_inf**2 * (1.0 + 4.0 * b.c1**2))


def max_epsilon_with_add(b: NormBounds, tol: float = 1e-9) -> float | None:
    """Joint eps: the dissipativity bisection capped by the mixing-side
    condition 2 lam - eps > 4 Theta + 10 psi + 18 chi^2 (1 + 4 c1^2)."""
    eps = max_feasible_epsilon(b, tol)
    if eps is None or not check_lambda_add(b):
        return None
    eps_add = 2.0 * b.lam - (4.0 * b.theta_inf + 10.0 * b.psi_inf
                             + 18.0 * b.chi_inf**2 * (1.0 + 4.0 * b.c1**2))
    if eps_add <= 0:
        return None
    return min(eps, eps_add, _EPS_CAP)


def lipschitz_constants(b: NormBounds) -> tuple:
    """Constants (c1~, c2~) of the law-propagation Lipschitz bound."""
    c1t = (3.0 + 8.0 * b.r * b.psi_inf**2
           + 6.0 * b.r * b.chi_inf**2 * (1.0 + 2.0 * b.c1**2))
    c2t = (4.0 * b.theta_inf + 18.0 * b.psi_inf
           + 18.0 * b.chi_inf**2 * (1.0 + 2.0 * b.c1**2))
    return c1t, c2t


def contraction_constant(b: NormBounds, eps: float) -> float:
    """Prefactor of the coupled exponential decay."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    boost = math.exp(eps * b.r) / eps
    return 4.0 * (1.0 + 2.0 * boost * b.psi_inf**2
                  + 3.0 * boost * b.chi_inf**2 * (1.0 + 4.0 * b.c1**2))


def build_certificate(b: NormBounds, tol: float = 1e-9) -> Certificate:
    eps_plain = max_feasible_epsilon(b, tol)
    lambda_ok = eps_plain is not None
    lambda_add_ok = check_lambda_add(b)
    eps_joint = max_epsilon_with_add(b, tol) if lambda_ok else None
    feasible = eps_joint is not None
    c1t, c2t = lipschitz_constants(b)
    if feasible:
        eps_star = eps_joint
        c3t = contraction_constant(b, eps_star)
        mixing = 0.5 * eps_star
    else:
        eps_star = float("nan")
        c3t = float("nan")
        mixing = float("nan")
    return Certificate(
        feasible=feasible,
        eps_star=eps_star,
        c1_tilde=c1t,
        c2_tilde=c2t,
        c3_tilde=c3t,
        mixing_rate=mixing,
        lambda_ok=lambda_ok,
        lambda_add_ok=lambda_add_ok,
    )


def bounds_from_coefficients(coeffs, half_width: int, lam: float, nu: float,
                             r: float, c1: float = 2.0) -> NormBounds:
    """Assemble NormBounds from a coefficient set over a given truncation."""
    norms = coeffs.coefficient_norms(half_width)
    return NormBounds(
        eta_inf=norms["eta_inf"],
        chi_inf=norms["chi_inf"],
        kappa_inf=norms["kappa_inf"],
        psi_inf=norms["psi_inf"],
        theta_inf=norms["theta_inf"],
        lam=lam,
        nu=nu,
        r=r,
        alpha=coeffs.alpha,
        p=coeffs.p,
        c1=c1,
    )
