"""Analytic gradient of the win probability with respect to every matchup
mean, plus a central-difference verifier.

Only the team's own moments are differentiated: the opponent-variance and
gap terms treat the opponent field as independent of the team's choices, so
they are constants here, and the finite-difference check against evaluate()
is exact in structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from . import stats
from .objective import (
    SIGMA2_T_FLOOR,
    LeagueShape,
    ObjectiveBreakdown,
    _check_dims,
    _helper_tables,
    _phi_tables,
    evaluate,
    differential_and_v,
    gap_moments,
    opponent_variance,
)

__all__ = [
    "DegenerateStateError",
    "GradientCheckReport",
    "analytic_gradient",
    "value_and_gradient",
    "fd_gradient",
    "gradient_check",
]


class DegenerateStateError(ValueError):
    """The differential variance is zero; the objective has no gradient."""


def value_and_gradient(mu, shape: LeagueShape) -> Tuple[ObjectiveBreakdown, np.ndarray]:
    """Objective breakdown and its gradient in one pass over shared tables."""
    mu = np.asarray(mu, dtype=float)
    _check_dims(mu, shape)

    cdf, pdf = _phi_tables(mu)
    f, _, h = _helper_tables(pdf)

    mu_T = float(cdf.sum(axis=1).sum())
    bern = float((cdf * (1.0 - cdf)).sum(axis=1).sum())
    cov = 0.5 * float((shape.rho * h).sum())
    raw_sigma2_T = bern + cov
    sigma2_T = max(raw_sigma2_T, SIGMA2_T_FLOOR)

    e_sigma2_M = opponent_variance(shape)
    mu_L, sigma2_L = gap_moments(e_sigma2_M, shape)
    mu_D, sigma2_D, v = differential_and_v(mu_T, sigma2_T, mu_L, sigma2_L, shape)
    if sigma2_D <= 0.0:
        raise DegenerateStateError("differential variance is zero; gradient undefined")

    o = shape.num_opponents
    ratio = (o + 1) / o

    # d(mu_D)/d(mu[c,o]): the win probability of one matchup moves by the
    # density there, scaled by the own-total factor.
    d_mu_d = ratio * pdf

    # d(sigma2_T)/d(mu[c,o]): Bernoulli part phi*(1-2*Phi); covariance part
    # collects every rho-weighted term that touches category c at opponent o.
    s = -(shape.rho @ (pdf + f[:, None]))
    d_sigma2_t = mu * pdf * (s + 2.0 * pdf) + pdf * (1.0 - 2.0 * cdf)
    if raw_sigma2_T < SIGMA2_T_FLOOR:
        d_sigma2_t = np.zeros_like(d_sigma2_t)  # the floor is flat

    sigma_d = math.sqrt(sigma2_D)
    z_pdf = stats.norm_pdf(mu_D / sigma_d)
    grad = z_pdf / sigma_d**3 * (sigma2_D * d_mu_d - 0.5 * mu_D * ratio * d_sigma2_t)

    breakdown = ObjectiveBreakdown(
        mu_T=mu_T,
        sigma2_T=sigma2_T,
        e_sigma2_M=e_sigma2_M,
        mu_L=mu_L,
        sigma2_L=sigma2_L,
        mu_D=mu_D,
        sigma2_D=sigma2_D,
        v=v,
    )
    return breakdown, grad


def analytic_gradient(mu, shape: LeagueShape) -> np.ndarray:
    """d(win probability)/d(mu[c, o]) for every matchup mean."""
    _, grad = value_and_gradient(mu, shape)
    return grad


def fd_gradient(mu, shape: LeagueShape, h: float = 1e-4) -> np.ndarray:
    """Central-difference gradient of evaluate(...).v, entry by entry."""
    if h <= 0.0:
        raise ValueError(f"step must be > 0, got {h}")
    mu = np.asarray(mu, dtype=float)
    _check_dims(mu, shape)
    grad = np.zeros_like(mu)
    for c in range(mu.shape[0]):
        for o in range(mu.shape[1]):
            bumped = mu.copy()
            bumped[c, o] = mu[c, o] + h
            up = evaluate(bumped, shape).v
            bumped[c, o] = mu[c, o] - h
            down = evaluate(bumped, shape).v
            grad[c, o] = (up - down) / (2.0 * h)
    return grad


@dataclass(frozen=True)
class GradientCheckReport:
    max_rel_error: float
    worst_entry: Tuple[int, int]
    passed: bool
    tol: float
    h: float

    def as_dict(self) -> dict:
        return {
            "max_rel_error": self.max_rel_error,
            "worst_entry": list(self.worst_entry),
            "passed": self.passed,
            "tol": self.tol,
            "h": self.h,
        }


def gradient_check(mu, shape: LeagueShape, tol: float = 1e-3, h: float = 1e-4) -> GradientCheckReport:
    """Compare the analytic gradient against central differences.

    Relative error per entry uses max(|analytic|, |fd|, 1e-8) as the
    denominator; the floor avoids 0/0 on saturated entries.
    """
    if tol <= 0.0:
        raise ValueError(f"tolerance must be > 0, got {tol}")
    analytic = analytic_gradient(mu, shape)
    fd = fd_gradient(mu, shape, h=h)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(fd)), 1e-8)
    rel = np.abs(analytic - fd) / denom
    worst_flat = int(np.argmax(rel))
    worst = np.unravel_index(worst_flat, rel.shape)
    max_rel = float(rel[worst])
    return GradientCheckReport(
        max_rel_error=max_rel,
        worst_entry=(int(worst[0]), int(worst[1])),
        passed=max_rel <= tol,
        tol=tol,
        h=h,
    )
