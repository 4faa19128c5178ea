"""Closed-form win-probability objective for Rotisserie category leagues.

Inputs are a matrix of normalized matchup means mu[c, o] (each matchup
differential is scaled to unit variance) and a league shape carrying the
category correlation matrix and the per-category spread of opponent
strengths. The objective walks through the moments of the team's own
surpass-count total, the expected variance of a generic opponent's total,
and the moments of the gap between the best opponent and the average
opponent, then returns the Normal tail probability that the team finishes
on top, along with every intermediate moment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from . import stats

__all__ = [
    "LeagueShape",
    "ObjectiveBreakdown",
    "helpers_T",
    "helper_H_M",
    "opponent_variance",
    "team_moments",
    "gap_moments",
    "differential_and_v",
    "evaluate",
]

# Floor applied to the own-total variance: strongly negative correlation
# entries can push the covariance sum slightly below zero.
SIGMA2_T_FLOOR = 1e-9

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class LeagueShape:
    """Static structure of a league: category count, opponent count,
    category correlation matrix, and per-category opponent spread."""

    num_categories: int
    num_opponents: int
    rho: np.ndarray      # (C, C) correlation between categories
    sigma_c: np.ndarray  # (C,) spread of opponent strengths per category

    def __post_init__(self):
        if self.num_categories < 1:
            raise ValueError(f"need at least one category, got {self.num_categories}")
        if not 1 <= self.num_opponents <= 20:
            raise stats.UnsupportedLeagueSizeError(
                f"opponent count {self.num_opponents} outside supported range 1..20"
            )
        rho = np.asarray(self.rho, dtype=float)
        sigma_c = np.asarray(self.sigma_c, dtype=float)
        c = self.num_categories
        if rho.shape != (c, c):
            raise ValueError(f"rho must be {c}x{c}, got {rho.shape}")
        if not np.allclose(rho, rho.T, atol=1e-10, rtol=0.0):
            raise ValueError("rho must be symmetric")
        if not np.all(np.diag(rho) == 1.0):
            raise ValueError("rho must have a unit diagonal")
        if np.any(np.abs(rho) > 1.0) or not np.all(np.isfinite(rho)):
            raise ValueError("rho entries must lie in [-1, 1]")
        if sigma_c.shape != (c,):
            raise ValueError(f"sigma_c must have length {c}, got shape {sigma_c.shape}")
        if np.any(sigma_c < 0.0) or not np.all(np.isfinite(sigma_c)):
            raise ValueError("sigma_c entries must be finite and >= 0")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "sigma_c", sigma_c)

    @classmethod
    def symmetric(cls, num_categories: int, num_opponents: int) -> "LeagueShape":
        """Uncorrelated categories, zero opponent spread."""
        return cls(
            num_categories=num_categories,
            num_opponents=num_opponents,
            rho=np.eye(num_categories),
            sigma_c=np.zeros(num_categories),
        )


@dataclass(frozen=True)
class ObjectiveBreakdown:
    """The win probability and every intermediate moment behind it."""

    mu_T: float        # expected own fantasy points
    sigma2_T: float    # variance of own fantasy points
    e_sigma2_M: float  # expected variance of a generic opponent's points
    mu_L: float        # expected gap: best opponent minus average opponent
    sigma2_L: float    # variance of that gap
    mu_D: float        # mean of the win differential
    sigma2_D: float    # variance of the win differential
    v: float           # win probability

    def as_dict(self) -> Dict[str, float]:
        return {
            "mu_T": self.mu_T,
            "sigma2_T": self.sigma2_T,
            "e_sigma2_M": self.e_sigma2_M,
            "mu_L": self.mu_L,
            "sigma2_L": self.sigma2_L,
            "mu_D": self.mu_D,
            "sigma2_D": self.sigma2_D,
            "v": self.v,
        }


def _check_dims(mu: np.ndarray, shape: LeagueShape) -> None:
    expected = (shape.num_categories, shape.num_opponents)
    if mu.shape != expected:
        raise ValueError(f"matchup matrix must be {expected}, got {mu.shape}")
    if not np.all(np.isfinite(mu)):
        raise ValueError("matchup matrix entries must be finite")


def _phi_tables(mu: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """CDF and PDF of every matchup mean, evaluated once."""
    cdf = stats.norm_cdf(mu)
    pdf = stats.norm_pdf(mu)
    return np.atleast_2d(cdf), np.atleast_2d(pdf)


def _helper_tables(pdf: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """F (per-category pdf sums), G (pdf cross products), and H (the
    covariance weights: F_a F_b + G_ab off the diagonal, F^2 - G on it)."""
    f = pdf.sum(axis=1)
    g = pdf @ pdf.T
    h = np.outer(f, f) + g
    np.fill_diagonal(h, f * f - np.diag(g))
    return f, g, h


def helpers_T(mu, a: int, b: int) -> Tuple[float, float, float, float]:
    """Helper values (F_a, F_b, G_ab, H_ab) for one category pair.

    F sums the matchup densities of a category across opponents; G sums the
    products of two categories' densities; H combines them into the weight
    the covariance sum applies to rho[a, b].
    """
    mu = np.atleast_2d(np.asarray(mu, dtype=float))
    c = mu.shape[0]
    if not (0 <= a < c and 0 <= b < c):
        raise IndexError(f"category indices ({a}, {b}) out of range for {c} categories")
    _, pdf = _phi_tables(mu)
    f, g, h = _helper_tables(pdf)
    return float(f[a]), float(f[b]), float(g[a, b]), float(h[a, b])


def _h_m_matrix(shape: LeagueShape) -> np.ndarray:
    """Covariance weights for a generic opponent, all category pairs."""
    o = shape.num_opponents
    scale = 1.0 / np.sqrt(1.0 + shape.sigma_c**2)
    h = o * (o + 1) / TWO_PI * np.outer(scale, scale)
    np.fill_diagonal(h, o * (o - 1) / (TWO_PI * (1.0 + shape.sigma_c**2)))
    return h


def helper_H_M(shape: LeagueShape, a: int, b: int) -> float:
    """Covariance weight for a generic opponent's totals, one category pair.

    Averages the own-team helper H over opponent-strength scenarios drawn
    with spread sigma_c, which collapses it to a closed form.
    """
    c = shape.num_categories
    if not (0 <= a < c and 0 <= b < c):
        raise IndexError(f"category indices ({a}, {b}) out of range for {c} categories")
    return float(_h_m_matrix(shape)[a, b])


def opponent_variance(shape: LeagueShape) -> float:
    """Expected variance of a generic opponent's fantasy-point total.

    The Bernoulli part integrates each matchup's win-loss variance over the
    opponent-strength distribution; the covariance part reuses the closed
    form of helper_H_M. Result is clamped at zero.
    """
    o = shape.num_opponents
    s2 = shape.sigma_c**2
    bern = o * float(np.arccos(s2 / (1.0 + s2)).sum()) / TWO_PI
    cov = 0.5 * float((shape.rho * _h_m_matrix(shape)).sum())
    return max(bern + cov, 0.0)


def team_moments(mu, shape: LeagueShape) -> Tuple[float, float]:
    """Mean and variance of the team's own fantasy-point total.

    The mean sums each matchup's win probability. The variance sums the
    per-matchup Bernoulli variances plus a correlation-weighted covariance
    term, and is floored at 1e-9.
    """
    mu = np.asarray(mu, dtype=float)
    _check_dims(mu, shape)
    cdf, pdf = _phi_tables(mu)
    # accumulate per category first (category-major order, deterministic)
    mu_T = float(cdf.sum(axis=1).sum())
    bern = float((cdf * (1.0 - cdf)).sum(axis=1).sum())
    _, _, h = _helper_tables(pdf)
    cov = 0.5 * float((shape.rho * h).sum())
    return mu_T, max(bern + cov, SIGMA2_T_FLOOR)


def gap_moments(e_sigma2_M: float, shape: LeagueShape) -> Tuple[float, float]:
    """Mean and variance of the gap between the best opponent's total and
    the average opponent's total, from the tabulated moments of the maximum
    of |O| standard Normals scaled by the generic-opponent deviation."""
    if e_sigma2_M < 0.0:
        raise ValueError(f"opponent variance must be >= 0, got {e_sigma2_M}")
    mev, mvar = stats.max_order_stats(shape.num_opponents)
    return mev * math.sqrt(e_sigma2_M), mvar * e_sigma2_M


def differential_and_v(
    mu_T: float,
    sigma2_T: float,
    mu_L: float,
    sigma2_L: float,
    shape: LeagueShape,
) -> Tuple[float, float, float]:
    """Moments of the win differential and the resulting win probability.

    The differential rescales the own total (every point the team scores is
    one an opponent cannot), subtracts the fixed total points in play, and
    subtracts the best-opponent gap. When its variance degenerates to zero
    the probability is 1, 0, or 0.5 by the sign of the mean.
    """
    if sigma2_T < 0.0 or sigma2_L < 0.0:
        raise ValueError("variances must be >= 0")
    o = shape.num_opponents
    ratio = (o + 1) / o
    mu_D = mu_T * ratio - shape.num_categories * (o + 1) / 2.0 - mu_L
    sigma2_D = ratio * sigma2_T + sigma2_L
    if sigma2_D == 0.0:
        v = 1.0 if mu_D > 0.0 else (0.0 if mu_D < 0.0 else 0.5)
    else:
        v = stats.norm_cdf(mu_D / math.sqrt(sigma2_D))
    return mu_D, sigma2_D, v


def evaluate(mu, shape: LeagueShape) -> ObjectiveBreakdown:
    """Full objective: win probability plus every intermediate moment."""
    mu = np.asarray(mu, dtype=float)
    _check_dims(mu, shape)
    e_sigma2_M = opponent_variance(shape)
    mu_T, sigma2_T = team_moments(mu, shape)
    mu_L, sigma2_L = gap_moments(e_sigma2_M, shape)
    mu_D, sigma2_D, v = differential_and_v(mu_T, sigma2_T, mu_L, sigma2_L, shape)
    return ObjectiveBreakdown(
        mu_T=mu_T,
        sigma2_T=sigma2_T,
        e_sigma2_M=e_sigma2_M,
        mu_L=mu_L,
        sigma2_L=sigma2_L,
        mu_D=mu_D,
        sigma2_D=sigma2_D,
        v=v,
    )
