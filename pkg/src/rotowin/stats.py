"""Scalar statistical primitives shared by every other module.

Standard Normal PDF/CDF, a small-correlation bivariate Normal CDF
approximation plus its quadrature reference, tabulated moments of the
maximum of N standard Normals, correlation-matrix repair, and the exact
count of distinct winning scenarios for a category league.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import integrate, special

__all__ = [
    "UnsupportedLeagueSizeError",
    "MaxOrderStatsRow",
    "MAX_ORDER_STATS_TABLE",
    "norm_pdf",
    "norm_cdf",
    "bvn_cdf_approx",
    "bvn_cdf_reference",
    "max_order_stats",
    "scenario_count",
    "nearest_psd",
]

SQRT_2PI = math.sqrt(2.0 * math.pi)


class UnsupportedLeagueSizeError(ValueError):
    """League size falls outside the tabulated 1..20 range."""


def norm_pdf(x):
    """Standard Normal density; elementwise on array input."""
    arr = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * arr * arr) / SQRT_2PI
    return float(out) if out.ndim == 0 else out


def norm_cdf(x):
    """Standard Normal CDF (erf-backed); elementwise on array input."""
    out = special.ndtr(np.asarray(x, dtype=float))
    return float(out) if out.ndim == 0 else out


def bvn_cdf_approx(x: float, y: float, rho: float) -> float:
    """P(X <= x, Y <= y) for standard bivariate Normals, first order in rho.

    Returns Phi(x)*Phi(y) + rho*phi(x)*phi(y), clamped to [0, 1]. The raw
    formula can leave the unit interval for large |x| with nonzero rho.
    Exact at rho = 0; intended for small |rho|.
    """
    p = norm_cdf(x) * norm_cdf(y) + rho * norm_pdf(x) * norm_pdf(y)
    return min(1.0, max(0.0, p))


def bvn_cdf_reference(x: float, y: float, rho: float) -> float:
    """Bivariate Normal CDF by adaptive quadrature; oracle for the
    approximation above.

    The derivative of the CDF with respect to the correlation is the
    bivariate density, so the CDF is recovered by integrating that density
    in the correlation parameter from 0 (the independent case) to rho.
    Absolute error stays below 1e-7 for |rho| < 1; |rho| = 1 uses the
    degenerate closed forms.
    """
    if abs(rho) > 1.0:
        raise ValueError(f"correlation must lie in [-1, 1], got {rho}")
    if rho == 1.0:
        return norm_cdf(min(x, y))
    if rho == -1.0:
        return max(0.0, norm_cdf(x) + norm_cdf(y) - 1.0)
    if rho == 0.0:
        return norm_cdf(x) * norm_cdf(y)

    def density(t: float) -> float:
        q = 1.0 - t * t
        return math.exp(-(x * x - 2.0 * t * x * y + y * y) / (2.0 * q)) / (
            2.0 * math.pi * math.sqrt(q)
        )

    corr, _ = integrate.quad(density, 0.0, rho, epsabs=1e-12, epsrel=1e-12)
    p = norm_cdf(x) * norm_cdf(y) + corr
    return min(1.0, max(0.0, p))


@dataclass(frozen=True)
class MaxOrderStatsRow:
    """Moments of the maximum of n independent standard Normals."""

    n: int
    mev: float   # expected maximum
    ex2: float   # expected squared maximum
    mvar: float  # variance of the maximum


# Tabulated constants for n = 1..20; stored literally, not recomputed, so
# downstream values are bit-stable. mvar = ex2 - mev**2 holds to 1e-9.
MAX_ORDER_STATS_TABLE: Tuple[MaxOrderStatsRow, ...] = (
    MaxOrderStatsRow(1, 0.0, 1.0, 1.0),
    MaxOrderStatsRow(2, 0.564189584, 1.0, 0.681690114),
    MaxOrderStatsRow(3, 0.846284375, 1.275664448, 0.559467204),
    MaxOrderStatsRow(4, 1.029375373, 1.551328895, 0.491715237),
    MaxOrderStatsRow(5, 1.162964474, 1.800020436, 0.447534069),
    MaxOrderStatsRow(6, 1.267206361, 2.021739069, 0.415927109),
    MaxOrderStatsRow(7, 1.352178376, 2.220304137, 0.391917777),
    MaxOrderStatsRow(8, 1.423600306, 2.399534975, 0.372897143),
    MaxOrderStatsRow(9, 1.485013162, 2.562617418, 0.357353326),
    MaxOrderStatsRow(10, 1.538752731, 2.71210379, 0.344343823),
    MaxOrderStatsRow(11, 1.586436352, 2.850027741, 0.333247443),
    MaxOrderStatsRow(12, 1.62922764, 2.97801909, 0.323636387),
    MaxOrderStatsRow(13, 1.667990177, 3.097396615, 0.315205384),
    MaxOrderStatsRow(14, 1.703381554, 3.209238821, 0.307730102),
    MaxOrderStatsRow(15, 1.735913445, 3.314427059, 0.30103157),
    MaxOrderStatsRow(16, 1.766991393, 3.413735409, 0.291476826),
    MaxOrderStatsRow(17, 1.793941081, 3.507760835, 0.289536233),
    MaxOrderStatsRow(18, 1.820031879, 3.59704617, 0.28453013),
    MaxOrderStatsRow(19, 1.844481512, 3.682047852, 0.279935805),
    MaxOrderStatsRow(20, 1.86747506, 3.763159715, 0.275696616),
)


def max_order_stats(n: int) -> Tuple[float, float]:
    """Expected value and variance of the maximum of n standard Normals.

    Table lookup; league sizes outside 1..20 are unsupported.
    """
    if not 1 <= n <= 20:
        raise UnsupportedLeagueSizeError(
            f"no tabulated maximum-order statistics for n={n}; supported range is 1..20"
        )
    row = MAX_ORDER_STATS_TABLE[n - 1]
    return row.mev, row.mvar


def scenario_count(teams: int, categories: int) -> int:
    """Exact number of distinct winning scenarios: (teams!)**categories // teams.

    Every category admits teams! orderings; dividing by the number of teams
    picks out the share won by one fixed team. Exact big-integer arithmetic.
    """
    if teams < 2:
        raise ValueError(f"teams must be >= 2, got {teams}")
    if categories < 1:
        raise ValueError(f"categories must be >= 1, got {categories}")
    return math.factorial(teams) ** categories // teams


def nearest_psd(m) -> np.ndarray:
    """Repair a symmetric matrix into a valid correlation matrix.

    Eigenvalues are clipped at zero and the diagonal rescaled to exactly 1.
    Inputs that are already PSD with a unit diagonal pass through unchanged,
    so the operation is idempotent.
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.allclose(a, a.T, atol=1e-10, rtol=0.0):
        raise ValueError("correlation matrix must be symmetric")

    a = 0.5 * (a + a.T)
    w, v = np.linalg.eigh(a)
    if w[0] >= -1e-12 and np.all(np.diag(a) == 1.0):
        return a

    fixed = (v * np.clip(w, 0.0, None)) @ v.T
    d = np.sqrt(np.diag(fixed))
    d[d == 0.0] = 1.0  # fully zeroed row: leave unit diagonal, zero elsewhere
    out = fixed / np.outer(d, d)
    out = np.clip(0.5 * (out + out.T), -1.0, 1.0)
    np.fill_diagonal(out, 1.0)
    return out
