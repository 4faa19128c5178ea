"""Tests for the win-probability objective."""

import math

import numpy as np
import pytest

from rotowin import stats
from rotowin.objective import (
    LeagueShape,
    differential_and_v,
    evaluate,
    gap_moments,
    helper_H_M,
    helpers_T,
    opponent_variance,
    team_moments,
)

PHI0 = 1.0 / math.sqrt(2 * math.pi)


def random_shape(seed, num_categories=9, num_opponents=11, max_off=0.2, max_sigma=1.5):
    r = np.random.default_rng(seed)
    off = r.uniform(-max_off, max_off, (num_categories, num_categories))
    off = 0.5 * (off + off.T)
    np.fill_diagonal(off, 0.0)
    rho = np.eye(num_categories) + off
    sigma_c = r.uniform(0.0, max_sigma, num_categories)
    return LeagueShape(num_categories, num_opponents, rho, sigma_c)


# ---------------------------------------------------------------------------
# LeagueShape validation
# ---------------------------------------------------------------------------

def test_shape_validation():
    with pytest.raises(ValueError):
        LeagueShape(0, 3, np.eye(1), np.zeros(1))
    with pytest.raises(stats.UnsupportedLeagueSizeError):
        LeagueShape(2, 21, np.eye(2), np.zeros(2))
    with pytest.raises(ValueError):
        LeagueShape(2, 3, np.array([[1.0, 0.5], [0.4, 1.0]]), np.zeros(2))
    with pytest.raises(ValueError):
        LeagueShape(2, 3, np.array([[1.0, 0.2], [0.2, 0.9]]), np.zeros(2))
    with pytest.raises(ValueError):
        LeagueShape(2, 3, np.eye(2), np.array([0.1, -0.2]))


# ---------------------------------------------------------------------------
# Helper functions
# ---------------------------------------------------------------------------

def test_helpers_at_zero_state():
    mu = np.zeros((2, 3))
    f_a, f_b, g, h = helpers_T(mu, 0, 0)
    assert f_a == pytest.approx(3 * PHI0, abs=1e-12)
    assert f_a == pytest.approx(1.196827, abs=1e-6)
    assert h == pytest.approx(0.954930, abs=1e-6)          # F^2 - G
    _, _, _, h_ab = helpers_T(mu, 0, 1)
    assert h_ab == pytest.approx(1.909859, abs=1e-6)       # F_a F_b + G


def test_helpers_match_brute_force():
    rng = np.random.default_rng(3)
    mu = rng.uniform(-2, 2, (4, 5))
    pdf = stats.norm_pdf(mu)
    f = pdf.sum(axis=1)
    for a, b in [(1, 1), (0, 2), (3, 1)]:
        f_a, f_b, g_ab, h_ab = helpers_T(mu, a, b)
        assert f_a == pytest.approx(f[a], abs=1e-12)
        assert g_ab == pytest.approx(float(pdf[a] @ pdf[b]), abs=1e-12)
        if a == b:
            brute = sum(
                pdf[a, i] * pdf[a, j]
                for i in range(5)
                for j in range(5)
                if i != j
            )
        else:
            brute = f[a] * f[b] + float(pdf[a] @ pdf[b])
        assert h_ab == pytest.approx(brute, abs=1e-12)


def test_helper_H_M_plug_ins():
    shape = LeagueShape(2, 3, np.eye(2), np.zeros(2))
    assert helper_H_M(shape, 0, 0) == pytest.approx(6 / (2 * math.pi), abs=1e-12)
    assert helper_H_M(shape, 0, 1) == pytest.approx(12 / (2 * math.pi), abs=1e-12)
    unit = LeagueShape(2, 3, np.eye(2), np.ones(2))
    assert helper_H_M(unit, 0, 0) == pytest.approx(6 / (4 * math.pi), abs=1e-12)
    assert helper_H_M(unit, 0, 0) == pytest.approx(0.477465, abs=1e-6)


# ---------------------------------------------------------------------------
# Opponent variance
# ---------------------------------------------------------------------------

def test_opponent_variance_example():
    shape = LeagueShape(2, 3, np.eye(2), np.zeros(2))
    assert opponent_variance(shape) == pytest.approx(2.454930, abs=1e-6)


def test_opponent_variance_vanishes_for_large_spread():
    # the per-matchup win-loss variance term dies off as opponent spread
    # grows (lopsided matchups are nearly deterministic)
    wide = LeagueShape(3, 5, np.eye(3), np.full(3, 1e6))
    cov_part = 0.5 * sum(helper_H_M(wide, a, a) for a in range(3))
    bernoulli_part = opponent_variance(wide) - cov_part
    assert bernoulli_part < 1e-5
    narrow = LeagueShape(3, 5, np.eye(3), np.zeros(3))
    assert opponent_variance(wide) < opponent_variance(narrow)


def test_opponent_variance_identity_with_zero_spread():
    # with zero opponent spread the generic-opponent variance is the own-team
    # variance at an all-zero state, for any correlation matrix
    for seed in range(25):
        r = np.random.default_rng(seed)
        c = int(r.integers(1, 10))
        o = int(r.integers(1, 21))
        rho = r.uniform(-0.9, 0.9, (c, c))
        rho = 0.5 * (rho + rho.T)
        np.fill_diagonal(rho, 1.0)
        shape = LeagueShape(c, o, rho, np.zeros(c))
        _, sigma2_t = team_moments(np.zeros((c, o)), shape)
        assert abs(opponent_variance(shape) - sigma2_t) <= 1e-9


# ---------------------------------------------------------------------------
# Team moments
# ---------------------------------------------------------------------------

def test_team_moments_symmetric_league():
    shape = LeagueShape.symmetric(9, 11)
    mu_t, sigma2_t = team_moments(np.zeros((9, 11)), shape)
    assert mu_t == pytest.approx(49.5, abs=1e-12)
    # independent arithmetic oracle: 9*11/4 + 0.5*9*(F^2 - G) with
    # F = 11 phi(0), G = 11 phi(0)^2
    expected = 9 * 11 / 4 + 0.5 * 9 * ((11 * PHI0) ** 2 - 11 * PHI0**2)
    assert sigma2_t == pytest.approx(expected, abs=1e-10)
    assert sigma2_t == pytest.approx(103.53169683048822, abs=1e-9)


def test_team_moments_saturation():
    shape = LeagueShape.symmetric(9, 11)
    mu_t, sigma2_t = team_moments(np.full((9, 11), 8.0), shape)
    assert mu_t == pytest.approx(99.0, abs=1e-9)
    assert sigma2_t == pytest.approx(1e-9, abs=1e-12)  # floored


def test_team_moments_dimension_mismatch():
    shape = LeagueShape.symmetric(3, 4)
    with pytest.raises(ValueError):
        team_moments(np.zeros((4, 3)), shape)


# ---------------------------------------------------------------------------
# Gap moments and the differential
# ---------------------------------------------------------------------------

def test_gap_moments():
    shape = LeagueShape.symmetric(9, 11)
    assert gap_moments(1.0, shape) == pytest.approx((1.586436352, 0.333247443))
    assert gap_moments(0.0, shape) == (0.0, 0.0)
    two = LeagueShape.symmetric(9, 2)
    mu_l, _ = gap_moments(4.0, two)
    assert mu_l == pytest.approx(2 * 0.564189584, abs=1e-12)
    with pytest.raises(ValueError):
        gap_moments(-0.5, shape)


def test_differential_average_team():
    shape = LeagueShape.symmetric(9, 11)
    mu_d, _, _ = differential_and_v(9 * 11 / 2, 10.0, 16.0, 5.0, shape)
    assert mu_d == pytest.approx(-16.0, abs=1e-12)


def test_differential_degenerate_rule():
    shape = LeagueShape.symmetric(2, 3)
    assert differential_and_v(10.0, 0.0, 0.0, 0.0, shape)[2] == 1.0
    assert differential_and_v(0.0, 0.0, 0.0, 0.0, shape)[2] == 0.0
    assert differential_and_v(3.0, 0.0, 0.0, 0.0, shape)[2] == 0.5  # mu_D == 0
    mu_d, _, _ = differential_and_v(3.0, 0.0, 0.0, 0.0, shape)
    assert mu_d == 0.0


def test_v_half_when_mu_d_zero():
    shape = LeagueShape.symmetric(2, 3)
    mu_d, sigma2_d, v = differential_and_v(3.0, 1.0, 0.0, 1.0, shape)
    assert mu_d == 0.0 and sigma2_d > 0 and v == 0.5


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------

def test_evaluate_symmetric_league_frozen():
    shape = LeagueShape.symmetric(9, 11)
    bd = evaluate(np.zeros((9, 11)), shape)
    assert bd.mu_T == pytest.approx(49.5, abs=1e-12)
    assert bd.sigma2_T == pytest.approx(103.53169683048822, abs=1e-9)
    assert bd.e_sigma2_M == pytest.approx(103.53169683048822, abs=1e-9)
    assert bd.mu_L == pytest.approx(16.14207343867365, abs=1e-9)
    assert bd.sigma2_L == pytest.approx(34.50167323821139, abs=1e-9)
    assert bd.mu_D == pytest.approx(-16.14207343867365, abs=1e-9)
    assert bd.sigma2_D == pytest.approx(147.44534250783488, abs=1e-9)
    assert bd.v == pytest.approx(0.0918640170839703, abs=1e-12)
    # a symmetric league sits below even odds but above zero
    assert 0.0 < bd.v < 0.5
    assert bd.mu_D == pytest.approx(-bd.mu_L)


def test_evaluate_monotone_in_uniform_shift():
    shape = LeagueShape.symmetric(9, 11)
    lifted = evaluate(np.full((9, 11), 3.0), shape)
    base = evaluate(np.zeros((9, 11)), shape)
    assert lifted.v > base.v


def test_evaluate_opponent_permutation_invariance():
    rng = np.random.default_rng(11)
    mu = rng.uniform(-2, 2, (9, 11))
    shape = random_shape(11)
    perm = np.random.default_rng(0).permutation(11)
    a = evaluate(mu, shape).as_dict()
    b = evaluate(mu[:, perm], shape).as_dict()
    for key in a:
        assert a[key] == pytest.approx(b[key], abs=1e-12)


def test_evaluate_category_permutation_equivariance():
    rng = np.random.default_rng(5)
    mu = rng.uniform(-2, 2, (9, 11))
    shape = random_shape(5)
    perm = np.random.default_rng(1).permutation(9)
    permuted = LeagueShape(9, 11, shape.rho[np.ix_(perm, perm)], shape.sigma_c[perm])
    a = evaluate(mu, shape).as_dict()
    b = evaluate(mu[perm, :], permuted).as_dict()
    for key in a:
        assert a[key] == pytest.approx(b[key], abs=1e-12)


def test_evaluate_never_nan():
    shape = LeagueShape.symmetric(4, 6)
    for fill in (-40.0, -8.0, 0.0, 8.0, 40.0):
        bd = evaluate(np.full((4, 6), fill), shape)
        for value in bd.as_dict().values():
            assert math.isfinite(value)


def test_bernoulli_term_maximized_at_zero():
    # per-matchup win-loss variance peaks at an even matchup
    for x in (-3.0, -1.0, -0.1, 0.1, 0.7, 2.5):
        p = stats.norm_cdf(x)
        assert p * (1 - p) < 0.25
    assert stats.norm_cdf(0.0) * (1 - stats.norm_cdf(0.0)) == 0.25


def test_evaluate_rejects_bad_inputs():
    shape = LeagueShape.symmetric(2, 3)
    with pytest.raises(ValueError):
        evaluate(np.zeros((3, 2)), shape)
    with pytest.raises(ValueError):
        evaluate(np.array([[0.0, np.nan, 0.0], [0.0, 0.0, 0.0]]), shape)
