"""Tests for season simulation: noise covariance, Rotisserie scoring,
experiment reports, punt detection, and the synthetic pool."""

import json
import math

import numpy as np
import pytest

from rotowin.draft import (
    COUNTING,
    Category,
    CategorySet,
    DraftState,
    GScoreAgent,
    LeagueConfig,
    PlayerProjection,
    ScoringBasis,
    run_draft,
    validate_projection,
)
from rotowin.seasonsim import (
    ExperimentConfig,
    NoiseModelConfig,
    SimReport,
    build_noise_covariance,
    detect_punts,
    make_synthetic_pool,
    run_experiment,
    simulate_season,
)


def two_cat():
    return CategorySet((Category("pts", COUNTING), Category("ft%", "percentage")))


def proj(pid, pts, ft_rate=0.75, ft_vol=10.0):
    return PlayerProjection(pid, pid, (pts, ft_rate), (0.0, ft_vol))


def noise_config(categories=None, tau_m=2.0, tau_r=1.2, chi=0.5, roster=13, rho=None):
    return NoiseModelConfig(
        categories=categories if categories is not None else CategorySet.default_nba(),
        tau_m=tau_m,
        tau_r=tau_r,
        chi=chi,
        roster_size=roster,
        rho=rho,
    )


# ---------------------------------------------------------------------------
# Noise covariance
# ---------------------------------------------------------------------------

def test_noise_sigma_worked_example():
    cats = CategorySet.default_nba()
    cov = build_noise_covariance(noise_config(chi=0.5, roster=13))
    # tau_m=2, N=13, chi=0.5: counting sigma = 2 * 13 * 0.25 = 6.5
    assert cov[cats.index("pts"), cats.index("pts")] == pytest.approx(6.5**2, rel=1e-12)
    pct_sigma = 1.2 / 13 * 0.25
    assert cov[cats.index("ft%"), cats.index("ft%")] == pytest.approx(pct_sigma**2, rel=1e-12)


def test_noise_identity_rho_is_diagonal():
    cov = build_noise_covariance(noise_config())
    off = cov - np.diag(np.diag(cov))
    assert np.all(off == 0.0)


def test_noise_vanishes_with_chi():
    cov_small = build_noise_covariance(noise_config(chi=1e-4))
    assert np.abs(cov_small).max() < 1e-10
    cov_full = build_noise_covariance(noise_config(chi=1.0))
    cov_fifth = build_noise_covariance(noise_config(chi=0.2))
    np.testing.assert_allclose(cov_fifth, cov_full * 0.2**4, rtol=1e-12)


def test_noise_cross_terms_and_repair():
    cats = two_cat()
    rho = np.array([[1.0, 0.3], [0.3, 1.0]])
    cov = build_noise_covariance(noise_config(categories=cats, rho=rho, chi=1.0, roster=10))
    sigma = np.array([2.0 * 10, 1.2 / 10])
    assert cov[0, 1] == pytest.approx(0.3 * sigma[0] * sigma[1], rel=1e-12)

    hard = np.array([[1.0, 0.9], [0.9, 1.0]])
    hard_3 = np.array(
        [[1.0, 0.9, -0.9], [0.9, 1.0, 0.9], [-0.9, 0.9, 1.0]]
    )  # not PSD
    cats3 = CategorySet(
        (Category("a", COUNTING), Category("b", COUNTING), Category("c", COUNTING))
    )
    cov3 = build_noise_covariance(noise_config(categories=cats3, rho=hard_3, chi=0.7, roster=5))
    assert np.linalg.eigvalsh(cov3).min() >= -1e-10
    del hard


def test_noise_config_validation():
    with pytest.raises(ValueError):
        noise_config(tau_m=0.0)
    with pytest.raises(ValueError):
        noise_config(tau_r=-1.0)
    with pytest.raises(ValueError):
        noise_config(chi=0.0)
    with pytest.raises(ValueError):
        noise_config(chi=1.2)
    with pytest.raises(ValueError):
        noise_config(roster=0)
    with pytest.raises(ValueError):
        noise_config(categories=two_cat(), rho=np.eye(3))


# ---------------------------------------------------------------------------
# Season scoring
# ---------------------------------------------------------------------------

def drafted_league(projections, num_teams, roster_size, chi=0.5):
    cfg = LeagueConfig(num_teams, roster_size, two_cat(), chi)
    state = DraftState.new(cfg, sorted(projections))
    while not state.is_complete:
        state = state.apply_pick(next(iter(state.remaining)))
    return state


def test_zero_noise_deterministic_standings():
    projections = {
        "a": proj("a", 30.0, 0.90),
        "b": proj("b", 20.0, 0.80),
        "c": proj("c", 10.0, 0.70),
    }
    draft = drafted_league(projections, 3, 1)
    cov = np.zeros((2, 2))
    gen = np.random.default_rng(0)
    result = simulate_season(draft, projections, cov, gen)
    # seat drafting "a" dominates both categories
    np.testing.assert_allclose(result.internal[0], [2.0, 2.0])
    np.testing.assert_allclose(result.internal[2], [0.0, 0.0])
    np.testing.assert_allclose(result.standard, result.internal + 1.0)
    assert result.winner == 0
    np.testing.assert_allclose(result.winner_shares, [1.0, 0.0, 0.0])


def test_zero_noise_ties_split_evenly():
    projections = {
        "a": proj("a", 30.0, 0.90),
        "b": proj("b", 30.0, 0.90),
        "c": proj("c", 10.0, 0.70),
    }
    draft = drafted_league(projections, 3, 1)
    result = simulate_season(draft, projections, np.zeros((2, 2)), np.random.default_rng(0))
    np.testing.assert_allclose(result.internal[0], [1.5, 1.5])
    np.testing.assert_allclose(result.internal[1], [1.5, 1.5])
    np.testing.assert_allclose(result.winner_shares, [0.5, 0.5, 0.0])
    assert result.total_internal.sum() == pytest.approx(2 * 3 * 2 / 2, abs=0)


def test_conservation_and_seed_determinism():
    pool = make_synthetic_pool(size=30, seed=2)
    cats = CategorySet.default_nba()
    cfg = LeagueConfig(4, 3, cats, 0.5)
    state = DraftState.new(cfg, sorted(pool))
    while not state.is_complete:
        state = state.apply_pick(next(iter(state.remaining)))
    cov = build_noise_covariance(
        NoiseModelConfig(categories=cats, tau_m=2.0, tau_r=1.2, chi=0.5, roster_size=3)
    )
    expected_total = 9 * 4 * 3 / 2  # |C| * K(K-1)/2 internal points
    for i in range(50):
        result = simulate_season(state, pool, cov, np.random.default_rng(i))
        assert result.total_internal.sum() == expected_total
        assert result.winner_shares.sum() == pytest.approx(1.0, abs=0)
    one = simulate_season(state, pool, cov, np.random.default_rng(99))
    two = simulate_season(state, pool, cov, np.random.default_rng(99))
    np.testing.assert_array_equal(one.internal, two.internal)
    np.testing.assert_array_equal(one.winner_shares, two.winner_shares)


def test_incomplete_draft_rejected():
    projections = {"a": proj("a", 30.0), "b": proj("b", 20.0), "c": proj("c", 10.0)}
    cfg = LeagueConfig(3, 1, two_cat(), 0.5)
    state = DraftState.new(cfg, sorted(projections))
    with pytest.raises(ValueError):
        simulate_season(state, projections, np.zeros((2, 2)), np.random.default_rng(0))


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

def small_all_g_experiment(n_seasons, workers=1, master_seed=17):
    projections = {
        "a": proj("a", 30.0, 0.90),
        "b": proj("b", 26.0, 0.85),
        "c": proj("c", 22.0, 0.80),
        "d": proj("d", 18.0, 0.75),
        "e": proj("e", 14.0, 0.70),
    }
    config = ExperimentConfig(league=LeagueConfig(3, 1, two_cat(), 0.5))
    return run_experiment(
        projections, ["gscore"] * 3, config, n_seasons, master_seed, workers=workers
    )


def test_all_g_win_rates_sum_to_one():
    report = small_all_g_experiment(300)
    assert sum(report.win_rate) == pytest.approx(1.0, abs=1e-12)
    assert report.seasons_per_seat == (300, 300, 300)
    # per-season standard points sum to |C| * K(K+1)/2 across teams
    total = sum(sum(row) for row in report.mean_standard_points)
    assert total == pytest.approx(2 * 3 * 4 / 2, abs=1e-9)


def test_experiment_worker_count_independent():
    serial = small_all_g_experiment(300, workers=1)
    parallel = small_all_g_experiment(300, workers=2)
    assert serial.win_rate == parallel.win_rate
    assert serial.mean_standard_points == parallel.mean_standard_points


def test_experiment_seed_determinism():
    one = small_all_g_experiment(60, master_seed=5)
    two = small_all_g_experiment(60, master_seed=5)
    assert one.as_dict() == two.as_dict()
    other = small_all_g_experiment(60, master_seed=6)
    assert one.win_rate != other.win_rate


def test_experiment_validation():
    projections = {"a": proj("a", 30.0), "b": proj("b", 20.0), "c": proj("c", 10.0)}
    config = ExperimentConfig(league=LeagueConfig(3, 1, two_cat(), 0.5))
    with pytest.raises(ValueError):
        run_experiment(projections, ["gscore"] * 2, config, 10, 0)
    with pytest.raises(ValueError):
        run_experiment(projections, ["gscore", "hscore", "hscore"], config, 10, 0)
    with pytest.raises(ValueError):
        run_experiment(projections, ["gscore", "mystery", "gscore"], config, 10, 0)
    with pytest.raises(ValueError):
        run_experiment(projections, ["gscore"] * 3, config, 0, 0)


def test_objective_seat_rotation_report():
    pool = make_synthetic_pool(size=30, seed=3)
    cats = CategorySet.default_nba()
    config = ExperimentConfig(
        league=LeagueConfig(4, 2, cats, 0.5), hscore_width=5, hscore_steps=25
    )
    report = run_experiment(pool, ["hscore", "gscore", "gscore", "gscore"], config, 10, 7)
    assert report.layout == ("hscore", "gscore", "gscore", "gscore")
    assert sum(report.seasons_per_seat) == 10
    assert report.seasons_per_seat == (3, 3, 2, 2)
    assert len(report.win_rate) == 4
    assert all(0.0 <= p <= 1.0 for p in report.win_rate)
    assert len(report.rosters) == 4
    for seat_rosters in report.rosters:
        assert len(seat_rosters) == 4
        assert all(len(team) == 2 for team in seat_rosters)
    assert report.mean_win_rate == pytest.approx(
        sum(r * n for r, n in zip(report.win_rate, report.seasons_per_seat)) / 10
    )
    payload = json.dumps(report.as_dict())
    assert "win_rate" in payload
    assert report.overall_ci_halfwidth > 0.0


# ---------------------------------------------------------------------------
# Punt detection
# ---------------------------------------------------------------------------

def report_with_points(rows):
    k = len(rows)
    return SimReport(
        schema_version=1,
        master_seed=0,
        n_seasons=4,
        chi=0.5,
        layout=("gscore",) * k,
        category_names=("pts", "ft%"),
        win_rate=(0.0,) * k,
        ci_halfwidth=(0.0,) * k,
        seasons_per_seat=(4,) * k,
        mean_standard_points=tuple(tuple(r) for r in rows),
        punt_flags=((),) * k,
        rosters=(((),),) * k,
    )


def test_detect_punts_threshold_rule():
    report = report_with_points([(6.5, 1.2), (6.5, 6.5)])
    assert detect_punts(report) == (("ft%",), ())
    assert detect_punts(report, threshold=0.0) == ((), ())
    assert detect_punts(report, threshold=7.0) == (("pts", "ft%"), ("pts", "ft%"))


def test_detect_punts_boundary():
    report = report_with_points([(1.5, 1.4999)])
    # strict inequality at the threshold
    assert detect_punts(report) == (("ft%",),)


# ---------------------------------------------------------------------------
# Synthetic pool
# ---------------------------------------------------------------------------

def test_synthetic_pool_shape_and_validity():
    cats = CategorySet.default_nba()
    pool = make_synthetic_pool(size=60, seed=1)
    assert len(pool) == 60
    for pid, p in pool.items():
        assert p.player_id == pid
        validate_projection(p, cats)


def test_synthetic_pool_low_ft_bigs():
    cats = CategorySet.default_nba()
    pool = make_synthetic_pool(size=60, seed=1, low_ft_bigs=8)
    i_ft = cats.index("ft%")
    bigs = [p for p in pool.values() if "low-ft-big" in p.tags]
    others = [p for p in pool.values() if "low-ft-big" not in p.tags]
    assert len(bigs) == 8
    ft_rates = [p.means[i_ft] for p in bigs]
    assert max(ft_rates) < 0.60
    med_other_vol = float(np.median([p.volumes[i_ft] for p in others]))
    assert all(p.volumes[i_ft] > med_other_vol for p in bigs)


def test_synthetic_pool_deterministic():
    assert make_synthetic_pool(size=40, seed=9) == make_synthetic_pool(size=40, seed=9)
    a = make_synthetic_pool(size=40, seed=9)
    b = make_synthetic_pool(size=40, seed=10)
    assert a != b


def test_synthetic_pool_draftable_by_agents():
    pool = make_synthetic_pool(size=24, seed=4)
    cats = CategorySet.default_nba()
    cfg = LeagueConfig(4, 3, cats, 0.25)
    basis = ScoringBasis.from_league(cats, 4, 3, chi=0.25)
    final = run_draft([GScoreAgent(pool, basis) for _ in range(4)], sorted(pool), cfg)
    assert final.is_complete
    drafted = [p for roster in final.rosters for p in roster]
    assert len(set(drafted)) == 12
