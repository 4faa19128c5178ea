"""Season simulation: noise-covariance construction, Rotisserie scoring
with tie splitting, seat-rotation experiments, and punt detection.

A season draws one correlated Gaussian noise vector per team, adds it to
the projected team category totals (weekly scale), and awards each team
one internal point per opponent surpassed per category, with ties splitting
the contested points evenly. Standard scoring is internal plus one, so last
place in a category earns one point.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import rankdata

from . import stats
from .draft import (
    CategorySet,
    DraftState,
    GScoreAgent,
    HScoreAgent,
    LeagueConfig,
    PlayerProjection,
    ScoringBasis,
    _ProjectionTable,
    _phantom_row,
    _team_totals,
    run_draft,
)
from .montecarlo import SeededRng

__all__ = [
    "NoiseModelConfig",
    "ExperimentConfig",
    "SeasonResult",
    "SimReport",
    "build_noise_covariance",
    "simulate_season",
    "run_experiment",
    "detect_punts",
    "make_synthetic_pool",
]

SCHEMA_VERSION = 1

GSCORE = "gscore"
HSCORE = "hscore"


@dataclass(frozen=True)
class NoiseModelConfig:
    """Season-outcome noise: per-category sigma is the week-to-week team
    spread (tau_m * roster for counting stats, tau_r / roster for
    percentage stats) scaled by chi squared."""

    categories: CategorySet
    tau_m: float
    tau_r: float
    chi: float
    roster_size: int
    rho: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.tau_m <= 0.0 or self.tau_r <= 0.0:
            raise ValueError("tau scales must be positive")
        if not 0.0 < self.chi <= 1.0:
            raise ValueError(f"chi must be in (0, 1], got {self.chi}")
        if self.roster_size < 1:
            raise ValueError("roster size must be >= 1")
        if self.rho is not None:
            rho = np.asarray(self.rho, dtype=float)
            if rho.shape != (len(self.categories), len(self.categories)):
                raise ValueError("rho must be square over the categories")
            object.__setattr__(self, "rho", rho)


def build_noise_covariance(config: NoiseModelConfig) -> np.ndarray:
    """Covariance of the per-team season noise over categories."""
    weekly = np.where(
        config.categories.percentage_mask,
        config.tau_r / config.roster_size,
        config.tau_m * config.roster_size,
    )
    sigma = weekly * config.chi**2
    rho = np.eye(len(config.categories)) if config.rho is None else config.rho
    rho = stats.nearest_psd(rho)
    return rho * np.outer(sigma, sigma)


def _cov_factor(cov: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (cov + cov.T))
    return v * np.sqrt(np.clip(w, 0.0, None))


@dataclass(frozen=True)
class SeasonResult:
    internal: np.ndarray        # (teams, categories) surpass counts, ties split
    standard: np.ndarray        # internal + 1
    total_internal: np.ndarray  # (teams,)
    winner_shares: np.ndarray   # (teams,) sums to 1; ties share the win

    @property
    def winner(self) -> int:
        return int(np.argmax(self.winner_shares))


def _projected_team_totals(
    draft: DraftState,
    projections: Mapping[str, PlayerProjection],
    categories: CategorySet,
) -> np.ndarray:
    table = _ProjectionTable(projections, categories)
    rostered = {p for roster in draft.rosters for p in roster}
    undrafted = np.array(
        [i for pid, i in table.row.items() if pid not in rostered], dtype=int
    )
    phantom = _phantom_row(table, undrafted)
    return np.vstack(
        [
            _team_totals(table.rows(r), table, draft.config.roster_size, phantom)
            for r in draft.rosters
        ]
    )


def _score_totals(
    totals: np.ndarray, categories: CategorySet
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    adjusted = totals * categories.directions[None, :]
    internal = rankdata(adjusted, method="average", axis=0) - 1.0
    total_internal = internal.sum(axis=1)
    best = total_internal.max()
    tied = total_internal == best
    shares = tied / tied.sum()
    return internal, total_internal, shares


def simulate_season(
    draft: DraftState,
    projections: Mapping[str, PlayerProjection],
    noise_cov: np.ndarray,
    gen: np.random.Generator,
) -> SeasonResult:
    """One Rotisserie season on full-season weekly averages: projected team
    totals plus one correlated noise draw per team, ranked per category."""
    if not draft.is_complete:
        raise ValueError("draft must be complete")
    projected = _projected_team_totals(draft, projections, draft.config.categories)
    factor = _cov_factor(np.asarray(noise_cov, dtype=float))
    noise = gen.standard_normal(projected.shape) @ factor.T
    internal, total_internal, shares = _score_totals(
        projected + noise, draft.config.categories
    )
    return SeasonResult(
        internal=internal,
        standard=internal + 1.0,
        total_internal=total_internal,
        winner_shares=shares,
    )


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    league: LeagueConfig
    tau_m: float = 2.0
    tau_r: float = 1.2
    rho: Optional[np.ndarray] = None
    hscore_width: int = 40
    hscore_steps: int = 200

    def noise(self) -> NoiseModelConfig:
        return NoiseModelConfig(
            categories=self.league.categories,
            tau_m=self.tau_m,
            tau_r=self.tau_r,
            chi=self.league.chi,
            roster_size=self.league.roster_size,
            rho=self.rho,
        )

    def basis(self) -> ScoringBasis:
        return ScoringBasis.from_league(
            self.league.categories,
            self.league.num_teams,
            self.league.roster_size,
            self.league.chi,
            tau_m=self.tau_m,
            tau_r=self.tau_r,
        )


@dataclass(frozen=True)
class SimReport:
    """Per-seat results for the tracked team (the objective-driven seat
    when the layout has one, otherwise each seat tracks itself)."""

    schema_version: int
    master_seed: int
    n_seasons: int
    chi: float
    layout: Tuple[str, ...]
    category_names: Tuple[str, ...]
    win_rate: Tuple[float, ...]            # per seat
    ci_halfwidth: Tuple[float, ...]        # per seat, 95%
    seasons_per_seat: Tuple[int, ...]
    mean_standard_points: Tuple[Tuple[float, ...], ...]  # [seat][category]
    punt_flags: Tuple[Tuple[str, ...], ...]              # [seat] flagged names
    rosters: Tuple[Tuple[Tuple[str, ...], ...], ...]     # [seat][team][player]

    @property
    def mean_win_rate(self) -> float:
        total = sum(r * n for r, n in zip(self.win_rate, self.seasons_per_seat))
        return total / max(sum(self.seasons_per_seat), 1)

    @property
    def overall_ci_halfwidth(self) -> float:
        n = max(sum(self.seasons_per_seat), 1)
        p = self.mean_win_rate
        return 1.96 * math.sqrt(max(p * (1.0 - p), 0.0) / n)

    def as_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "master_seed": self.master_seed,
            "n_seasons": self.n_seasons,
            "chi": self.chi,
            "layout": list(self.layout),
            "category_names": list(self.category_names),
            "win_rate": list(self.win_rate),
            "ci_halfwidth": list(self.ci_halfwidth),
            "seasons_per_seat": list(self.seasons_per_seat),
            "mean_win_rate": self.mean_win_rate,
            "overall_ci_halfwidth": self.overall_ci_halfwidth,
            "mean_standard_points": [list(row) for row in self.mean_standard_points],
            "punt_flags": [list(row) for row in self.punt_flags],
            "rosters": [
                [list(team) for team in seat_rosters] for seat_rosters in self.rosters
            ],
        }


def _season_chunk(args):
    rosters, projections, categories, roster_size, cov, seed, seat, lo, hi, tracked = args
    rng = SeededRng(seed)
    table = _ProjectionTable(projections, categories)
    phantom = _phantom_row(table, np.arange(len(table.ids)))
    projected = np.vstack(
        [_team_totals(table.rows(r), table, roster_size, phantom) for r in rosters]
    )
    factor = _cov_factor(cov)
    standard_sum = np.zeros(projected.shape[1])
    wins = 0.0
    for i in range(lo, hi):
        gen = rng.generator(seat, i)
        noise = gen.standard_normal(projected.shape) @ factor.T
        internal, _, shares = _score_totals(projected + noise, categories)
        wins += float(shares[tracked])
        standard_sum += internal[tracked] + 1.0
    return wins, standard_sum, hi - lo


def _simulate_seat_seasons(
    draft: DraftState,
    projections: Mapping[str, PlayerProjection],
    cov: np.ndarray,
    master_seed: int,
    seat: int,
    n: int,
    tracked: int,
    workers: int,
) -> Tuple[float, np.ndarray]:
    """Total win share and standard-point sums for the tracked team over n
    seasons of one drafted league; seasons are chunked on fixed boundaries
    so results do not depend on the worker count."""
    chunk = 256
    jobs = []
    lo = 0
    while lo < n:
        hi = min(lo + chunk, n)
        jobs.append(
            (
                draft.rosters,
                projections,
                draft.config.categories,
                draft.config.roster_size,
                cov,
                master_seed,
                seat,
                lo,
                hi,
                tracked,
            )
        )
        lo = hi
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_season_chunk, jobs))
    else:
        rows = [_season_chunk(j) for j in jobs]
    wins = sum(r[0] for r in rows)
    standard = np.sum([r[1] for r in rows], axis=0)
    return wins, standard


def _layout_agents(
    layout: Sequence[str],
    projections: Mapping[str, PlayerProjection],
    config: ExperimentConfig,
) -> List:
    basis = config.basis()
    agents = []
    for kind in layout:
        if kind == GSCORE:
            agents.append(GScoreAgent(projections, basis))
        elif kind == HSCORE:
            agents.append(
                HScoreAgent(
                    projections,
                    basis,
                    width=config.hscore_width,
                    steps=config.hscore_steps,
                )
            )
        else:
            raise ValueError(f"unknown agent kind {kind!r}")
    return agents


def run_experiment(
    projections: Mapping[str, PlayerProjection],
    layout: Sequence[str],
    config: ExperimentConfig,
    n_seasons: int,
    master_seed: int,
    workers: int = 1,
) -> SimReport:
    """Draft-and-simulate experiment.

    With one objective-driven seat in the layout, that seat cycles through
    every draft position across batches (one deterministic draft per
    position) and the report tracks its results per position. An all-
    baseline layout runs a single draft and tracks every seat, so the
    per-seat win rates sum to one.
    """
    if n_seasons < 1:
        raise ValueError("need at least one season")
    layout = tuple(layout)
    k = config.league.num_teams
    if len(layout) != k:
        raise ValueError("layout length must equal the number of teams")
    if sum(1 for kind in layout if kind == HSCORE) > 1:
        raise ValueError("at most one objective-driven seat is supported")
    cov = build_noise_covariance(config.noise())
    pool_ids = sorted(projections.keys())

    h_seats = [s for s, kind in enumerate(layout) if kind == HSCORE]
    win_rate: List[float] = []
    ci: List[float] = []
    seasons_per_seat: List[int] = []
    mean_points: List[Tuple[float, ...]] = []
    rosters_by_seat: List[Tuple[Tuple[str, ...], ...]] = []

    if h_seats:
        base = n_seasons // k
        extra = n_seasons % k
        for seat in range(k):
            rotated = [GSCORE] * k
            rotated[seat] = HSCORE
            agents = _layout_agents(rotated, projections, config)
            draft = run_draft(agents, pool_ids, config.league)
            n_seat = base + (1 if seat < extra else 0)
            if n_seat == 0:
                win_rate.append(0.0)
                ci.append(0.0)
                seasons_per_seat.append(0)
                mean_points.append(tuple(0.0 for _ in config.league.categories))
                rosters_by_seat.append(draft.rosters)
                continue
            wins, standard = _simulate_seat_seasons(
                draft, projections, cov, master_seed, seat, n_seat, seat, workers
            )
            p = wins / n_seat
            win_rate.append(p)
            ci.append(1.96 * math.sqrt(max(p * (1.0 - p), 0.0) / n_seat))
            seasons_per_seat.append(n_seat)
            mean_points.append(tuple(standard / n_seat))
            rosters_by_seat.append(draft.rosters)
    else:
        agents = _layout_agents(layout, projections, config)
        draft = run_draft(agents, pool_ids, config.league)
        for seat in range(k):
            wins, standard = _simulate_seat_seasons(
                draft, projections, cov, master_seed, 0, n_seasons, seat, workers
            )
            p = wins / n_seasons
            win_rate.append(p)
            ci.append(1.96 * math.sqrt(max(p * (1.0 - p), 0.0) / n_seasons))
            seasons_per_seat.append(n_seasons)
            mean_points.append(tuple(standard / n_seasons))
            rosters_by_seat.append(draft.rosters)

    names = config.league.categories.names
    report = SimReport(
        schema_version=SCHEMA_VERSION,
        master_seed=master_seed,
        n_seasons=n_seasons,
        chi=config.league.chi,
        layout=layout,
        category_names=names,
        win_rate=tuple(win_rate),
        ci_halfwidth=tuple(ci),
        seasons_per_seat=tuple(seasons_per_seat),
        mean_standard_points=tuple(mean_points),
        punt_flags=(),
        rosters=tuple(rosters_by_seat),
    )
    return dataclasses.replace(report, punt_flags=detect_punts(report))


def detect_punts(report: SimReport, threshold: float = 1.5) -> Tuple[Tuple[str, ...], ...]:
    """Per seat, the categories whose mean standard points fall below the
    threshold (teams that strategically abandoned the category)."""
    flags = []
    for row in report.mean_standard_points:
        flags.append(
            tuple(
                name
                for name, points in zip(report.category_names, row)
                if points < threshold
            )
        )
    return tuple(flags)


# ---------------------------------------------------------------------------
# Synthetic player pool
# ---------------------------------------------------------------------------

def make_synthetic_pool(
    size: int = 200,
    seed: int = 0,
    categories: Optional[CategorySet] = None,
    low_ft_bigs: int = 8,
) -> Dict[str, PlayerProjection]:
    """Archetype-based player pool for desk-scale experiments.

    Includes a group of strong interior players with exceptionally poor
    free-throw shooting at high volume, the pattern that makes punting the
    category attractive.
    """
    cats = categories if categories is not None else CategorySet.default_nba()
    names = cats.names
    gen = np.random.default_rng(seed)
    pool: Dict[str, PlayerProjection] = {}

    def add(pid, quality, archetype):
        means = np.zeros(len(cats))
        volumes = np.zeros(len(cats))
        for i, cat in enumerate(cats):
            base = {
                "pts": 28.0, "reb": 11.0, "ast": 6.0, "stl": 2.0,
                "blk": 1.4, "3pm": 2.4, "to": 3.4, "fg%": 0.47, "ft%": 0.78,
            }.get(cat.name, 1.0)
            tilt = archetype.get(cat.name, 1.0)
            if cat.kind == "counting":
                level = base * quality * tilt * math.exp(gen.normal(0.0, 0.12))
                means[i] = max(level, 0.05)
            else:
                rate = base * tilt * math.exp(gen.normal(0.0, 0.04))
                means[i] = float(np.clip(rate, 0.05, 0.95))
                vol_base = 26.0 if cat.name == "fg%" else 9.0
                volumes[i] = max(vol_base * quality * archetype.get(f"{cat.name}_vol", 1.0)
                                 * math.exp(gen.normal(0.0, 0.15)), 0.5)
        pool[pid] = PlayerProjection(pid, pid.replace("_", " ").title(), tuple(means), tuple(volumes), (archetype["tag"],))

    big_punt = {"tag": "low-ft-big", "reb": 1.8, "blk": 2.6, "fg%": 1.25, "pts": 1.1,
                "ast": 0.4, "stl": 0.6, "3pm": 0.05, "ft%": 0.58, "ft%_vol": 1.4, "to": 1.1}
    guard = {"tag": "guard", "ast": 2.0, "stl": 1.5, "3pm": 1.7, "ft%": 1.1,
             "reb": 0.45, "blk": 0.2, "fg%": 0.95, "to": 1.05}
    wing = {"tag": "wing", "pts": 1.15, "3pm": 1.3, "reb": 0.8, "ast": 0.9,
            "stl": 1.1, "blk": 0.6, "ft%": 1.05}
    big = {"tag": "big", "reb": 1.7, "blk": 2.2, "fg%": 1.15, "ast": 0.5,
           "stl": 0.7, "3pm": 0.15, "ft%": 0.92}
    balanced = {"tag": "balanced"}

    idx = 0
    for j in range(low_ft_bigs):
        quality = 1.35 - 0.05 * j
        add(f"punt_big_{j:02d}", quality, big_punt)
        idx += 1
    archetypes = [guard, wing, big, balanced]
    remaining = size - low_ft_bigs
    for j in range(remaining):
        # smooth quality decline from stars to replacement level
        quality = 1.3 * (1.0 - j / max(remaining * 1.35, 1)) ** 1.1 + 0.12
        add(f"player_{idx:03d}", quality, archetypes[j % len(archetypes)])
        idx += 1
    return pool
