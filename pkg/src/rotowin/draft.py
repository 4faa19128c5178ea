"""Draft engine: matchup-state construction from rosters and projections,
a standardized-score baseline ranker, an objective-maximizing picker, and a
snake-draft runner.

Conventions used throughout:
  - Player stats are weekly means. Counting categories aggregate by sum;
    percentage categories aggregate as volume-weighted rates.
  - Matchup edges are direction-adjusted (a negative category like
    turnovers is negated), so larger is always better once inside the
    objective.
  - Season-total spread per category comes from a ScoringBasis, whose
    variance equals the week-to-week team variance scaled by the
    projection-confidence scalar chi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .gradient import value_and_gradient
from .objective import LeagueShape, evaluate
from .stats import UnsupportedLeagueSizeError

__all__ = [
    "Category",
    "CategorySet",
    "PlayerProjection",
    "ScoringBasis",
    "LeagueConfig",
    "DraftState",
    "MatchupState",
    "build_matchup_state",
    "gscore_rank",
    "gscore_scores",
    "hscore_pick",
    "run_draft",
    "GScoreAgent",
    "HScoreAgent",
]

COUNTING = "counting"
PERCENTAGE = "percentage"

#: weekly team-level spread scales; per-category sigma is tau_m * roster
#: size for counting stats and tau_r / roster size for percentage stats;
#: defaults give a 13-man team roughly a 7% weekly swing in counting
#: totals and a 9-point swing in team percentages
DEFAULT_TAU_M = 2.0
DEFAULT_TAU_R = 1.2


@dataclass(frozen=True)
class Category:
    name: str
    kind: str                 # "counting" or "percentage"
    direction: int = 1        # -1 when smaller raw values are better

    def __post_init__(self):
        if self.kind not in (COUNTING, PERCENTAGE):
            raise ValueError(f"unknown category kind {self.kind!r}")
        if self.direction not in (1, -1):
            raise ValueError(f"direction must be +1 or -1, got {self.direction}")


@dataclass(frozen=True)
class CategorySet:
    categories: Tuple[Category, ...]

    def __post_init__(self):
        if not self.categories:
            raise ValueError("need at least one category")
        names = [c.name for c in self.categories]
        if len(set(names)) != len(names):
            raise ValueError("duplicate category names")
        object.__setattr__(self, "categories", tuple(self.categories))

    def __len__(self) -> int:
        return len(self.categories)

    def __iter__(self):
        return iter(self.categories)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(c.name for c in self.categories)

    @property
    def directions(self) -> np.ndarray:
        return np.array([c.direction for c in self.categories], dtype=float)

    @property
    def percentage_mask(self) -> np.ndarray:
        return np.array([c.kind == PERCENTAGE for c in self.categories])

    def index(self, name: str) -> int:
        return self.names.index(name)

    @classmethod
    def default_nba(cls) -> "CategorySet":
        """Nine-category set: six positive counting stats, turnovers
        negative, and two percentage stats."""
        return cls(
            (
                Category("pts", COUNTING),
                Category("reb", COUNTING),
                Category("ast", COUNTING),
                Category("stl", COUNTING),
                Category("blk", COUNTING),
                Category("3pm", COUNTING),
                Category("to", COUNTING, direction=-1),
                Category("fg%", PERCENTAGE),
                Category("ft%", PERCENTAGE),
            )
        )


@dataclass(frozen=True)
class PlayerProjection:
    """Weekly projection aligned to a CategorySet: means holds the weekly
    mean for counting categories and the success rate for percentage
    categories; volumes holds weekly attempts for percentage categories
    (zero elsewhere)."""

    player_id: str
    player_name: str
    means: Tuple[float, ...]
    volumes: Tuple[float, ...]
    tags: Tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.means) != len(self.volumes):
            raise ValueError("means and volumes must have equal length")
        object.__setattr__(self, "means", tuple(float(x) for x in self.means))
        object.__setattr__(self, "volumes", tuple(float(x) for x in self.volumes))
        object.__setattr__(self, "tags", tuple(self.tags))


def validate_projection(proj: PlayerProjection, categories: CategorySet) -> None:
    if len(proj.means) != len(categories):
        raise ValueError(
            f"player {proj.player_id}: expected {len(categories)} categories, got {len(proj.means)}"
        )
    for i, cat in enumerate(categories):
        if not math.isfinite(proj.means[i]) or not math.isfinite(proj.volumes[i]):
            raise ValueError(f"player {proj.player_id}: non-finite value in {cat.name}")
        if cat.kind == PERCENTAGE:
            if not 0.0 <= proj.means[i] <= 1.0:
                raise ValueError(
                    f"player {proj.player_id}: rate {proj.means[i]} outside [0, 1] in {cat.name}"
                )
            if proj.volumes[i] < 0.0:
                raise ValueError(
                    f"player {proj.player_id}: negative volume in {cat.name}"
                )


@dataclass(frozen=True)
class ScoringBasis:
    """Season-total per-category spread in category units, with the league
    context the normalization needs. Season variance equals week-to-week
    team variance scaled by chi."""

    categories: CategorySet
    sigma_season: Tuple[float, ...]
    num_teams: int
    roster_size: int

    def __post_init__(self):
        if len(self.sigma_season) != len(self.categories):
            raise ValueError("sigma_season length must match categories")
        if any(not (s > 0.0) or not math.isfinite(s) for s in self.sigma_season):
            raise ValueError("all season sigmas must be positive and finite")
        if self.num_teams < 2:
            raise ValueError("need at least 2 teams")
        if self.roster_size < 1:
            raise ValueError("roster size must be >= 1")
        object.__setattr__(self, "sigma_season", tuple(float(s) for s in self.sigma_season))

    @property
    def sigma_array(self) -> np.ndarray:
        return np.array(self.sigma_season)

    @classmethod
    def from_league(
        cls,
        categories: CategorySet,
        num_teams: int,
        roster_size: int,
        chi: float,
        tau_m: float = DEFAULT_TAU_M,
        tau_r: float = DEFAULT_TAU_R,
    ) -> "ScoringBasis":
        if not 0.0 < chi <= 1.0:
            raise ValueError(f"chi must be in (0, 1], got {chi}")
        if tau_m <= 0.0 or tau_r <= 0.0:
            raise ValueError("tau scales must be positive")
        weekly = np.where(
            categories.percentage_mask,
            tau_r / roster_size,
            tau_m * roster_size,
        )
        season = weekly * math.sqrt(chi)
        return cls(
            categories=categories,
            sigma_season=tuple(season),
            num_teams=num_teams,
            roster_size=roster_size,
        )


@dataclass(frozen=True)
class LeagueConfig:
    num_teams: int
    roster_size: int
    categories: CategorySet
    chi: float

    def __post_init__(self):
        if self.num_teams < 2:
            raise ValueError("need at least 2 teams")
        if self.num_teams > 21:
            raise UnsupportedLeagueSizeError(
                f"{self.num_teams} teams means {self.num_teams - 1} opponents; "
                "the max-statistics table stops at 20"
            )
        if self.roster_size < 1:
            raise ValueError("roster size must be >= 1")
        if not 0.0 < self.chi <= 1.0:
            raise ValueError(f"chi must be in (0, 1], got {self.chi}")

    @property
    def total_picks(self) -> int:
        return self.num_teams * self.roster_size


@dataclass(frozen=True)
class DraftState:
    """Immutable snake-draft position; apply_pick returns the successor."""

    config: LeagueConfig
    seat_order: Tuple[int, ...]
    rosters: Tuple[Tuple[str, ...], ...]
    remaining: Tuple[str, ...]
    picks: Tuple[str, ...] = ()

    def __post_init__(self):
        k = self.config.num_teams
        if sorted(self.seat_order) != list(range(k)):
            raise ValueError("seat_order must be a permutation of the seats")
        if len(self.rosters) != k:
            raise ValueError("one roster per team required")
        drafted = [p for roster in self.rosters for p in roster]
        if len(set(drafted)) != len(drafted):
            raise ValueError("a player appears on two rosters")
        if set(drafted) & set(self.remaining):
            raise ValueError("drafted player still listed in the pool")
        if len(drafted) != len(self.picks):
            raise ValueError("rosters inconsistent with pick sequence")

    @classmethod
    def new(
        cls,
        config: LeagueConfig,
        pool: Sequence[str],
        seat_order: Optional[Sequence[int]] = None,
    ) -> "DraftState":
        ids = tuple(pool)
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate player ids in pool")
        if len(ids) < config.total_picks:
            raise ValueError(
                f"pool of {len(ids)} cannot fill {config.total_picks} roster slots"
            )
        order = tuple(seat_order) if seat_order is not None else tuple(range(config.num_teams))
        return cls(
            config=config,
            seat_order=order,
            rosters=tuple(() for _ in range(config.num_teams)),
            remaining=ids,
        )

    @property
    def pick_number(self) -> int:
        return len(self.picks)

    @property
    def round(self) -> int:
        return self.pick_number // self.config.num_teams

    @property
    def is_complete(self) -> bool:
        return self.pick_number >= self.config.total_picks

    def seat_for_pick(self, pick_number: int) -> int:
        k = self.config.num_teams
        rnd, idx = divmod(pick_number, k)
        if rnd % 2 == 1:
            idx = k - 1 - idx
        return self.seat_order[idx]

    @property
    def current_seat(self) -> int:
        if self.is_complete:
            raise ValueError("draft is complete")
        return self.seat_for_pick(self.pick_number)

    def apply_pick(self, player_id: str) -> "DraftState":
        seat = self.current_seat
        if player_id not in self.remaining:
            raise ValueError(f"player {player_id!r} is not available")
        rosters = list(self.rosters)
        rosters[seat] = rosters[seat] + (player_id,)
        return DraftState(
            config=self.config,
            seat_order=self.seat_order,
            rosters=tuple(rosters),
            remaining=tuple(p for p in self.remaining if p != player_id),
            picks=self.picks + (player_id,),
        )


# ---------------------------------------------------------------------------
# Roster aggregation
# ---------------------------------------------------------------------------

class _ProjectionTable:
    """Array view over a projection mapping for vectorized aggregation."""

    def __init__(self, projections: Mapping[str, PlayerProjection], categories: CategorySet):
        self.categories = categories
        self.ids = tuple(projections.keys())
        self.row = {pid: i for i, pid in enumerate(self.ids)}
        n, c = len(self.ids), len(categories)
        self.means = np.zeros((n, c))
        self.volumes = np.zeros((n, c))
        for i, pid in enumerate(self.ids):
            proj = projections[pid]
            self.means[i] = proj.means
            self.volumes[i] = proj.volumes

    def rows(self, ids: Iterable[str]) -> np.ndarray:
        try:
            return np.array([self.row[p] for p in ids], dtype=int)
        except KeyError as exc:
            raise ValueError(f"unknown player id {exc.args[0]!r}") from None


def _phantom_row(table: _ProjectionTable, undrafted_rows: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Replacement-level stand-in: per-category medians of the undrafted
    pool (falling back to the whole table when nothing is undrafted)."""
    if undrafted_rows.size == 0:
        means, volumes = table.means, table.volumes
    else:
        means = table.means[undrafted_rows]
        volumes = table.volumes[undrafted_rows]
    return np.median(means, axis=0), np.median(volumes, axis=0)


def _team_totals(
    roster_rows: np.ndarray,
    table: _ProjectionTable,
    roster_size: int,
    phantom: Tuple[np.ndarray, np.ndarray],
) -> np.ndarray:
    """Per-category team totals on the weekly scale: sums for counting
    categories, volume-weighted rates for percentage categories. Short
    rosters are padded to roster_size with the phantom."""
    pad = roster_size - len(roster_rows)
    if pad < 0:
        raise ValueError("roster larger than the configured roster size")
    means = table.means[roster_rows]
    volumes = table.volumes[roster_rows]
    if pad:
        means = np.vstack([means, np.tile(phantom[0], (pad, 1))])
        volumes = np.vstack([volumes, np.tile(phantom[1], (pad, 1))])
    pct = table.categories.percentage_mask
    totals = means.sum(axis=0)
    if pct.any():
        vol = volumes[:, pct].sum(axis=0)
        weighted = (means[:, pct] * volumes[:, pct]).sum(axis=0)
        with np.errstate(invalid="ignore"):
            rates = np.where(vol > 0.0, weighted / np.where(vol > 0.0, vol, 1.0), 0.0)
        totals[pct] = rates
    return totals


@dataclass(frozen=True)
class MatchupState:
    """Direction-adjusted matchup edges plus the league shape that goes
    with them; mu rows are categories, columns opponents."""

    mu: np.ndarray
    shape: LeagueShape


def build_matchup_state(
    drafter_roster: Sequence[str],
    opponent_rosters: Sequence[Sequence[str]],
    projections: Mapping[str, PlayerProjection],
    basis: ScoringBasis,
    rho: Optional[np.ndarray] = None,
) -> MatchupState:
    """Normalized matchup matrix for a drafter against specific opponents.

    mu[c, o] is the direction-adjusted expected differential of team
    category totals divided by sqrt(2) times the season sigma; sigma_c is
    sqrt(2) times the empirical spread of the opponents' normalized means
    (unit fallback when fewer than two opponent rosters are
    distinguishable). Incomplete rosters are padded with a
    replacement-level phantom so totals stay on the full-roster scale.
    """
    if len(opponent_rosters) == 0:
        raise ValueError("need at least one opponent roster")
    table = _ProjectionTable(projections, basis.categories)
    my_rows = table.rows(drafter_roster)
    opp_rows = [table.rows(r) for r in opponent_rosters]

    rostered = set(drafter_roster)
    for r in opponent_rosters:
        rostered.update(r)
    undrafted = np.array(
        [i for pid, i in table.row.items() if pid not in rostered], dtype=int
    )
    phantom = _phantom_row(table, undrafted)

    my_totals = _team_totals(my_rows, table, basis.roster_size, phantom)
    opp_totals = np.vstack(
        [_team_totals(rows, table, basis.roster_size, phantom) for rows in opp_rows]
    )

    directions = basis.categories.directions
    sigma = basis.sigma_array
    denom = math.sqrt(2.0) * sigma
    mu = (directions[:, None] * (my_totals[:, None] - opp_totals.T)) / denom[:, None]

    distinct = {tuple(sorted(r)) for r in opponent_rosters}
    if len(distinct) < 2:
        sigma_c = np.ones(len(basis.categories))
    else:
        normalized = opp_totals / (math.sqrt(2.0) * sigma[None, :])
        sigma_c = math.sqrt(2.0) * normalized.std(axis=0, ddof=1)

    shape = LeagueShape(
        num_categories=len(basis.categories),
        num_opponents=len(opponent_rosters),
        rho=np.eye(len(basis.categories)) if rho is None else rho,
        sigma_c=sigma_c,
    )
    return MatchupState(mu=mu, shape=shape)


# ---------------------------------------------------------------------------
# Baseline ranking
# ---------------------------------------------------------------------------

def _signals(table: _ProjectionTable, rows: np.ndarray, reference_rows: np.ndarray) -> np.ndarray:
    """Direction-adjusted per-category signals: raw weekly means for
    counting categories, volume-weighted rate deviation from the reference
    pool for percentage categories."""
    cats = table.categories
    means = table.means[rows]
    signals = means.copy()
    pct = cats.percentage_mask
    if pct.any():
        ref_vol = table.volumes[reference_rows][:, pct]
        ref_rate = table.means[reference_rows][:, pct]
        total_vol = ref_vol.sum(axis=0)
        league_rate = np.where(
            total_vol > 0.0,
            (ref_rate * ref_vol).sum(axis=0) / np.where(total_vol > 0.0, total_vol, 1.0),
            0.0,
        )
        mean_vol = ref_vol.mean(axis=0)
        weight = table.volumes[rows][:, pct] / np.where(mean_vol > 0.0, mean_vol, 1.0)
        signals[:, pct] = weight * (means[:, pct] - league_rate[None, :])
    return signals * cats.directions[None, :]


def _score_against(
    table: _ProjectionTable,
    rows: np.ndarray,
    reference_rows: np.ndarray,
    basis: ScoringBasis,
) -> Tuple[np.ndarray, np.ndarray]:
    """Standardized category scores of `rows` against reference statistics;
    also returns the per-category combined scale used as denominator."""
    signals = _signals(table, rows, reference_rows)
    ref_signals = _signals(table, reference_rows, reference_rows)
    center = ref_signals.mean(axis=0)
    spread2 = ref_signals.var(axis=0)
    pct = table.categories.percentage_mask
    slot = np.where(
        pct,
        basis.sigma_array * math.sqrt(basis.roster_size),
        basis.sigma_array / math.sqrt(basis.roster_size),
    )
    scale = np.sqrt(spread2 + slot**2)
    return (signals - center[None, :]) / scale[None, :], scale


def gscore_scores(
    pool: Sequence[str],
    projections: Mapping[str, PlayerProjection],
    basis: ScoringBasis,
) -> Tuple[List[str], Dict[str, float], np.ndarray]:
    """Ordered ids, their scores, and the per-category combined scale.

    Two passes: a provisional ranking over the whole pool selects the
    draftable set Q (top num_teams * roster_size), then final scores are
    standardized against Q only.
    """
    if len(pool) == 0:
        raise ValueError("pool is empty")
    table = _ProjectionTable(projections, basis.categories)
    rows = table.rows(pool)

    provisional, _ = _score_against(table, rows, rows, basis)
    totals = provisional.sum(axis=1)
    order = sorted(range(len(pool)), key=lambda i: (-totals[i], pool[i]))
    q_size = min(basis.num_teams * basis.roster_size, len(pool))
    q_rows = rows[np.array(order[:q_size], dtype=int)]

    final, scale = _score_against(table, rows, q_rows, basis)
    final_totals = final.sum(axis=1)
    ranked = sorted(range(len(pool)), key=lambda i: (-final_totals[i], pool[i]))
    ordered_ids = [pool[i] for i in ranked]
    return ordered_ids, {pool[i]: float(final_totals[i]) for i in range(len(pool))}, scale


def gscore_rank(
    pool: Sequence[str],
    projections: Mapping[str, PlayerProjection],
    basis: ScoringBasis,
) -> List[str]:
    """Deterministic total order of the pool by standardized weekly
    production, best first; ties broken by player id."""
    ordered, _, _ = gscore_scores(pool, projections, basis)
    return ordered


# ---------------------------------------------------------------------------
# Objective-maximizing pick
# ---------------------------------------------------------------------------

def _optimize_future(
    mu0: np.ndarray,
    shape: LeagueShape,
    transfer: np.ndarray,
    budget: float,
    steps: int,
    step_size: float,
    grad_tol: float,
) -> float:
    """Best objective value reachable by spreading a norm-bounded
    future-pick allocation across categories.

    The allocation u (one entry per category, nonnegative, ||u|| <= budget)
    is in standardized player-value units; transfer converts one unit of u
    to matchup-edge units. Projected gradient ascent with fixed step size.
    """
    if budget <= 0.0:
        return evaluate(mu0, shape).v
    u = np.zeros(mu0.shape[0])
    for _ in range(steps):
        _, grad = value_and_gradient(mu0 + (transfer * u)[:, None], shape)
        g_u = transfer * grad.sum(axis=1)
        if float(np.linalg.norm(g_u)) < grad_tol:
            break
        u = np.clip(u + step_size * g_u, 0.0, None)
        norm = float(np.linalg.norm(u))
        if norm > budget:
            u *= budget / norm
    return evaluate(mu0 + (transfer * u)[:, None], shape).v


def hscore_pick(
    draft_state: DraftState,
    projections: Mapping[str, PlayerProjection],
    basis: ScoringBasis,
    width: int = 40,
    steps: int = 200,
    step_size: float = 0.05,
    grad_tol: float = 1e-6,
) -> str:
    """Pick the available player maximizing the objective for the seat on
    the clock, with remaining picks modeled as one optimized allocation."""
    if draft_state.is_complete:
        raise ValueError("draft is complete")
    if not draft_state.remaining:
        raise ValueError("no candidates available")
    seat = draft_state.current_seat
    my_roster = draft_state.rosters[seat]
    opponents = [r for s, r in enumerate(draft_state.rosters) if s != seat]

    ranked, score_by_id, scale = gscore_scores(
        list(draft_state.remaining), projections, basis
    )
    candidates = ranked[: min(width, len(ranked))]
    # future picks are budgeted at the best score that can still be on the
    # board after this pick, shared across candidates for comparability
    budget_ref = ranked[1] if len(ranked) > 1 else ranked[0]
    per_pick = max(score_by_id[budget_ref], 0.0)
    remaining_picks = basis.roster_size - len(my_roster) - 1

    # one standardized unit of production moves the matchup edge by the
    # category's combined scale over sqrt(2) season sigma
    transfer = scale / (math.sqrt(2.0) * basis.sigma_array)

    best_id, best_v = None, -math.inf
    for cand in candidates:
        ms = build_matchup_state(
            list(my_roster) + [cand], opponents, projections, basis
        )
        v = _optimize_future(
            ms.mu,
            ms.shape,
            transfer,
            budget=per_pick * max(remaining_picks, 0),
            steps=steps,
            step_size=step_size,
            grad_tol=grad_tol,
        )
        if v > best_v:
            best_id, best_v = cand, v
    assert best_id is not None
    return best_id


# ---------------------------------------------------------------------------
# Agents and the draft loop
# ---------------------------------------------------------------------------

class GScoreAgent:
    """Always takes the top of the standardized-score ranking."""

    def __init__(self, projections: Mapping[str, PlayerProjection], basis: ScoringBasis):
        self.projections = projections
        self.basis = basis

    def pick(self, state: DraftState) -> str:
        return gscore_rank(list(state.remaining), self.projections, self.basis)[0]


class HScoreAgent:
    """Maximizes the analytic win probability at every pick."""

    def __init__(
        self,
        projections: Mapping[str, PlayerProjection],
        basis: ScoringBasis,
        width: int = 40,
        steps: int = 200,
        step_size: float = 0.05,
        grad_tol: float = 1e-6,
    ):
        self.projections = projections
        self.basis = basis
        self.width = width
        self.steps = steps
        self.step_size = step_size
        self.grad_tol = grad_tol

    def pick(self, state: DraftState) -> str:
        return hscore_pick(
            state,
            self.projections,
            self.basis,
            width=self.width,
            steps=self.steps,
            step_size=self.step_size,
            grad_tol=self.grad_tol,
        )


def run_draft(
    agents: Sequence,
    pool: Sequence[str],
    config: LeagueConfig,
    rng=None,
) -> DraftState:
    """Run a complete snake draft: seats pick in order 0..K-1 then
    reversed, repeating, until every roster holds roster_size players."""
    if len(agents) != config.num_teams:
        raise ValueError("need exactly one agent per seat")
    state = DraftState.new(config, pool)
    while not state.is_complete:
        agent = agents[state.current_seat]
        state = state.apply_pick(agent.pick(state))
    return state
