"""HTTP JSON service holding live draft state.

Managers record picks as they happen and query win-probability-ranked
recommendations. Every draft carries a monotonically increasing version
and an append-only event log (undo is a compensating event), so replaying
the log always reproduces the state. Mutations are optimistic: writers
send the version they saw and conflicting writes are rejected with 409.

State lives in memory; when the app is created with a snapshot path,
every accepted mutation persists the full registry and a restart restores
it by replaying each draft's event log.
"""

from __future__ import annotations

import json
import threading
import uuid
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from fastapi import Body, FastAPI, HTTPException, Query

from .draft import (
    Category,
    CategorySet,
    DraftState,
    LeagueConfig,
    PlayerProjection,
    ScoringBasis,
    build_matchup_state,
    gscore_scores,
    validate_projection,
)
from .objective import evaluate
from .seasonsim import make_synthetic_pool
from .stats import UnsupportedLeagueSizeError, norm_cdf

__all__ = ["LiveDraft", "create_app", "app"]

DEFAULT_WIDTH = 10


class LiveDraft:
    """One draft room: immutable config and pool, append-only event log,
    and the materialized state the log folds to."""

    def __init__(
        self,
        draft_id: str,
        config: LeagueConfig,
        pool: Dict[str, PlayerProjection],
    ):
        self.draft_id = draft_id
        self.config = config
        self.pool = pool
        self.events: List[dict] = []
        self.state = DraftState.new(config, sorted(pool))

    @property
    def version(self) -> int:
        return len(self.events)

    def effective_picks(self) -> List[Tuple[int, str]]:
        picks: List[Tuple[int, str]] = []
        for event in self.events:
            if event["type"] == "pick":
                picks.append((event["seat"], event["player_id"]))
            else:
                picks.pop()
        return picks

    def rebuild(self) -> DraftState:
        state = DraftState.new(self.config, sorted(self.pool))
        for _, player_id in self.effective_picks():
            state = state.apply_pick(player_id)
        return state

    def apply(self, event: dict) -> None:
        self.events.append(event)
        if event["type"] == "pick":
            self.state = self.state.apply_pick(event["player_id"])
        else:
            self.state = self.rebuild()

    def basis(self) -> ScoringBasis:
        return ScoringBasis.from_league(
            self.config.categories,
            self.config.num_teams,
            self.config.roster_size,
            self.config.chi,
        )


# ---------------------------------------------------------------------------
# Request parsing (manual, so validation/conflict status codes stay exact)
# ---------------------------------------------------------------------------

def _bad(detail: str) -> HTTPException:
    return HTTPException(status_code=422, detail=detail)


def _parse_categories(raw) -> CategorySet:
    if raw is None:
        return CategorySet.default_nba()
    if not isinstance(raw, list) or not raw:
        raise _bad("categories must be a non-empty list")
    cats = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict) or "name" not in entry or "kind" not in entry:
            raise _bad(f"categories[{i}] needs 'name' and 'kind'")
        try:
            cats.append(
                Category(
                    str(entry["name"]),
                    str(entry["kind"]),
                    int(entry.get("direction", 1)),
                )
            )
        except ValueError as exc:
            raise _bad(f"categories[{i}]: {exc}") from None
    try:
        return CategorySet(tuple(cats))
    except ValueError as exc:
        raise _bad(str(exc)) from None


def _parse_pool(raw, categories: CategorySet) -> Dict[str, PlayerProjection]:
    if not isinstance(raw, dict):
        raise _bad("pool must be an object with 'players' or 'synthetic'")
    has_players = "players" in raw
    has_synthetic = "synthetic" in raw
    if has_players == has_synthetic:
        raise _bad("pool needs exactly one of 'players' or 'synthetic'")
    if has_synthetic:
        params = raw["synthetic"]
        if not isinstance(params, dict) or "size" not in params:
            raise _bad("pool.synthetic needs a 'size'")
        try:
            return make_synthetic_pool(
                size=int(params["size"]),
                seed=int(params.get("seed", 0)),
                categories=categories,
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise _bad(f"pool.synthetic unsupported: {exc}") from None
    players = raw["players"]
    if not isinstance(players, list) or not players:
        raise _bad("pool.players must be a non-empty list")
    pool: Dict[str, PlayerProjection] = {}
    for i, row in enumerate(players):
        if not isinstance(row, dict):
            raise _bad(f"pool.players[{i}] must be an object")
        try:
            proj = PlayerProjection(
                player_id=str(row["player_id"]),
                player_name=str(row.get("player_name", row["player_id"])),
                means=tuple(float(x) for x in row["means"]),
                volumes=tuple(float(x) for x in row["volumes"]),
                tags=tuple(str(t) for t in row.get("tags", ())),
            )
            validate_projection(proj, categories)
        except (KeyError, TypeError, ValueError) as exc:
            raise _bad(f"pool.players[{i}]: {exc}") from None
        if proj.player_id in pool:
            raise _bad(f"pool.players[{i}]: duplicate player id {proj.player_id!r}")
        pool[proj.player_id] = proj
    return pool


def _parse_league(payload: dict) -> Tuple[LeagueConfig, Dict[str, PlayerProjection]]:
    for field in ("num_teams", "roster_size", "chi", "pool"):
        if field not in payload:
            raise _bad(f"missing field {field!r}")
    categories = _parse_categories(payload.get("categories"))
    try:
        config = LeagueConfig(
            num_teams=int(payload["num_teams"]),
            roster_size=int(payload["roster_size"]),
            categories=categories,
            chi=float(payload["chi"]),
        )
    except (UnsupportedLeagueSizeError, ValueError, TypeError) as exc:
        raise _bad(str(exc)) from None
    pool = _parse_pool(payload["pool"], categories)
    if len(pool) < config.total_picks:
        raise _bad(
            f"pool of {len(pool)} cannot fill {config.total_picks} roster slots"
        )
    return config, pool


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _board_payload(draft: LiveDraft) -> dict:
    state = draft.state
    return {
        "draft_id": draft.draft_id,
        "version": draft.version,
        "num_teams": draft.config.num_teams,
        "roster_size": draft.config.roster_size,
        "chi": draft.config.chi,
        "categories": list(draft.config.categories.names),
        "complete": state.is_complete,
        "current_seat": None if state.is_complete else state.current_seat,
        "round": state.round,
        "picks": [
            {"seat": seat, "player_id": player_id}
            for seat, player_id in draft.effective_picks()
        ],
        "rosters": [list(r) for r in state.rosters],
        "remaining": list(state.remaining),
        "players": {pid: p.player_name for pid, p in sorted(draft.pool.items())},
    }


def _state_document(ms) -> dict:
    return {
        "mu": ms.mu.tolist(),
        "rho": ms.shape.rho.tolist(),
        "sigma_c": ms.shape.sigma_c.tolist(),
    }


def _seat_summary(draft: LiveDraft, seat: int, include_state: bool) -> dict:
    state = draft.state
    opponents = [list(r) for s, r in enumerate(state.rosters) if s != seat]
    ms = build_matchup_state(
        list(state.rosters[seat]), opponents, draft.pool, draft.basis()
    )
    breakdown = evaluate(ms.mu, ms.shape)
    names = draft.config.categories.names
    summary = {
        "seat": seat,
        "v": breakdown.v,
        "mu_D": breakdown.mu_D,
        "category_win_probabilities": {
            name: float(np.mean(norm_cdf(ms.mu[c]))) for c, name in enumerate(names)
        },
    }
    if include_state:
        summary["state"] = _state_document(ms)
    return summary


def _recommendations_payload(
    draft: LiveDraft, seat: int, width: int, include_state: bool
) -> dict:
    state = draft.state
    basis = draft.basis()
    remaining = list(state.remaining)
    ranked, _, _ = gscore_scores(remaining, draft.pool, basis)
    candidates = ranked[: min(width, len(ranked))]
    baseline_id = ranked[0]
    my_roster = list(state.rosters[seat])
    opponents = [list(r) for s, r in enumerate(state.rosters) if s != seat]
    names = draft.config.categories.names

    rows = []
    v_by_id: Dict[str, float] = {}
    for candidate in candidates:
        ms = build_matchup_state(my_roster + [candidate], opponents, draft.pool, basis)
        breakdown = evaluate(ms.mu, ms.shape)
        v_by_id[candidate] = breakdown.v
        row = {
            "player_id": candidate,
            "player_name": draft.pool[candidate].player_name,
            "v": breakdown.v,
            "category_win_probabilities": {
                name: float(np.mean(norm_cdf(ms.mu[c])))
                for c, name in enumerate(names)
            },
        }
        if include_state:
            row["state"] = _state_document(ms)
        rows.append(row)

    baseline_v = v_by_id[baseline_id]
    for row in rows:
        row["delta_v"] = row["v"] - baseline_v
    rows.sort(key=lambda r: (-r["v"], r["player_id"]))
    return {
        "draft_id": draft.draft_id,
        "version": draft.version,
        "seat": seat,
        "width": width,
        "baseline_player_id": baseline_id,
        "recommendations": rows,
    }


# ---------------------------------------------------------------------------
# Snapshots
# ---------------------------------------------------------------------------

def _snapshot_payload(drafts: Dict[str, LiveDraft]) -> dict:
    out = {}
    for draft_id, draft in sorted(drafts.items()):
        cats = [
            {"name": c.name, "kind": c.kind, "direction": c.direction}
            for c in draft.config.categories
        ]
        out[draft_id] = {
            "config": {
                "num_teams": draft.config.num_teams,
                "roster_size": draft.config.roster_size,
                "chi": draft.config.chi,
                "categories": cats,
            },
            "pool": [
                {
                    "player_id": p.player_id,
                    "player_name": p.player_name,
                    "means": list(p.means),
                    "volumes": list(p.volumes),
                    "tags": list(p.tags),
                }
                for _, p in sorted(draft.pool.items())
            ],
            "events": draft.events,
        }
    return {"drafts": out}


def _restore_drafts(payload: dict) -> Dict[str, LiveDraft]:
    drafts: Dict[str, LiveDraft] = {}
    for draft_id, entry in payload.get("drafts", {}).items():
        raw = entry["config"]
        categories = CategorySet(
            tuple(
                Category(c["name"], c["kind"], c["direction"])
                for c in raw["categories"]
            )
        )
        config = LeagueConfig(
            num_teams=raw["num_teams"],
            roster_size=raw["roster_size"],
            categories=categories,
            chi=raw["chi"],
        )
        pool = {
            p["player_id"]: PlayerProjection(
                p["player_id"],
                p["player_name"],
                tuple(p["means"]),
                tuple(p["volumes"]),
                tuple(p.get("tags", ())),
            )
            for p in entry["pool"]
        }
        draft = LiveDraft(draft_id, config, pool)
        for event in entry["events"]:
            draft.apply(event)
        drafts[draft_id] = draft
    return drafts


# ---------------------------------------------------------------------------
# Application
# ---------------------------------------------------------------------------

def create_app(snapshot_path: Optional[Union[str, Path]] = None) -> FastAPI:
    app = FastAPI(title="rotowin draft assistant")
    app.state.lock = threading.Lock()
    app.state.snapshot_path = Path(snapshot_path) if snapshot_path else None
    if app.state.snapshot_path is not None and app.state.snapshot_path.is_file():
        payload = json.loads(app.state.snapshot_path.read_text(encoding="utf-8"))
        app.state.drafts = _restore_drafts(payload)
    else:
        app.state.drafts = {}

    def save_snapshot() -> None:
        path = app.state.snapshot_path
        if path is None:
            return
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(
            json.dumps(_snapshot_payload(app.state.drafts), sort_keys=True),
            encoding="utf-8",
        )
        tmp.replace(path)

    def get_draft(draft_id: str) -> LiveDraft:
        draft = app.state.drafts.get(draft_id)
        if draft is None:
            raise HTTPException(status_code=404, detail=f"unknown draft {draft_id!r}")
        return draft

    @app.post("/leagues", status_code=201)
    def create_league(payload: dict = Body(...)):
        config, pool = _parse_league(payload)
        with app.state.lock:
            draft_id = uuid.uuid4().hex[:12]
            while draft_id in app.state.drafts:
                draft_id = uuid.uuid4().hex[:12]
            app.state.drafts[draft_id] = LiveDraft(draft_id, config, pool)
            save_snapshot()
        return {"draft_id": draft_id, "version": 0}

    @app.get("/leagues/{draft_id}")
    def get_board(
        draft_id: str,
        seat: Optional[int] = Query(default=None),
        include_state: bool = Query(default=False),
    ):
        draft = get_draft(draft_id)
        payload = _board_payload(draft)
        if seat is not None:
            if not 0 <= seat < draft.config.num_teams:
                raise _bad(f"seat must be in [0, {draft.config.num_teams - 1}]")
            payload["seat_summary"] = _seat_summary(draft, seat, include_state)
        return payload

    @app.post("/leagues/{draft_id}/picks")
    def record_pick(draft_id: str, payload: dict = Body(...)):
        for field in ("expected_version", "seat", "player_id"):
            if field not in payload:
                raise _bad(f"missing field {field!r}")
        try:
            expected = int(payload["expected_version"])
            seat = int(payload["seat"])
        except (TypeError, ValueError):
            raise _bad("expected_version and seat must be integers") from None
        player_id = str(payload["player_id"])
        draft = get_draft(draft_id)
        with app.state.lock:
            if expected != draft.version:
                raise HTTPException(
                    status_code=409,
                    detail=(
                        f"version conflict: expected {expected}, "
                        f"current {draft.version}"
                    ),
                )
            if draft.state.is_complete:
                raise _bad("draft is complete")
            if seat != draft.state.current_seat:
                raise _bad(
                    f"seat {seat} is not on the clock "
                    f"(current seat {draft.state.current_seat})"
                )
            if player_id not in draft.state.remaining:
                raise _bad(f"player {player_id!r} is not available")
            draft.apply({"type": "pick", "seat": seat, "player_id": player_id})
            save_snapshot()
            return {"draft_id": draft_id, "version": draft.version}

    @app.delete("/leagues/{draft_id}/picks/last")
    def undo_last_pick(draft_id: str):
        draft = get_draft(draft_id)
        with app.state.lock:
            if not draft.effective_picks():
                raise _bad("no picks to undo")
            draft.apply({"type": "undo"})
            save_snapshot()
            return {"draft_id": draft_id, "version": draft.version}

    @app.get("/leagues/{draft_id}/recommendations")
    def recommendations(
        draft_id: str,
        seat: int = Query(...),
        width: int = Query(default=DEFAULT_WIDTH),
        include_state: bool = Query(default=False),
    ):
        draft = get_draft(draft_id)
        if not 0 <= seat < draft.config.num_teams:
            raise _bad(f"seat must be in [0, {draft.config.num_teams - 1}]")
        if width < 1:
            raise _bad("width must be at least 1")
        if draft.state.is_complete:
            raise _bad("draft is complete")
        if len(draft.state.rosters[seat]) >= draft.config.roster_size:
            raise _bad(f"seat {seat} roster is already full")
        return _recommendations_payload(draft, seat, width, include_state)

    return app


app = create_app()
