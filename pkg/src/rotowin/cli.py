"""Command-line entry points for the win-probability engine.

Every subcommand prints one JSON document to standard output (human
tables behind --pretty where one exists) and uses exit codes 0 for
success, 1 for validation problems, and 2 for runtime failures.
Diagnostics go to standard error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Dict, List, Optional, Sequence

import numpy as np

from .dataio import (
    ProjectionFormatError,
    RunStore,
    load_projections,
    write_report,
)
from .draft import (
    CategorySet,
    GScoreAgent,
    HScoreAgent,
    LeagueConfig,
    PlayerProjection,
    ScoringBasis,
    run_draft,
)
from .gradient import value_and_gradient
from .montecarlo import SeededRng, calibration_sweep
from .objective import LeagueShape, evaluate
from .seasonsim import ExperimentConfig, make_synthetic_pool, run_experiment
from .stats import MAX_ORDER_STATS_TABLE, UnsupportedLeagueSizeError, scenario_count

__all__ = ["main", "build_parser"]

STORE_ENV = "ROTOWIN_STORE"


# ---------------------------------------------------------------------------
# Shared argument groups
# ---------------------------------------------------------------------------

def _add_pool_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--projections", metavar="CSV", help="projection file to draft from")
    group.add_argument(
        "--synthetic",
        type=int,
        metavar="SIZE",
        help="generate an archetype pool of SIZE players instead of reading a file",
    )
    parser.add_argument(
        "--pool-seed", type=int, default=0, help="seed for --synthetic (default 0)"
    )


def _add_league_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--teams", type=int, default=12, help="league size K (default 12)")
    parser.add_argument("--roster", type=int, default=13, help="roster size (default 13)")
    parser.add_argument(
        "--chi", type=float, default=0.5, help="projection confidence in (0,1] (default 0.5)"
    )
    parser.add_argument(
        "--hseat",
        type=int,
        default=None,
        help="seat drafted by the objective-maximizing agent (default: none, all baseline)",
    )
    parser.add_argument("--width", type=int, default=40, help="candidate pre-filter width")
    parser.add_argument("--steps", type=int, default=200, help="future-pick optimizer steps")


def _load_pool(args: argparse.Namespace) -> Dict[str, PlayerProjection]:
    if args.projections is not None:
        return {p.player_id: p for p in load_projections(args.projections)}
    if args.synthetic < 1:
        raise ValueError("--synthetic must be at least 1")
    return make_synthetic_pool(size=args.synthetic, seed=args.pool_seed)


def _layout(args: argparse.Namespace) -> List[str]:
    layout = ["gscore"] * args.teams
    if args.hseat is not None:
        if not 0 <= args.hseat < args.teams:
            raise ValueError(f"--hseat must be in [0, {args.teams - 1}]")
        layout[args.hseat] = "hscore"
    return layout


# ---------------------------------------------------------------------------
# Subcommand handlers (each returns the JSON payload)
# ---------------------------------------------------------------------------

def _cmd_objective_eval(args: argparse.Namespace) -> dict:
    with open(args.state, encoding="utf-8") as fh:
        raw = json.load(fh)
    if "mu" not in raw:
        raise ValueError("state file must contain a 'mu' matrix")
    mu = np.asarray(raw["mu"], dtype=float)
    if mu.ndim != 2:
        raise ValueError("'mu' must be a categories x opponents matrix")
    c, o = mu.shape
    rho = np.asarray(raw["rho"], dtype=float) if "rho" in raw else np.eye(c)
    sigma_c = np.asarray(raw["sigma_c"], dtype=float) if "sigma_c" in raw else np.zeros(c)
    shape = LeagueShape(c, o, rho, sigma_c)
    breakdown = evaluate(mu, shape)
    payload = {"num_categories": c, "num_opponents": o}
    payload.update(breakdown.as_dict())
    return payload


def _cmd_gradient_check(args: argparse.Namespace) -> dict:
    if args.states < 1:
        raise ValueError("--states must be at least 1")
    r = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(args.states):
        mu = r.uniform(-2.0, 2.0, (args.categories, args.opponents))
        off = r.uniform(-0.2, 0.2, (args.categories, args.categories))
        off = 0.5 * (off + off.T)
        np.fill_diagonal(off, 0.0)
        rho = np.eye(args.categories) + off
        sigma_c = r.uniform(0.0, 1.5, args.categories)
        shape = LeagueShape(args.categories, args.opponents, rho, sigma_c)
        _, grad = value_and_gradient(mu, shape)
        for c in range(args.categories):
            for o in range(args.opponents):
                bumped = mu.copy()
                bumped[c, o] += args.step
                hi = evaluate(bumped, shape).v
                bumped[c, o] -= 2.0 * args.step
                lo = evaluate(bumped, shape).v
                fd = (hi - lo) / (2.0 * args.step)
                denom = max(abs(fd), args.floor)
                worst = max(worst, abs(grad[c, o] - fd) / denom)
    return {
        "states": args.states,
        "seed": args.seed,
        "step": args.step,
        "max_rel_error": worst,
    }


def _cmd_oracle_compare(args: argparse.Namespace) -> dict:
    if args.configs < 2:
        raise ValueError("--configs must be at least 2")
    if args.draws < 1:
        raise ValueError("--draws must be at least 1")
    report = calibration_sweep(
        n_configs=args.configs,
        draws=args.draws,
        rng=SeededRng(args.seed),
        num_categories=args.categories,
        num_opponents=args.opponents,
        workers=args.workers,
        heterogeneous=args.heterogeneous,
    )
    return report.as_dict()


def _render_oracle_table(payload: dict) -> str:
    lines = [
        f"configs={payload['n_configs']} draws={payload['draws']} "
        f"seed={payload['seed']} rank_correlation={payload['rank_correlation']:.4f}",
        f"{'config':>6} {'analytic_v':>12} {'mc_p_win':>12} {'mc_ci':>10}",
    ]
    for i, row in enumerate(payload["configs"]):
        lines.append(
            f"{i:>6} {row['analytic_v']:>12.6f} {row['mc_p_win']:>12.6f} "
            f"{row['mc_ci_halfwidth']:>10.6f}"
        )
    return "\n".join(lines)


def _cmd_draft_run(args: argparse.Namespace) -> dict:
    pool = _load_pool(args)
    cats = CategorySet.default_nba()
    config = LeagueConfig(args.teams, args.roster, cats, args.chi)
    basis = ScoringBasis.from_league(cats, args.teams, args.roster, args.chi)
    agents = []
    for kind in _layout(args):
        if kind == "hscore":
            agents.append(HScoreAgent(pool, basis, width=args.width, steps=args.steps))
        else:
            agents.append(GScoreAgent(pool, basis))
    final = run_draft(agents, sorted(pool), config)
    return {
        "teams": args.teams,
        "roster_size": args.roster,
        "chi": args.chi,
        "layout": _layout(args),
        "picks": list(final.picks),
        "rosters": [list(r) for r in final.rosters],
    }


def _cmd_simulate(args: argparse.Namespace) -> dict:
    pool = _load_pool(args)
    cats = CategorySet.default_nba()
    config = ExperimentConfig(
        league=LeagueConfig(args.teams, args.roster, cats, args.chi),
        hscore_width=args.width,
        hscore_steps=args.steps,
    )
    report = run_experiment(
        pool, _layout(args), config, args.seasons, args.seed, workers=args.workers
    )
    store = RunStore(args.store)
    run_id = write_report(report, store, run_id=args.run_id)
    return {"run_id": run_id, "store": str(store.root), "report": report.as_dict()}


def _cmd_table_max_stats(args: argparse.Namespace) -> dict:
    del args
    return {
        "rows": [
            {"n": row.n, "mev": row.mev, "ex2": row.ex2, "mvar": row.mvar}
            for row in MAX_ORDER_STATS_TABLE
        ]
    }


def _render_max_stats_table(payload: dict) -> str:
    lines = [f"{'n':>3} {'mev':>12} {'ex2':>12} {'mvar':>12}"]
    for row in payload["rows"]:
        lines.append(
            f"{row['n']:>3} {row['mev']:>12.9f} {row['ex2']:>12.9f} {row['mvar']:>12.9f}"
        )
    return "\n".join(lines)


def _cmd_scenario_count(args: argparse.Namespace) -> dict:
    count = scenario_count(args.teams, args.categories)
    return {
        "teams": args.teams,
        "categories": args.categories,
        "count": str(count),
        "digits": len(str(count)),
    }


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rotowin",
        description="Win-probability objective, draft agents, and season simulator.",
    )
    parser.add_argument(
        "--pretty", action="store_true", help="human-readable output instead of compact JSON"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    objective = sub.add_parser("objective", help="objective-function operations")
    objective_sub = objective.add_subparsers(dest="subcommand", required=True)
    obj_eval = objective_sub.add_parser(
        "eval", help="evaluate a matchup state file to a full breakdown"
    )
    obj_eval.add_argument(
        "--state",
        required=True,
        metavar="JSON",
        help="state file with 'mu' (and optional 'rho', 'sigma_c')",
    )
    obj_eval.set_defaults(func=_cmd_objective_eval)

    gradient = sub.add_parser("gradient", help="analytic-gradient operations")
    gradient_sub = gradient.add_subparsers(dest="subcommand", required=True)
    grad_check = gradient_sub.add_parser(
        "check", help="compare the analytic gradient with central differences"
    )
    grad_check.add_argument("--states", type=int, default=20, help="random states (default 20)")
    grad_check.add_argument("--seed", type=int, default=2024)
    grad_check.add_argument("--step", type=float, default=1e-4, help="finite-difference step")
    grad_check.add_argument(
        "--floor", type=float, default=1e-8, help="absolute floor for relative error"
    )
    grad_check.add_argument("--categories", type=int, default=9)
    grad_check.add_argument("--opponents", type=int, default=11)
    grad_check.set_defaults(func=_cmd_gradient_check)

    oracle = sub.add_parser("oracle", help="Monte Carlo oracle operations")
    oracle_sub = oracle.add_subparsers(dest="subcommand", required=True)
    compare = oracle_sub.add_parser(
        "compare", help="analytic win probability vs sampled truth over random configs"
    )
    compare.add_argument("--configs", type=int, default=50)
    compare.add_argument("--draws", type=int, default=200_000)
    compare.add_argument("--seed", type=int, default=2024)
    compare.add_argument("--workers", type=int, default=1)
    compare.add_argument("--categories", type=int, default=9)
    compare.add_argument("--opponents", type=int, default=11)
    compare.add_argument(
        "--heterogeneous",
        action="store_true",
        help="draw every matchup edge independently instead of per-category edges",
    )
    compare.set_defaults(func=_cmd_oracle_compare, render=_render_oracle_table)

    draft = sub.add_parser("draft", help="draft operations")
    draft_sub = draft.add_subparsers(dest="subcommand", required=True)
    draft_run = draft_sub.add_parser("run", help="run one complete snake draft")
    _add_pool_args(draft_run)
    _add_league_args(draft_run)
    draft_run.set_defaults(func=_cmd_draft_run)

    simulate = sub.add_parser(
        "simulate", help="draft-and-simulate experiment written to the run store"
    )
    _add_pool_args(simulate)
    _add_league_args(simulate)
    simulate.add_argument("--seasons", type=int, default=600)
    simulate.add_argument("--seed", type=int, default=0, help="master seed")
    simulate.add_argument("--workers", type=int, default=1)
    simulate.add_argument(
        "--store",
        default=os.environ.get(STORE_ENV, "runs"),
        help=f"run-store directory (default ${STORE_ENV} or ./runs)",
    )
    simulate.add_argument("--run-id", default=None, help="override the derived run id")
    simulate.set_defaults(func=_cmd_simulate)

    table = sub.add_parser("table", help="tabulated constants")
    table_sub = table.add_subparsers(dest="subcommand", required=True)
    max_stats = table_sub.add_parser(
        "max-stats", help="moments of the maximum of n standard Normals, n = 1..20"
    )
    max_stats.set_defaults(func=_cmd_table_max_stats, render=_render_max_stats_table)

    count = sub.add_parser("scenario-count", help="count synergy-relevant scenarios")
    count.add_argument("--teams", type=int, required=True)
    count.add_argument("--categories", type=int, required=True)
    count.set_defaults(func=_cmd_scenario_count)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse has already written its message; --help exits 0,
        # anything else is a validation failure
        return 0 if exc.code == 0 else 1
    try:
        payload = args.func(args)
    except (
        ValueError,
        ProjectionFormatError,
        UnsupportedLeagueSizeError,
        FileNotFoundError,
        FileExistsError,
        IsADirectoryError,
        PermissionError,
        json.JSONDecodeError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    render = getattr(args, "render", None)
    if args.pretty and render is not None:
        print(render(payload))
    else:
        print(json.dumps(payload, indent=2 if args.pretty else None, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
