"""Projection-file ingestion and the append-only run store.

Projection CSV layout: player_id, player_name, one column per counting
category holding the weekly mean, and per percentage category a
(rate, volume) column pair named `<cat>` and `<cat>_vol`. All files are
UTF-8 and use '.' as the decimal separator regardless of locale.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from .draft import CategorySet, PERCENTAGE, PlayerProjection, validate_projection
from .seasonsim import SCHEMA_VERSION, SimReport

__all__ = [
    "ProjectionFormatError",
    "RunStore",
    "expected_header",
    "league_rates",
    "load_projections",
    "read_report",
    "save_projections",
    "write_report",
]


class ProjectionFormatError(ValueError):
    """Malformed projection file; message carries the offending line."""


def expected_header(categories: CategorySet) -> List[str]:
    header = ["player_id", "player_name"]
    for cat in categories:
        header.append(cat.name)
        if cat.kind == PERCENTAGE:
            header.append(f"{cat.name}_vol")
    return header


def _parse_row(row: List[str], categories: CategorySet, line: int) -> PlayerProjection:
    means: List[float] = []
    volumes: List[float] = []
    values = row[2:]
    pos = 0
    for cat in categories:
        take = 2 if cat.kind == PERCENTAGE else 1
        cells = values[pos:pos + take]
        pos += take
        try:
            parsed = [float(x) for x in cells]
        except ValueError:
            raise ProjectionFormatError(
                f"line {line}: non-numeric value in {cat.name}: {cells!r}"
            ) from None
        means.append(parsed[0])
        volumes.append(parsed[1] if take == 2 else 0.0)
    proj = PlayerProjection(row[0], row[1], tuple(means), tuple(volumes))
    try:
        validate_projection(proj, categories)
    except ValueError as exc:
        raise ProjectionFormatError(f"line {line}: {exc}") from None
    return proj


def load_projections(
    path: Union[str, Path],
    categories: Optional[CategorySet] = None,
) -> List[PlayerProjection]:
    """Read a projection CSV in file order, validating every row.

    Raises ProjectionFormatError with the line number for a malformed or
    out-of-range row, a wrong header, or a duplicate player id.
    """
    cats = categories if categories is not None else CategorySet.default_nba()
    header = expected_header(cats)
    out: List[PlayerProjection] = []
    seen: Dict[str, int] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise ProjectionFormatError("line 1: empty file, expected header") from None
        if [c.strip() for c in first] != header:
            raise ProjectionFormatError(
                f"line 1: bad header {first!r}, expected {header!r}"
            )
        for row in reader:
            if not row:
                continue
            line = reader.line_num
            if len(row) != len(header):
                raise ProjectionFormatError(
                    f"line {line}: expected {len(header)} columns, got {len(row)}"
                )
            proj = _parse_row(row, cats, line)
            if proj.player_id in seen:
                raise ProjectionFormatError(
                    f"line {line}: duplicate player id {proj.player_id!r} "
                    f"(first seen on line {seen[proj.player_id]})"
                )
            seen[proj.player_id] = line
            out.append(proj)
    return out


def save_projections(
    projections: Sequence[PlayerProjection],
    path: Union[str, Path],
    categories: Optional[CategorySet] = None,
) -> None:
    """Write projections in the load_projections CSV layout (tags are not
    persisted)."""
    cats = categories if categories is not None else CategorySet.default_nba()
    for proj in projections:
        validate_projection(proj, cats)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(expected_header(cats))
        for proj in projections:
            row: List[object] = [proj.player_id, proj.player_name]
            for i, cat in enumerate(cats):
                row.append(proj.means[i])
                if cat.kind == PERCENTAGE:
                    row.append(proj.volumes[i])
            writer.writerow(row)


def league_rates(
    projections: Sequence[PlayerProjection], categories: CategorySet
) -> Dict[str, float]:
    """Volume-weighted league rate per percentage category:
    sum(rate * volume) / sum(volume), zero when nobody has volume."""
    rates: Dict[str, float] = {}
    for i, cat in enumerate(categories):
        if cat.kind != PERCENTAGE:
            continue
        total = sum(p.volumes[i] for p in projections)
        weighted = sum(p.means[i] * p.volumes[i] for p in projections)
        rates[cat.name] = weighted / total if total > 0.0 else 0.0
    return rates


# ---------------------------------------------------------------------------
# Run store
# ---------------------------------------------------------------------------

class RunStore:
    """Append-only directory of experiment runs. Each run is a
    subdirectory holding config.json, report.json, and report.csv; a run
    is immutable once written."""

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def run_dir(self, run_id: str) -> Path:
        return self.root / run_id

    def exists(self, run_id: str) -> bool:
        return self.run_dir(run_id).is_dir()

    def list_runs(self) -> List[str]:
        return sorted(p.name for p in self.root.iterdir() if p.is_dir())


def default_run_id(report: SimReport) -> str:
    if "hscore" in report.layout:
        tag = f"h{report.layout.index('hscore')}"
    else:
        tag = "allg"
    return f"{tag}-chi{report.chi}-seed{report.master_seed}-n{report.n_seasons}"


def report_json_bytes(report: SimReport) -> bytes:
    payload = json.dumps(report.as_dict(), sort_keys=True, separators=(",", ":"))
    return (payload + "\n").encode("utf-8")


def report_csv_text(report: SimReport) -> str:
    """Win-rate table: one row per run batch, one column per draft seat
    plus the across-seat mean."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    seats = len(report.win_rate)
    writer.writerow(["batch"] + [f"seat_{s}" for s in range(seats)] + ["mean"])
    writer.writerow(
        [f"seed{report.master_seed}"]
        + [repr(rate) for rate in report.win_rate]
        + [repr(report.mean_win_rate)]
    )
    return buf.getvalue()


def write_report(report: SimReport, store: RunStore, run_id: Optional[str] = None) -> str:
    """Persist one report; returns the run id. An existing run with the
    same id is never touched: collisions raise FileExistsError."""
    rid = run_id if run_id is not None else default_run_id(report)
    if store.exists(rid):
        raise FileExistsError(f"run {rid!r} already exists in {store.root}")
    run_dir = store.run_dir(rid)
    run_dir.mkdir(parents=True)
    config = {
        "schema_version": report.schema_version,
        "master_seed": report.master_seed,
        "n_seasons": report.n_seasons,
        "chi": report.chi,
        "layout": list(report.layout),
        "category_names": list(report.category_names),
    }
    config_payload = json.dumps(config, sort_keys=True, separators=(",", ":")) + "\n"
    (run_dir / "config.json").write_bytes(config_payload.encode("utf-8"))
    (run_dir / "report.json").write_bytes(report_json_bytes(report))
    (run_dir / "report.csv").write_bytes(report_csv_text(report).encode("utf-8"))
    return rid


def read_report(store: RunStore, run_id: str) -> dict:
    """Load a stored report as a dict, checking the schema version."""
    path = store.run_dir(run_id) / "report.json"
    if not path.is_file():
        raise FileNotFoundError(f"run {run_id!r} not found in {store.root}")
    payload = json.loads(path.read_text(encoding="utf-8"))
    version = payload.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(
            f"run {run_id!r} has schema version {version!r}, expected {SCHEMA_VERSION}"
        )
    return payload
