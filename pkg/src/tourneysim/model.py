"""Teams, season rosters and seeding pots for both competition designs."""

from __future__ import annotations

import csv
import enum
import io
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import IO, Iterable, Sequence

CSV_COLUMNS = ("id", "name", "association", "elo", "uefa_rank", "titleholder", "in_old_design")

NEW_DESIGN_SIZE = 36
OLD_DESIGN_SIZE = 32
NUM_POTS = 4
# Beyond this, eight groups of four cannot keep one association per group.
MAX_OLD_DESIGN_PER_ASSOCIATION = 4

BUNDLED_SEASONS = {"2024-25": "ucl-2024-25.csv"}


class RosterError(ValueError):
    """Raised when season data is malformed or violates roster invariants."""


class Design(enum.Enum):
    OLD = "old"
    NEW = "new"
    NEW_T16 = "new-t16"

    @property
    def pot_size(self) -> int:
        return 8 if self is Design.OLD else 9

    @property
    def num_teams(self) -> int:
        return OLD_DESIGN_SIZE if self is Design.OLD else NEW_DESIGN_SIZE


class SeedingPolicy(enum.Enum):
    UEFA = "uefa"
    ELO = "elo"


@dataclass(frozen=True)
class Team:
    id: str
    name: str
    association: str
    elo: float
    uefa_rank: int
    titleholder: bool = False
    in_old_design: bool = True

    def __post_init__(self):
        if not self.elo > 0:
            raise RosterError(f"team {self.id!r}: elo must be positive, got {self.elo}")
        if self.uefa_rank < 1:
            raise RosterError(f"team {self.id!r}: uefa_rank must be >= 1, got {self.uefa_rank}")


@dataclass(frozen=True)
class SeasonRoster:
    season_label: str
    teams: tuple[Team, ...]

    def __post_init__(self):
        object.__setattr__(self, "teams", tuple(self.teams))
        validate_teams(self.teams)

    def by_id(self) -> dict[str, Team]:
        return {t.id: t for t in self.teams}

    def __len__(self) -> int:
        return len(self.teams)


@dataclass(frozen=True)
class PotAssignment:
    design: Design
    policy: SeedingPolicy
    pots: tuple[tuple[Team, ...], ...]

    @property
    def teams(self) -> list[Team]:
        return [t for pot in self.pots for t in pot]

    def pot_of(self) -> dict[str, int]:
        """Map team id to its 0-based pot index."""
        return {t.id: p for p, pot in enumerate(self.pots) for t in pot}

    def pot_ids(self) -> list[list[str]]:
        return [[t.id for t in pot] for pot in self.pots]


def validate_teams(teams: Sequence[Team]) -> None:
    if len(teams) != NEW_DESIGN_SIZE:
        raise RosterError(f"wrong team count: expected {NEW_DESIGN_SIZE}, got {len(teams)}")
    _check_unique(teams, "id", lambda t: t.id)
    _check_unique(teams, "uefa_rank", lambda t: t.uefa_rank)
    holders = [t.id for t in teams if t.titleholder]
    if len(holders) != 1:
        raise RosterError(f"expected exactly one titleholder, found {len(holders)}: {holders}")
    old = [t for t in teams if t.in_old_design]
    if len(old) != OLD_DESIGN_SIZE:
        raise RosterError(
            f"expected {OLD_DESIGN_SIZE} teams with in_old_design=true, found {len(old)}"
        )
    crowded = {
        a: n for a, n in Counter(t.association for t in old).items()
        if n > MAX_OLD_DESIGN_PER_ASSOCIATION
    }
    if crowded:
        raise RosterError(
            f"old-design group draw infeasible: associations with more than "
            f"{MAX_OLD_DESIGN_PER_ASSOCIATION} teams: {crowded}"
        )


def _check_unique(teams, label, key):
    seen = {}
    for row, t in enumerate(teams, start=1):
        k = key(t)
        if k in seen:
            raise RosterError(f"row {row}: duplicate {label} {k!r} (first seen in row {seen[k]})")
        seen[k] = row


def _parse_bool(text: str, row: int, column: str) -> bool:
    value = text.strip().lower()
    if value == "true":
        return True
    if value == "false":
        return False
    raise RosterError(f"row {row}: column {column!r} must be true/false, got {text!r}")


def load_roster(source: IO[bytes] | IO[str] | bytes | str | Path, season_label: str | None = None) -> SeasonRoster:
    """Read a season CSV and return a validated roster.

    ``source`` may be a path, raw bytes, or an open (binary or text) stream.
    Errors name the offending data row (1-based, header excluded).
    """
    if isinstance(source, Path):
        label = season_label or source.stem
        text = source.read_bytes().decode("utf-8")
    elif isinstance(source, (bytes, bytearray)):
        label = season_label or "custom"
        text = bytes(source).decode("utf-8")
    elif isinstance(source, str):
        label = season_label or "custom"
        text = source
    else:
        label = season_label or "custom"
        raw = source.read()
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw

    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or tuple(f.strip() for f in reader.fieldnames) != CSV_COLUMNS:
        raise RosterError(f"bad header: expected {','.join(CSV_COLUMNS)}, got {reader.fieldnames}")

    teams = []
    for row, rec in enumerate(reader, start=1):
        if None in rec or any(v is None for v in rec.values()):
            raise RosterError(f"row {row}: expected {len(CSV_COLUMNS)} columns")
        try:
            elo = float(rec["elo"])
            rank = int(rec["uefa_rank"])
        except ValueError as exc:
            raise RosterError(f"row {row}: {exc}") from None
        if not rec["id"].strip():
            raise RosterError(f"row {row}: empty id")
        try:
            teams.append(Team(
                id=rec["id"].strip(),
                name=rec["name"].strip(),
                association=rec["association"].strip(),
                elo=elo,
                uefa_rank=rank,
                titleholder=_parse_bool(rec["titleholder"], row, "titleholder"),
                in_old_design=_parse_bool(rec["in_old_design"], row, "in_old_design"),
            ))
        except RosterError as exc:
            if str(exc).startswith("row"):
                raise
            raise RosterError(f"row {row}: {exc}") from None
    return SeasonRoster(label, tuple(teams))


def dump_roster(roster: SeasonRoster) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for t in roster.teams:
        writer.writerow([
            t.id, t.name, t.association, f"{t.elo:.6f}".rstrip("0").rstrip("."), t.uefa_rank,
            str(t.titleholder).lower(), str(t.in_old_design).lower(),
        ])
    return out.getvalue()


def bundled_season(name: str) -> SeasonRoster:
    try:
        filename = BUNDLED_SEASONS[name]
    except KeyError:
        raise RosterError(
            f"unknown bundled season {name!r}; available: {', '.join(BUNDLED_SEASONS)}"
        ) from None
    data = resources.files("tourneysim.data").joinpath(filename).read_bytes()
    return load_roster(data, season_label=name)


def old_design_roster(roster: SeasonRoster) -> list[Team]:
    return [t for t in roster.teams if t.in_old_design]


def design_teams(roster: SeasonRoster, design: Design) -> list[Team]:
    return old_design_roster(roster) if design is Design.OLD else list(roster.teams)


def assign_pots(teams: Iterable[Team], design: Design, policy: SeedingPolicy) -> PotAssignment:
    """Split teams into four equal pots.

    UEFA policy orders by coefficient rank with the titleholder forced to the
    front. Elo policy orders by rating only (ties by coefficient rank) and has
    no titleholder exception.
    """
    teams = list(teams)
    if len(teams) != design.num_teams:
        raise RosterError(
            f"wrong team count for {design.value} design: expected {design.num_teams}, got {len(teams)}"
        )
    if policy is SeedingPolicy.UEFA:
        ordered = sorted(teams, key=lambda t: (not t.titleholder, t.uefa_rank))
    else:
        ordered = sorted(teams, key=lambda t: (-t.elo, t.uefa_rank))
    k = design.pot_size
    pots = tuple(tuple(ordered[i * k:(i + 1) * k]) for i in range(NUM_POTS))
    return PotAssignment(design, policy, pots)
