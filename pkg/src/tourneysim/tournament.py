"""One tournament realization on explicit team objects: matches, tables, qualifiers.

These functions favour clarity over speed; the Monte Carlo runs use the
array versions in :mod:`tourneysim.engine`, which are checked against these.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import permutations
from typing import Mapping, Sequence

import numpy as np

from tourneysim.draw import GroupAssignment, LeagueSchedule
from tourneysim.matchsim import DEFAULT_GOAL_MODEL, GoalModel, MatchResult, sample_match, sample_tie_winner
from tourneysim.model import Team

GROUP_CRITERIA = (
    "points", "h2h_points", "h2h_goal_difference", "h2h_goals_for",
    "goal_difference", "goals_for", "random",
)
LEAGUE_CRITERIA = (
    "points", "goal_difference", "goals_for", "away_goals_for", "wins", "away_wins",
    "opponent_points", "opponent_goal_difference", "opponent_goals_for", "random",
)


class Via(enum.Enum):
    GROUP_TOP2 = "group-top2"
    LEAGUE_TOP8 = "league-top8"
    PLAYOFF_WIN = "playoff-win"
    LEAGUE_TOP16 = "league-top16"


@dataclass
class TeamStats:
    team: str
    points: int = 0
    wins: int = 0
    draws: int = 0
    losses: int = 0
    goals_for: int = 0
    goals_against: int = 0
    away_goals_for: int = 0
    away_wins: int = 0
    opponents: list[str] = field(default_factory=list)

    @property
    def goal_difference(self) -> int:
        return self.goals_for - self.goals_against

    @property
    def played(self) -> int:
        return self.wins + self.draws + self.losses


@dataclass(frozen=True)
class RankedTable:
    ordering: tuple[str, ...]
    stats: Mapping[str, TeamStats]
    # (team above, team below, deciding criterion) for each adjacent pair level on points
    tiebreak_log: tuple[tuple[str, str, str], ...] = ()

    def position(self, team: str) -> int:
        """1-based rank of ``team``."""
        return self.ordering.index(team) + 1


@dataclass(frozen=True)
class QualificationOutcome:
    r16: frozenset[str]
    via: Mapping[str, Via]

    def __post_init__(self):
        if len(self.r16) != 16:
            raise ValueError(f"expected 16 qualifiers, got {len(self.r16)}")


def collect_stats(results: Sequence[MatchResult]) -> dict[str, TeamStats]:
    stats: dict[str, TeamStats] = {}
    for r in results:
        h = stats.setdefault(r.home, TeamStats(r.home))
        a = stats.setdefault(r.away, TeamStats(r.away))
        h.goals_for += r.home_goals
        h.goals_against += r.away_goals
        a.goals_for += r.away_goals
        a.goals_against += r.home_goals
        a.away_goals_for += r.away_goals
        h.opponents.append(r.away)
        a.opponents.append(r.home)
        if r.home_goals > r.away_goals:
            h.wins += 1
            a.losses += 1
        elif r.home_goals < r.away_goals:
            a.wins += 1
            a.away_wins += 1
            h.losses += 1
        else:
            h.draws += 1
            a.draws += 1
    for s in stats.values():
        s.points = 3 * s.wins + s.draws
    return stats


def _order_by_keys(keys: dict[str, tuple], names: Sequence[str]) -> tuple[tuple[str, ...], tuple]:
    ordering = tuple(sorted(keys, key=lambda t: keys[t], reverse=True))
    log = []
    for above, below in zip(ordering, ordering[1:]):
        ka, kb = keys[above], keys[below]
        if ka[0] != kb[0]:
            continue
        decided = next(i for i in range(len(ka)) if ka[i] != kb[i])
        log.append((above, below, names[decided]))
    return ordering, tuple(log)


def _random_keys(team_ids: Sequence[str], rng: np.random.Generator) -> dict[str, float]:
    # one key per team in sorted-id order, so the stream use does not depend on input order
    ids = sorted(team_ids)
    return dict(zip(ids, rng.random(len(ids)).tolist()))


def rank_group(results: Sequence[MatchResult], rng: np.random.Generator) -> RankedTable:
    """Rank a double round-robin group.

    Points first. Each maximal set of teams level on points is separated by a
    mini-table over the matches among them (points, goal difference, goals
    scored), computed once and not re-applied to smaller subsets, then by
    overall goal difference, overall goals scored, and finally at random.
    """
    stats = collect_stats(results)
    mini = {t: [0, 0, 0] for t in stats}
    for r in results:
        if stats[r.home].points != stats[r.away].points:
            continue
        hp, ap = (3, 0) if r.home_goals > r.away_goals else (0, 3) if r.home_goals < r.away_goals else (1, 1)
        mini[r.home][0] += hp
        mini[r.away][0] += ap
        mini[r.home][1] += r.home_goals - r.away_goals
        mini[r.away][1] += r.away_goals - r.home_goals
        mini[r.home][2] += r.home_goals
        mini[r.away][2] += r.away_goals
    rand = _random_keys(list(stats), rng)
    keys = {
        t: (s.points, *mini[t], s.goal_difference, s.goals_for, rand[t])
        for t, s in stats.items()
    }
    ordering, log = _order_by_keys(keys, GROUP_CRITERIA)
    return RankedTable(ordering, stats, log)


def rank_league(results: Sequence[MatchResult], rng: np.random.Generator) -> RankedTable:
    """Rank a single league table with the match-derived tiebreakers, then randomness."""
    stats = collect_stats(results)
    rand = _random_keys(list(stats), rng)
    keys = {}
    for t, s in stats.items():
        opp = [stats[o] for o in s.opponents]
        keys[t] = (
            s.points, s.goal_difference, s.goals_for, s.away_goals_for, s.wins, s.away_wins,
            sum(o.points for o in opp), sum(o.goal_difference for o in opp),
            sum(o.goals_for for o in opp), rand[t],
        )
    ordering, log = _order_by_keys(keys, LEAGUE_CRITERIA)
    return RankedTable(ordering, stats, log)


def play_group_stage(assignment: GroupAssignment, teams: Mapping[str, Team], rng: np.random.Generator,
                     model: GoalModel = DEFAULT_GOAL_MODEL) -> QualificationOutcome:
    r16 = []
    for group in assignment.groups:
        results = [sample_match(teams[h], teams[a], rng, model) for h, a in permutations(group, 2)]
        table = rank_group(results, rng)
        r16.extend(table.ordering[:2])
    return QualificationOutcome(frozenset(r16), {t: Via.GROUP_TOP2 for t in r16})


def play_league_phase(schedule: LeagueSchedule, teams: Mapping[str, Team], rng: np.random.Generator,
                      model: GoalModel = DEFAULT_GOAL_MODEL) -> RankedTable:
    results = [sample_match(teams[h], teams[a], rng, model) for h, a in schedule.sorted_fixtures()]
    return rank_league(results, rng)


def playoff_pairings(table: RankedTable, rng: np.random.Generator) -> list[tuple[str, str]]:
    """Knockout play-off ties as (seeded team, unseeded team).

    The seeded pair at ranks 9-10, 11-12, 13-14, 15-16 meets the unseeded
    pair at 23-24, 21-22, 19-20, 17-18 respectively; a fair coin decides
    which unseeded team each seeded team faces.
    """
    if len(table.ordering) < 24:
        raise ValueError("play-offs need at least 24 ranked teams")
    o = table.ordering
    ties = []
    for k in range(4):
        seeded = o[8 + 2 * k], o[9 + 2 * k]
        unseeded = o[22 - 2 * k], o[23 - 2 * k]
        if rng.random() >= 0.5:
            unseeded = unseeded[::-1]
        ties.append((seeded[0], unseeded[0]))
        ties.append((seeded[1], unseeded[1]))
    return ties


def playoff_round(table: RankedTable, teams: Mapping[str, Team], rng: np.random.Generator) -> QualificationOutcome:
    via = {t: Via.LEAGUE_TOP8 for t in table.ordering[:8]}
    for a, b in playoff_pairings(table, rng):
        via[sample_tie_winner(teams[a], teams[b], rng)] = Via.PLAYOFF_WIN
    return QualificationOutcome(frozenset(via), via)


def qualifiers_t16(table: RankedTable) -> QualificationOutcome:
    if len(table.ordering) < 16:
        raise ValueError("need at least 16 ranked teams")
    top = table.ordering[:16]
    return QualificationOutcome(frozenset(top), {t: Via.LEAGUE_TOP16 for t in top})
