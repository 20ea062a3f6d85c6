"""Elo-driven match model: win expectancy, Poisson goals, two-legged ties."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from tourneysim.model import Team


class Venue(enum.Enum):
    HOME = "home"
    AWAY = "away"


@dataclass(frozen=True)
class GoalModel:
    """Cubic polynomials in the home side's win expectancy, highest power first."""

    home_coeffs: tuple[float, float, float, float] = (2.23998, -2.16311, 2.48048, 0.52717)
    away_coeffs: tuple[float, float, float, float] = (-0.79773, 2.14427, -3.06285, 2.17402)


DEFAULT_GOAL_MODEL = GoalModel()


@dataclass(frozen=True)
class MatchResult:
    home: str
    away: str
    home_goals: int
    away_goals: int

    def __post_init__(self):
        if self.home == self.away:
            raise ValueError(f"a team cannot play itself: {self.home!r}")


def win_expectancy(elo_home, elo_away):
    """Expected score of the home side; works elementwise on arrays."""
    return 1.0 / (1.0 + np.power(10.0, -(np.subtract(elo_home, elo_away)) / 400.0))


def two_legged_win_prob(elo_a, elo_b):
    """Probability that ``a`` wins a two-legged tie against ``b``."""
    return 1.0 / (1.0 + np.power(10.0, -math.sqrt(2.0) * np.subtract(elo_a, elo_b) / 400.0))


def _horner(coeffs, w):
    c3, c2, c1, c0 = coeffs
    return ((c3 * w + c2) * w + c1) * w + c0


def expected_goals(w, venue: Venue, model: GoalModel = DEFAULT_GOAL_MODEL):
    """Expected goals of the side playing at ``venue`` given the home win expectancy ``w``."""
    arr = np.asarray(w, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0) or np.any(np.isnan(arr)):
        raise ValueError(f"win expectancy must lie in [0, 1], got {w!r}")
    coeffs = model.home_coeffs if venue is Venue.HOME else model.away_coeffs
    out = _horner(coeffs, arr)
    return float(out) if out.ndim == 0 else out


def goal_rates(elo_home, elo_away, model: GoalModel = DEFAULT_GOAL_MODEL):
    """Poisson rates (home, away) for fixtures given as Elo arrays."""
    w = win_expectancy(elo_home, elo_away)
    return _horner(model.home_coeffs, w), _horner(model.away_coeffs, w)


def sample_goals(rates, rng: np.random.Generator, size=None):
    """Independent Poisson goal counts; numpy's sampler is exact for these small rates."""
    return rng.poisson(rates, size)


def sample_match(home: Team, away: Team, rng: np.random.Generator,
                 model: GoalModel = DEFAULT_GOAL_MODEL) -> MatchResult:
    if home.id == away.id:
        raise ValueError(f"a team cannot play itself: {home.id!r}")
    lam_h, lam_a = goal_rates(home.elo, away.elo, model)
    goals = sample_goals((lam_h, lam_a), rng)
    return MatchResult(home.id, away.id, int(goals[0]), int(goals[1]))


def sample_tie_winner(a: Team, b: Team, rng: np.random.Generator) -> str:
    if a.id == b.id:
        raise ValueError(f"a team cannot play itself: {a.id!r}")
    return a.id if rng.random() < two_legged_win_prob(a.elo, b.elo) else b.id
