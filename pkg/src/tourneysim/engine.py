"""Vectorised tournament simulation: all scenarios of one draw at once.

Arrays are indexed ``[scenario, team]`` with teams in a fixed local order
(positions in ``elos``). Every function here mirrors a function in
:mod:`tourneysim.tournament`; the test suite holds them to the same rankings.
"""

from __future__ import annotations

from itertools import permutations

import numpy as np

from tourneysim.matchsim import DEFAULT_GOAL_MODEL, GoalModel, goal_rates, sample_goals, two_legged_win_prob


def league_table_keys(home_goals, away_goals, home_idx, away_idx, n):
    """Ranking criteria for a league, best-is-larger, shape ``(9, S, n)``.

    Order: points, goal difference, goals for, away goals for, wins, away
    wins, opponents' points, opponents' goal difference, opponents' goals for.
    """
    m = len(home_idx)
    H = np.zeros((m, n))
    H[np.arange(m), home_idx] = 1.0
    A = np.zeros((m, n))
    A[np.arange(m), away_idx] = 1.0
    opp = H.T @ A + A.T @ H

    hg = np.asarray(home_goals, dtype=float)
    ag = np.asarray(away_goals, dtype=float)
    hw = (hg > ag).astype(float)
    aw = (ag > hg).astype(float)
    dr = (hg == ag).astype(float)

    points = (3 * hw + dr) @ H + (3 * aw + dr) @ A
    gf = hg @ H + ag @ A
    ga = ag @ H + hg @ A
    gd = gf - ga
    away_gf = ag @ A
    wins = hw @ H + aw @ A
    away_wins = aw @ A
    return np.stack([points, gd, gf, away_gf, wins, away_wins, points @ opp, gd @ opp, gf @ opp])


def rank_by_keys(keys, tiebreak):
    """Indices sorted best first along the last axis; ``keys[0]`` is the primary criterion."""
    return np.lexsort(np.concatenate([tiebreak[None], -keys[::-1]]), axis=-1)


def group_table_keys(home_goals, away_goals, home_local, away_local, group_of):
    """Group ranking criteria, best-is-larger, shape ``(6, S, G, 4)``.

    Order: points, head-to-head points, head-to-head goal difference,
    head-to-head goals for, goal difference, goals for. The head-to-head
    block counts only matches between teams level on points.
    """
    S = home_goals.shape[0]
    G = int(group_of.max()) + 1
    hg = np.asarray(home_goals, dtype=np.int64)
    ag = np.asarray(away_goals, dtype=np.int64)
    hp = 3 * (hg > ag) + (hg == ag)
    ap = 3 * (ag > hg) + (hg == ag)
    R = np.zeros((S, G, 4, 4), dtype=np.int64)   # points of i against j
    F = np.zeros((S, G, 4, 4), dtype=np.int64)   # goals of i against j
    R[:, group_of, home_local, away_local] += hp
    R[:, group_of, away_local, home_local] += ap
    F[:, group_of, home_local, away_local] += hg
    F[:, group_of, away_local, home_local] += ag
    points = R.sum(-1)
    gf = F.sum(-1)
    gd = gf - F.sum(-2)
    tied = points[..., :, None] == points[..., None, :]
    tR = np.where(tied, R, 0)
    tF = np.where(tied, F, 0)
    h2h_gf = tF.sum(-1)
    h2h_gd = h2h_gf - tF.sum(-2)
    return np.stack([points, tR.sum(-1), h2h_gd, h2h_gf, gd, gf])


class LeagueBatch:
    """Simulator for one league-phase draw.

    ``home_idx``/``away_idx`` give the fixtures as positions into ``elos``.
    """

    def __init__(self, elos, home_idx, away_idx, model: GoalModel = DEFAULT_GOAL_MODEL):
        self.elos = np.asarray(elos, dtype=float)
        self.n = len(self.elos)
        self.home_idx = np.asarray(home_idx)
        self.away_idx = np.asarray(away_idx)
        self.lam_home, self.lam_away = goal_rates(self.elos[self.home_idx], self.elos[self.away_idx], model)
        self.tie_prob = two_legged_win_prob(self.elos[:, None], self.elos[None, :])

    def sample_goals(self, scenarios, rng):
        m = len(self.home_idx)
        hg = sample_goals(self.lam_home, rng, (scenarios, m))
        ag = sample_goals(self.lam_away, rng, (scenarios, m))
        return hg, ag

    def rank(self, hg, ag, rng):
        keys = league_table_keys(hg, ag, self.home_idx, self.away_idx, self.n)
        return rank_by_keys(keys, rng.random(keys.shape[1:]))

    def playoff_winners(self, order, rng):
        """Winners of the eight play-off ties, shape ``(S, 8)``."""
        S = order.shape[0]
        winners = []
        for k in range(4):
            s1, s2 = order[:, 8 + 2 * k], order[:, 9 + 2 * k]
            u1, u2 = order[:, 22 - 2 * k], order[:, 23 - 2 * k]
            swap = rng.random(S) >= 0.5
            o1 = np.where(swap, u2, u1)
            o2 = np.where(swap, u1, u2)
            for s, o in ((s1, o1), (s2, o2)):
                win = rng.random(S) < self.tie_prob[s, o]
                winners.append(np.where(win, s, o))
        return np.stack(winners, axis=1)

    def qualified(self, scenarios, rng, playoffs: bool = True):
        """Boolean ``(S, n)`` mask of Round-of-16 qualifiers."""
        hg, ag = self.sample_goals(scenarios, rng)
        order = self.rank(hg, ag, rng)
        mask = np.zeros((scenarios, self.n), dtype=bool)
        rows = np.arange(scenarios)[:, None]
        if playoffs:
            mask[rows, order[:, :8]] = True
            mask[rows, self.playoff_winners(order, rng)] = True
        else:
            mask[rows, order[:, :16]] = True
        return mask


class GroupBatch:
    """Simulator for one old-design group draw; ``groups`` is ``(G, 4)`` positions into ``elos``."""

    def __init__(self, elos, groups, model: GoalModel = DEFAULT_GOAL_MODEL):
        self.elos = np.asarray(elos, dtype=float)
        self.n = len(self.elos)
        self.groups = np.asarray(groups)
        pairs = list(permutations(range(4), 2))
        G = len(self.groups)
        self.group_of = np.repeat(np.arange(G), len(pairs))
        self.home_local = np.tile([i for i, _ in pairs], G)
        self.away_local = np.tile([j for _, j in pairs], G)
        home = self.groups[self.group_of, self.home_local]
        away = self.groups[self.group_of, self.away_local]
        self.lam_home, self.lam_away = goal_rates(self.elos[home], self.elos[away], model)

    def sample_goals(self, scenarios, rng):
        m = len(self.group_of)
        hg = sample_goals(self.lam_home, rng, (scenarios, m))
        ag = sample_goals(self.lam_away, rng, (scenarios, m))
        return hg, ag

    def rank(self, hg, ag, rng):
        """Local positions (0-3) best first, shape ``(S, G, 4)``."""
        keys = group_table_keys(hg, ag, self.home_local, self.away_local, self.group_of)
        return rank_by_keys(keys, rng.random(keys.shape[1:]))

    def qualified(self, scenarios, rng):
        hg, ag = self.sample_goals(scenarios, rng)
        order = self.rank(hg, ag, rng)
        top2 = np.take_along_axis(np.broadcast_to(self.groups, order.shape), order[..., :2], axis=-1)
        mask = np.zeros((scenarios, self.n), dtype=bool)
        mask[np.arange(scenarios)[:, None], top2.reshape(scenarios, -1)] = True
        return mask
