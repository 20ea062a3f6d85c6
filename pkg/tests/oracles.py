"""Independent reference implementations used only by the tests.

None of these share code with the package beyond plain data types.
"""

from __future__ import annotations

from collections import Counter
from itertools import permutations, product

import numpy as np


# ---------------------------------------------------------------------------
# League draw: exhaustive schedule enumeration


def _schedule_ok(fixtures, assoc, cap=2):
    pairs = Counter(frozenset(f) for f in fixtures)
    if any(n > 1 for n in pairs.values()):
        return False
    met = {}
    for h, a in fixtures:
        if h == a or assoc[h] == assoc[a]:
            return False
        met.setdefault(h, Counter())[assoc[a]] += 1
        met.setdefault(a, Counter())[assoc[h]] += 1
    return all(n <= cap for c in met.values() for n in c.values())


def enumerate_schedules(pots, assoc, cap=2):
    """Every valid schedule as a frozenset of (home, away) fixtures.

    For each ordered pot pair the home-to-away map is a bijection; inside a
    pot it is a permutation without fixed points. Maps are combined one at a
    time and partial combinations that already break a rule are cut.
    """
    P = len(pots)
    maps = []
    for p, q in product(range(P), repeat=2):
        options = []
        for perm in permutations(pots[q]):
            edges = list(zip(pots[p], perm))
            if any(h == a or assoc[h] == assoc[a] for h, a in edges):
                continue
            options.append(edges)
        maps.append(options)
    out = []

    def extend(k, fixtures):
        if not _schedule_ok(fixtures, assoc, cap):
            return
        if k == len(maps):
            out.append(frozenset(fixtures))
            return
        for edges in maps[k]:
            extend(k + 1, fixtures + edges)

    extend(0, [])
    return out


def brute_feasible(schedules, fixtures):
    need = set(fixtures)
    return any(need <= s for s in schedules)


def brute_candidate_pairs(schedules, fixtures, team, pot_members):
    """(home opponent, away opponent) pairs from ``pot_members`` present in some completion."""
    need = set(fixtures)
    pot_set = set(pot_members)
    pairs = set()
    for s in schedules:
        if not need <= s:
            continue
        h = [a for (x, a) in s if x == team and a in pot_set]
        a = [x for (x, y) in s if y == team and x in pot_set]
        pairs.add((h[0], a[0]))
    return pairs


# ---------------------------------------------------------------------------
# League draw: integer programme (for instances too big to enumerate)


def ilp_feasible(pots, assoc, fixed_fixtures, cap=2):
    """Feasibility of completing ``fixed_fixtures`` via a 0/1 programme solved by HiGHS."""
    from scipy.optimize import Bounds, LinearConstraint, milp

    teams = [t for p in pots for t in p]
    edges = [(h, a) for h in teams for a in teams if h != a and assoc[h] != assoc[a]]
    col = {e: i for i, e in enumerate(edges)}
    n = len(edges)
    rows, lo, hi = [], [], []

    def add(coeffs, lb, ub):
        rows.append(coeffs)
        lo.append(lb)
        hi.append(ub)

    for t in teams:
        for q in range(len(pots)):
            add({col[(t, a)]: 1 for a in pots[q] if (t, a) in col}, 1, 1)
            add({col[(h, t)]: 1 for h in pots[q] if (h, t) in col}, 1, 1)
        for country in set(assoc.values()):
            c = {}
            for x in teams:
                if assoc[x] == country:
                    for e in ((t, x), (x, t)):
                        if e in col:
                            c[col[e]] = 1
            if c:
                add(c, 0, cap)
    for i, (h, a) in enumerate(edges):
        if h < a and (a, h) in col:
            add({i: 1, col[(a, h)]: 1}, 0, 1)

    lb = np.zeros(n)
    for f in fixed_fixtures:
        if f not in col:
            return False
        lb[col[f]] = 1
    A = np.zeros((len(rows), n))
    for r, coeffs in enumerate(rows):
        for j, v in coeffs.items():
            A[r, j] = v
    res = milp(np.zeros(n), constraints=LinearConstraint(A, lo, hi),
               integrality=np.ones(n), bounds=Bounds(lb, np.ones(n)))
    return res.status == 0


# ---------------------------------------------------------------------------
# Rankings: pairwise criteria evaluators working from raw results


def _points(gf, ga):
    return 3 if gf > ga else 1 if gf == ga else 0


def _team_line(team, results, among=None):
    """(points, goal difference, goals for) over results, optionally only vs ``among``."""
    pts = gd = gf = 0
    for r in results:
        if r.home == team and (among is None or r.away in among):
            pts += _points(r.home_goals, r.away_goals)
            gd += r.home_goals - r.away_goals
            gf += r.home_goals
        elif r.away == team and (among is None or r.home in among):
            pts += _points(r.away_goals, r.home_goals)
            gd += r.away_goals - r.home_goals
            gf += r.away_goals
    return pts, gd, gf


def group_criteria(team, results, random_key):
    pts = _team_line(team, results)[0]
    teams = {r.home for r in results} | {r.away for r in results}
    tied = {t for t in teams if _team_line(t, results)[0] == pts}
    h2h = _team_line(team, results, among=tied) if len(tied) > 1 else (0, 0, 0)
    overall = _team_line(team, results)
    return (pts, *h2h, overall[1], overall[2], random_key)


def league_criteria(team, results, random_key):
    pts, gd, gf = _team_line(team, results)
    away_gf = sum(r.away_goals for r in results if r.away == team)
    wins = sum(1 for r in results if (r.home == team and r.home_goals > r.away_goals)
               or (r.away == team and r.away_goals > r.home_goals))
    away_wins = sum(1 for r in results if r.away == team and r.away_goals > r.home_goals)
    opponents = [r.away for r in results if r.home == team] + [r.home for r in results if r.away == team]
    lines = [_team_line(o, results) for o in opponents]
    return (pts, gd, gf, away_gf, wins, away_wins,
            sum(x[0] for x in lines), sum(x[1] for x in lines), sum(x[2] for x in lines), random_key)


def brute_order(results, criteria, random_keys):
    """Order teams by counting, for each team, how many others beat it on the criteria."""
    teams = sorted({r.home for r in results} | {r.away for r in results})
    crit = {t: criteria(t, results, random_keys[t]) for t in teams}
    place = {t: sum(1 for o in teams if crit[o] > crit[t]) for t in teams}
    return sorted(teams, key=lambda t: place[t]), crit
