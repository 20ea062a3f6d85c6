"""Draw engines for both designs.

Old design: one team per pot in each group, no two teams of an association
together, sampled by rejection. New design: each team gets one home and one
away opponent from every pot (its own included), never meets a compatriot,
meets at most two teams of any association, and never meets a team twice.
The sequential league draw only ever commits choices that still extend to a
complete schedule; that is decided by an exact search over a bitmask model.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from tourneysim.model import Design, PotAssignment

MAX_PER_ASSOCIATION = 2
DEFAULT_MAX_ATTEMPTS = 10**6


class DrawInfeasibleError(RuntimeError):
    """No draw outcome satisfies the constraints (or the retry budget ran out)."""


class DeadlockError(AssertionError):
    """The sequential league draw found no feasible pair for a required slot."""


@dataclass(frozen=True)
class GroupAssignment:
    """Groups as tuples of team ids; position ``p`` in a group holds the Pot ``p+1`` team."""

    groups: tuple[tuple[str, ...], ...]


@dataclass(frozen=True)
class LeagueSchedule:
    fixtures: frozenset[tuple[str, str]]

    def opponents(self) -> dict[str, list[str]]:
        opp: dict[str, list[str]] = {}
        for h, a in sorted(self.fixtures):
            opp.setdefault(h, []).append(a)
            opp.setdefault(a, []).append(h)
        return opp

    def sorted_fixtures(self) -> list[tuple[str, str]]:
        return sorted(self.fixtures)


# ---------------------------------------------------------------------------
# Old design: group draw by rejection sampling


def draw_groups(pots: PotAssignment | Sequence[Sequence[str]], rng: np.random.Generator,
                associations: Mapping[str, str] | None = None,
                max_attempts: int = DEFAULT_MAX_ATTEMPTS, batch: int = 256) -> GroupAssignment:
    """Uniform random group draw subject to the association constraint.

    Each attempt shuffles every pot independently and forms groups column-wise;
    attempts with a same-association group are discarded. Attempts are
    generated ``batch`` at a time, which does not change the distribution.
    """
    pot_ids, assoc = _pots_and_associations(pots, associations)
    num_groups = len(pot_ids[0])
    if any(len(p) != num_groups for p in pot_ids):
        raise ValueError("all pots must have the same size")
    if isinstance(pots, PotAssignment) and pots.design is not Design.OLD:
        raise ValueError("group draw needs old-design pots")

    counts = Counter(assoc[t] for pot in pot_ids for t in pot)
    crowded = {a: n for a, n in counts.items() if n > num_groups}
    if crowded:
        raise DrawInfeasibleError(
            f"associations with more teams than the {num_groups} groups: {crowded}"
        )

    codes = {a: i for i, a in enumerate(sorted(counts))}
    code = np.array([[codes[assoc[t]] for t in pot] for pot in pot_ids])  # (P, G)
    num_pots = len(pot_ids)
    attempts = 0
    while attempts < max_attempts:
        b = min(batch, max_attempts - attempts)
        perms = np.argsort(rng.random((b, num_pots, num_groups)), axis=2)
        grouped = np.take_along_axis(np.broadcast_to(code, perms.shape), perms, axis=2)
        # grouped[k, p, g]: association of the pot-p team in group g, attempt k
        s = np.sort(grouped, axis=1)
        ok = ~np.any(s[:, 1:, :] == s[:, :-1, :], axis=(1, 2))
        hits = np.flatnonzero(ok)
        if hits.size:
            perm = perms[hits[0]]
            groups = tuple(
                tuple(pot_ids[p][perm[p, g]] for p in range(num_pots)) for g in range(num_groups)
            )
            return GroupAssignment(groups)
        attempts += b
    raise DrawInfeasibleError(
        f"no valid group draw after {max_attempts} attempts; association counts: "
        f"{dict(sorted(counts.items(), key=lambda kv: -kv[1]))}"
    )


def validate_groups(assignment: GroupAssignment, pots: PotAssignment | Sequence[Sequence[str]],
                    associations: Mapping[str, str] | None = None) -> list[str]:
    """Return a list of violated group-draw constraints (empty when valid)."""
    pot_ids, assoc = _pots_and_associations(pots, associations)
    pot_of = {t: p for p, pot in enumerate(pot_ids) for t in pot}
    problems = []
    if len(assignment.groups) != len(pot_ids[0]):
        problems.append(f"expected {len(pot_ids[0])} groups, got {len(assignment.groups)}")
    seen = Counter(t for g in assignment.groups for t in g)
    for t, n in sorted(seen.items()):
        if t not in pot_of:
            problems.append(f"unknown team {t}")
        elif n > 1:
            problems.append(f"team {t} appears in {n} groups")
    for t in sorted(set(pot_of) - set(seen)):
        problems.append(f"team {t} missing from the draw")
    for gi, group in enumerate(assignment.groups):
        label = chr(ord("A") + gi) if gi < 26 else str(gi + 1)
        pots_here = sorted(pot_of[t] for t in group if t in pot_of)
        if pots_here != list(range(len(pot_ids))):
            problems.append(f"group {label}: pots {[p + 1 for p in pots_here]} instead of one per pot")
        by_assoc: dict[str, list[str]] = {}
        for t in group:
            if t in assoc:
                by_assoc.setdefault(assoc[t], []).append(t)
        for a, ts in sorted(by_assoc.items()):
            if len(ts) > 1:
                problems.append(f"group {label}: same-association teams {' vs '.join(ts)} ({a})")
    return problems


# ---------------------------------------------------------------------------
# New design: league-phase draw


class LeagueProblem:
    """Static description of a league-phase draw: pots of equal size and associations.

    Teams are indexed in pot order. The instance need not be 4 pots of 9;
    small instances are used to cross-check the solver.
    """

    def __init__(self, pots: Sequence[Sequence[str]], associations: Mapping[str, str],
                 max_per_association: int = MAX_PER_ASSOCIATION):
        self.pot_ids = [list(p) for p in pots]
        sizes = {len(p) for p in self.pot_ids}
        if len(sizes) != 1:
            raise ValueError("all pots must have the same size")
        if sizes.pop() < 3:
            raise ValueError("pots need at least three teams")
        self.ids = [t for p in self.pot_ids for t in p]
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("duplicate team id in pots")
        self.index = {t: i for i, t in enumerate(self.ids)}
        self.num_teams = len(self.ids)
        self.num_pots = len(self.pot_ids)
        self.cap = max_per_association
        self.pot = [p for p, pot in enumerate(self.pot_ids) for _ in pot]
        self.pot_mask = [sum(1 << self.index[t] for t in pot) for pot in self.pot_ids]
        names = sorted({associations[t] for t in self.ids})
        self.association_names = names
        codes = {a: i for i, a in enumerate(names)}
        self.assoc = [codes[associations[t]] for t in self.ids]
        self.assoc_mask = [0] * len(names)
        for i, a in enumerate(self.assoc):
            self.assoc_mask[a] |= 1 << i

    @classmethod
    def from_pots(cls, pots: PotAssignment) -> "LeagueProblem":
        return cls(pots.pot_ids(), {t.id: t.association for t in pots.teams})

    def initial_state(self) -> "DrawState":
        n = self.num_teams
        everyone = (1 << n) - 1
        succ = []
        for i in range(n):
            succ.append(everyone & ~(1 << i) & ~self.assoc_mask[self.assoc[i]])
        state = DrawState(self, succ, list(succ),
                          [-1] * (n * self.num_pots), [-1] * (n * self.num_pots),
                          [[0] * len(self.assoc_mask) for _ in range(n)])
        state.ok = state._check_all_slots()
        return state

    def state_from_fixtures(self, fixtures: Iterable[tuple[str, str]]) -> "DrawState":
        state = self.initial_state()
        for h, a in fixtures:
            if not state.ok:
                break
            state.assign(self.index[h], self.index[a])
        return state


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class DrawState:
    """Working state of a league draw.

    ``succ[t]`` holds the teams ``t`` may still host and ``pred[u]`` the teams
    that may still host ``u``; both only contain edges whose two slots are
    open. ``home[t*P + q]`` is the pot-``q`` team hosted by ``t`` (``-1`` if
    open) and ``away[u*P + p]`` the pot-``p`` team hosting ``u``.
    ``counts[t][a]`` counts fixed opponents of ``t`` from association ``a``.
    ``ok`` turns False once propagation proves the state cannot be completed.
    """

    __slots__ = ("problem", "succ", "pred", "home", "away", "counts", "ok")

    def __init__(self, problem, succ, pred, home, away, counts):
        self.problem = problem
        self.succ = succ
        self.pred = pred
        self.home = home
        self.away = away
        self.counts = counts
        self.ok = True

    def copy(self) -> "DrawState":
        s = DrawState(self.problem, self.succ[:], self.pred[:], self.home[:], self.away[:],
                      [c[:] for c in self.counts])
        s.ok = self.ok
        return s

    # -- queries ----------------------------------------------------------

    def home_opponent(self, team: int, pot: int) -> int:
        return self.home[team * self.problem.num_pots + pot]

    def away_opponent(self, team: int, pot: int) -> int:
        return self.away[team * self.problem.num_pots + pot]

    def home_candidates(self, team: int, pot: int) -> int:
        return self.succ[team] & self.problem.pot_mask[pot]

    def away_candidates(self, team: int, pot: int) -> int:
        return self.pred[team] & self.problem.pot_mask[pot]

    def is_complete(self) -> bool:
        return self.ok and -1 not in self.home

    def fixtures(self) -> list[tuple[str, str]]:
        ids = self.problem.ids
        P = self.problem.num_pots
        return [(ids[i // P], ids[u]) for i, u in enumerate(self.home) if u >= 0]

    def schedule(self) -> LeagueSchedule:
        if not self.is_complete():
            raise ValueError("draw state is not complete")
        return LeagueSchedule(frozenset(self.fixtures()))

    # -- propagation ------------------------------------------------------

    def assign(self, t: int, u: int) -> bool:
        """Fix the fixture ``t`` (home) vs ``u`` (away) and propagate; returns ``self.ok``."""
        if not self.ok:
            return False
        queue = [(t, u)]
        while queue:
            if not self._fix(*queue.pop(), queue):
                self.ok = False
                return False
        return True

    def _fix(self, t, u, queue) -> bool:
        pr = self.problem
        P = pr.num_pots
        p, q = pr.pot[t], pr.pot[u]
        hs, aslot = t * P + q, u * P + p
        if self.home[hs] == u:
            return True
        if not (self.succ[t] >> u) & 1:
            return False
        self.home[hs] = u
        self.away[aslot] = t
        self.succ[t] &= ~(1 << u)
        self.pred[u] &= ~(1 << t)
        for u2 in _bits(self.succ[t] & pr.pot_mask[q]):
            if not self._drop(t, u2, queue):
                return False
        for t2 in _bits(self.pred[u] & pr.pot_mask[p]):
            if not self._drop(t2, u, queue):
                return False
        if (self.succ[u] >> t) & 1 and not self._drop(u, t, queue):
            return False
        cap = pr.cap
        at, au = pr.assoc[t], pr.assoc[u]
        ct, cu = self.counts[t], self.counts[u]
        ct[au] += 1
        cu[at] += 1
        if ct[au] > cap or cu[at] > cap:
            return False
        if ct[au] == cap and not self._ban_association(t, au, queue):
            return False
        if cu[at] == cap and not self._ban_association(u, at, queue):
            return False
        return True

    def _ban_association(self, t, a, queue) -> bool:
        mask = self.problem.assoc_mask[a]
        for x in _bits(self.succ[t] & mask):
            if not self._drop(t, x, queue):
                return False
        for x in _bits(self.pred[t] & mask):
            if not self._drop(x, t, queue):
                return False
        return True

    def _drop(self, t, u, queue) -> bool:
        """Remove the open edge t->u and check the two slots it could have filled."""
        if not (self.succ[t] >> u) & 1:
            return True
        pr = self.problem
        P = pr.num_pots
        p, q = pr.pot[t], pr.pot[u]
        self.succ[t] &= ~(1 << u)
        self.pred[u] &= ~(1 << t)
        if self.home[t * P + q] < 0:
            d = self.succ[t] & pr.pot_mask[q]
            if d == 0:
                return False
            if d & (d - 1) == 0:
                queue.append((t, d.bit_length() - 1))
        if self.away[u * P + p] < 0:
            d = self.pred[u] & pr.pot_mask[p]
            if d == 0:
                return False
            if d & (d - 1) == 0:
                queue.append((d.bit_length() - 1, u))
        return True

    def _check_all_slots(self) -> bool:
        """Initial sweep: every open slot needs a candidate; singletons get fixed."""
        pr = self.problem
        queue = []
        for t in range(pr.num_teams):
            for q in range(pr.num_pots):
                for d, is_home in ((self.home_candidates(t, q), True),
                                   (self.away_candidates(t, q), False)):
                    if d == 0:
                        return False
                    if d & (d - 1) == 0:
                        u = d.bit_length() - 1
                        queue.append((t, u) if is_home else (u, t))
        while queue:
            if not self._fix(*queue.pop(), queue):
                return False
        return True

    def _open_slots(self):
        """Yield (domain, is_home, team, pot) for every open slot."""
        pr = self.problem
        P = pr.num_pots
        for i, v in enumerate(self.home):
            if v < 0:
                t, q = divmod(i, P)
                yield self.succ[t] & pr.pot_mask[q], True, t, q
        for i, v in enumerate(self.away):
            if v < 0:
                u, p = divmod(i, P)
                yield self.pred[u] & pr.pot_mask[p], False, u, p


# ---------------------------------------------------------------------------
# Exact completion search


def solve(state: DrawState, hint: DrawState | None = None) -> DrawState | None:
    """Return a complete schedule extending ``state``, or None if none exists.

    Depth-first search on the most constrained open slot with full propagation
    after every choice. Values used by ``hint`` (a complete state) are tried
    first, which makes re-solving after a small change cheap.
    """
    if not state.ok:
        return None
    if hint is not None:
        found = _repair(state, hint)
        if found is not None:
            return found
    return _search(state, hint)


def _repair(state: DrawState, hint: DrawState) -> DrawState | None:
    """Keep every fixture of ``hint`` that still fits, then search the rest.

    Cheap when ``state`` differs from ``hint`` in a few fixtures. A None
    result proves nothing; the caller falls back to the full search.
    """
    P = state.problem.num_pots
    work = state
    for i, v in enumerate(hint.home):
        if work.home[i] >= 0:
            continue
        t = i // P
        if (work.succ[t] >> v) & 1:
            trial = work.copy()
            if trial.assign(t, v):
                work = trial
    if work is state:
        return None
    return _search(work, None)


def _search(state: DrawState, hint: DrawState | None) -> DrawState | None:
    best = None
    best_size = 1 << 30
    for dom, is_home, t, q in state._open_slots():
        size = dom.bit_count()
        if size < best_size:
            best, best_size = (dom, is_home, t, q), size
            if size <= 1:
                break
    if best is None:
        return state
    dom, is_home, t, q = best
    if best_size == 0:
        return None
    values = list(_bits(dom))
    if hint is not None:
        preferred = hint.home_opponent(t, q) if is_home else hint.away_opponent(t, q)
        if preferred in values:
            values.remove(preferred)
            values.insert(0, preferred)
    for v in values:
        child = state.copy()
        ok = child.assign(t, v) if is_home else child.assign(v, t)
        if ok:
            found = _search(child, hint)
            if found is not None:
                return found
    return None


def check_completion_feasible(state: DrawState) -> bool:
    """True iff the partial draw extends to at least one valid schedule."""
    return solve(state) is not None


# ---------------------------------------------------------------------------
# Sequential draw


def _local_pairs(state: DrawState, team: int, pot: int) -> list[tuple[int, int]]:
    """Pairs (home opponent, away opponent) passing cheap pairwise checks."""
    pr = state.problem
    h_fixed = state.home_opponent(team, pot)
    a_fixed = state.away_opponent(team, pot)
    homes = [h_fixed] if h_fixed >= 0 else list(_bits(state.home_candidates(team, pot)))
    aways = [a_fixed] if a_fixed >= 0 else list(_bits(state.away_candidates(team, pot)))
    counts = state.counts[team]
    pairs = []
    for h in homes:
        for a in aways:
            if h == a:
                continue
            if (h_fixed < 0 and a_fixed < 0 and pr.assoc[h] == pr.assoc[a]
                    and counts[pr.assoc[h]] + 2 > pr.cap):
                continue
            pairs.append((h, a))
    return pairs


def _apply_pair(state: DrawState, team: int, pair: tuple[int, int]) -> DrawState:
    h, a = pair
    child = state.copy()
    child.assign(team, h) and child.assign(a, team)
    return child


def _consistent(witness: DrawState, team: int, pot: int, pair: tuple[int, int]) -> bool:
    return witness.home_opponent(team, pot) == pair[0] and witness.away_opponent(team, pot) == pair[1]


def enumerate_candidate_pairs(state: DrawState, team: int | str, pot: int) -> set[tuple[str, str]]:
    """All (home opponent, away opponent) id pairs from ``pot`` that keep the draw completable.

    A side already fixed in ``state`` (drawn or forced by propagation)
    appears with its fixed opponent.
    """
    pr = state.problem
    t = pr.index[team] if isinstance(team, str) else team
    witnesses: list[DrawState] = []
    out = set()
    for pair in _local_pairs(state, t, pot):
        if any(_consistent(w, t, pot, pair) for w in witnesses):
            out.add(pair)
            continue
        sol = solve(_apply_pair(state, t, pair))
        if sol is not None:
            witnesses.append(sol)
            out.add(pair)
    return {(pr.ids[h], pr.ids[a]) for h, a in out}


def draw_league(pots: PotAssignment | LeagueProblem, rng: np.random.Generator) -> LeagueSchedule:
    """Sequential league-phase draw.

    Pots are processed in order; inside a pot the next team is picked
    uniformly among those not yet processed, and its opponents are drawn
    pot by pot as a uniformly random feasible (home, away) pair. A random
    order over the locally admissible pairs is scanned and the first one that
    still extends to a full schedule is taken, which is the same as a uniform
    choice among the feasible pairs.
    """
    if isinstance(pots, PotAssignment):
        if pots.design is Design.OLD:
            raise ValueError("league draw needs new-design pots")
        problem = LeagueProblem.from_pots(pots)
    else:
        problem = pots
    state = problem.initial_state()
    witness = solve(state)
    if witness is None:
        raise DrawInfeasibleError("the league draw constraints admit no schedule for these pots")

    for pot_members in problem.pot_ids:
        remaining = [problem.index[t] for t in pot_members]
        while remaining:
            team = remaining.pop(int(rng.integers(len(remaining))))
            for q in range(problem.num_pots):
                if state.home_opponent(team, q) >= 0 and state.away_opponent(team, q) >= 0:
                    continue
                pairs = _local_pairs(state, team, q)
                for k in rng.permutation(len(pairs)):
                    pair = pairs[k]
                    child = _apply_pair(state, team, pair)
                    if not child.ok:
                        continue
                    if _consistent(witness, team, q, pair):
                        state = child
                        break
                    sol = solve(child, hint=witness)
                    if sol is not None:
                        state, witness = child, sol
                        break
                else:
                    raise DeadlockError(
                        f"no feasible pot-{q + 1} pair for {problem.ids[team]}; "
                        "the feasibility check should have prevented this"
                    )
    assert state.is_complete()
    return state.schedule()


def validate_schedule(schedule: LeagueSchedule | Iterable[tuple[str, str]],
                      pots: PotAssignment | Sequence[Sequence[str]],
                      associations: Mapping[str, str] | None = None,
                      max_per_association: int = MAX_PER_ASSOCIATION) -> list[str]:
    """Return a list of violated league-draw constraints (empty when valid)."""
    pot_ids, assoc = _pots_and_associations(pots, associations)
    fixtures = list(schedule.fixtures if isinstance(schedule, LeagueSchedule) else schedule)
    pot_of = {t: p for p, pot in enumerate(pot_ids) for t in pot}
    num_pots = len(pot_ids)
    problems = []
    expected = len(pot_of) * num_pots
    if len(fixtures) != expected:
        problems.append(f"expected {expected} fixtures, got {len(fixtures)}")
    unordered = Counter(frozenset(f) for f in fixtures)
    for pair, n in sorted(unordered.items(), key=lambda kv: sorted(kv[0])):
        if n > 1:
            problems.append(f"pair {' vs '.join(sorted(pair))} meets {n} times")
    home_by_pot: dict[str, Counter] = {t: Counter() for t in pot_of}
    away_by_pot: dict[str, Counter] = {t: Counter() for t in pot_of}
    opp_assoc: dict[str, Counter] = {t: Counter() for t in pot_of}
    for h, a in fixtures:
        if h == a:
            problems.append(f"team {h} plays itself")
            continue
        unknown = [x for x in (h, a) if x not in pot_of]
        if unknown:
            problems.append(f"fixture {h},{a}: unknown team {', '.join(unknown)}")
            continue
        if assoc[h] == assoc[a]:
            problems.append(f"fixture {h},{a}: same association ({assoc[h]})")
        home_by_pot[h][pot_of[a]] += 1
        away_by_pot[a][pot_of[h]] += 1
        opp_assoc[h][assoc[a]] += 1
        opp_assoc[a][assoc[h]] += 1
    for t in (x for pot in pot_ids for x in pot):
        nh = sum(home_by_pot[t].values())
        na = sum(away_by_pot[t].values())
        if nh != num_pots:
            problems.append(f"team {t}: {nh} home fixtures instead of {num_pots}")
        if na != num_pots:
            problems.append(f"team {t}: {na} away fixtures instead of {num_pots}")
        for p in range(num_pots):
            if home_by_pot[t][p] != 1 and nh == num_pots:
                problems.append(f"team {t}: {home_by_pot[t][p]} home opponents from pot {p + 1}")
            if away_by_pot[t][p] != 1 and na == num_pots:
                problems.append(f"team {t}: {away_by_pot[t][p]} away opponents from pot {p + 1}")
        for a, n in sorted(opp_assoc[t].items()):
            if n > max_per_association:
                problems.append(f"team {t}: meets {n} teams from {a}")
    return problems


def _pots_and_associations(pots, associations):
    if isinstance(pots, PotAssignment):
        pot_ids = pots.pot_ids()
        assoc = {t.id: t.association for t in pots.teams}
        if associations:
            assoc.update(associations)
    else:
        pot_ids = [list(p) for p in pots]
        if associations is None:
            raise ValueError("associations are required when pots are given as id lists")
        assoc = dict(associations)
    return pot_ids, assoc
