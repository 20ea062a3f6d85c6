"""Draws x scenarios experiments, draw-impact statistics and the reform decomposition."""

from __future__ import annotations

import hashlib
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from tourneysim.draw import LeagueProblem, draw_groups, draw_league
from tourneysim.engine import GroupBatch, LeagueBatch
from tourneysim.matchsim import DEFAULT_GOAL_MODEL, GoalModel
from tourneysim.model import Design, PotAssignment, SeasonRoster, SeedingPolicy, assign_pots, design_teams

log = logging.getLogger(__name__)

WORKERS_ENV = "TOURNEYSIM_WORKERS"


@dataclass(frozen=True)
class ExperimentConfig:
    design: Design
    seeding_policy: SeedingPolicy
    num_draws: int = 1000
    num_scenarios: int = 1000
    master_seed: int = 0

    def __post_init__(self):
        if self.num_draws < 2:
            raise ValueError("num_draws must be at least 2 for a standard deviation")
        if self.num_scenarios < 1:
            raise ValueError("num_scenarios must be positive")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")

    @property
    def tag(self) -> str:
        return f"{self.design.value}-{self.seeding_policy.value}"


@dataclass
class DrawProbabilityMatrix:
    """Per-draw qualification counts; ``counts[i, d]`` scenarios won by team ``team_ids[i]`` in draw ``d``."""

    config: ExperimentConfig
    team_ids: list[str]
    counts: np.ndarray
    pots: PotAssignment | None = field(default=None, repr=False)

    @property
    def q(self) -> np.ndarray:
        return self.counts / self.config.num_scenarios

    @property
    def mean(self) -> np.ndarray:
        return self.q.mean(axis=1)

    @property
    def sigma(self) -> np.ndarray:
        # population standard deviation over draws
        return self.q.std(axis=1, ddof=0)

    def by_team(self) -> dict[str, tuple[float, float]]:
        return {t: (float(p), float(s)) for t, p, s in zip(self.team_ids, self.mean, self.sigma)}


def derive_stream(master_seed: int, config_tag: str, draw_index: int, scenario_index: int) -> np.random.Generator:
    """Independent generator for one (config, draw, scenario) cell.

    The tag is hashed to a 64-bit word; negative indices are allowed and
    mapped to their own keys.
    """
    tag_word = int.from_bytes(hashlib.blake2b(config_tag.encode(), digest_size=8).digest(), "little")
    key = (tag_word, _nonneg(draw_index), _nonneg(scenario_index))
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=key)
    return np.random.Generator(np.random.PCG64(seq))


def _nonneg(i: int) -> int:
    return 2 * i if i >= 0 else -2 * i - 1


# The draw itself uses scenario index -1; all scenarios of a draw are
# simulated as one vectorised block from scenario index 0.
DRAW_STREAM = -1
SCENARIO_BLOCK = 0


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _draw_counts(design: Design, pots: PotAssignment, problem, elos, pos, config: ExperimentConfig, d: int) -> np.ndarray:
    draw_rng = derive_stream(config.master_seed, config.tag, d, DRAW_STREAM)
    sim_rng = derive_stream(config.master_seed, config.tag, d, SCENARIO_BLOCK)
    S = config.num_scenarios
    if design is Design.OLD:
        groups = draw_groups(pots, draw_rng)
        batch = GroupBatch(elos, [[pos[t] for t in g] for g in groups.groups])
        mask = batch.qualified(S, sim_rng)
    else:
        schedule = draw_league(problem, draw_rng)
        fixtures = schedule.sorted_fixtures()
        batch = LeagueBatch(elos, [pos[h] for h, _ in fixtures], [pos[a] for _, a in fixtures])
        mask = batch.qualified(S, sim_rng, playoffs=design is Design.NEW)
    return mask.sum(axis=0)


def _run_chunk(args):
    design, pots, config, draw_indices = args
    ids = [t.id for t in pots.teams]
    elos = np.array([t.elo for t in pots.teams])
    pos = {t: i for i, t in enumerate(ids)}
    problem = LeagueProblem.from_pots(pots) if design is not Design.OLD else None
    return draw_indices, [_draw_counts(design, pots, problem, elos, pos, config, d) for d in draw_indices]


def run_config(roster: SeasonRoster, config: ExperimentConfig, workers: int | None = None,
               progress=None) -> DrawProbabilityMatrix:
    """Simulate ``num_draws`` draws with ``num_scenarios`` tournaments each.

    Output does not depend on ``workers``: every draw has its own streams and
    lands in its own column.
    """
    teams = design_teams(roster, config.design)
    pots = assign_pots(teams, config.design, config.seeding_policy)
    ids = [t.id for t in pots.teams]
    D = config.num_draws
    counts = np.zeros((len(ids), D), dtype=np.int64)
    workers = default_workers() if workers is None else max(1, workers)

    chunk = max(1, min(25, D // (4 * workers) or 1))
    jobs = [(config.design, pots, config, list(range(i, min(i + chunk, D)))) for i in range(0, D, chunk)]
    if workers == 1:
        results = map(_run_chunk, jobs)
        _collect(results, counts, progress)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            _collect(pool.map(_run_chunk, jobs), counts, progress)
    return DrawProbabilityMatrix(config, ids, counts, pots)


def _collect(results, counts, progress):
    for indices, cols in results:
        for d, col in zip(indices, cols):
            counts[:, d] = col
        if progress is not None:
            progress(len(indices))


# ---------------------------------------------------------------------------
# Decomposition

DECOMPOSITION_CONFIGS = (
    ("o", Design.OLD, SeedingPolicy.UEFA),
    ("n", Design.NEW, SeedingPolicy.UEFA),
    ("o_elo", Design.OLD, SeedingPolicy.ELO),
    ("n_elo", Design.NEW, SeedingPolicy.ELO),
    ("n_elo_t16", Design.NEW_T16, SeedingPolicy.ELO),
)


@dataclass(frozen=True)
class TeamDecomposition:
    team_id: str
    sigma: Mapping[str, float | None]
    mean: Mapping[str, float | None]
    dV: float | None
    dV1: float | None
    dV2: float | None
    dV3: float | None

    @property
    def pct_change(self) -> float | None:
        if self.dV is None or not self.sigma["o"]:
            return None
        return 100.0 * self.dV / self.sigma["o"]


@dataclass(frozen=True)
class DecompositionReport:
    rows: tuple[TeamDecomposition, ...]

    def by_team(self) -> dict[str, TeamDecomposition]:
        return {r.team_id: r for r in self.rows}


def decompose(n_uefa: DrawProbabilityMatrix, o_uefa: DrawProbabilityMatrix, n_elo: DrawProbabilityMatrix,
              o_elo: DrawProbabilityMatrix, n_elo_t16: DrawProbabilityMatrix) -> DecompositionReport:
    """Split each team's change in draw impact into seeding, play-off and first-stage parts.

    Teams only present in the new design get their new-design values and no
    decomposition.
    """
    mats = {"o": o_uefa, "n": n_uefa, "o_elo": o_elo, "n_elo": n_elo, "n_elo_t16": n_elo_t16}
    new_ids = set(n_uefa.team_ids)
    old_ids = set(o_uefa.team_ids)
    mismatched = sorted((set(n_elo.team_ids) ^ new_ids) | (set(n_elo_t16.team_ids) ^ new_ids)
                        | (set(o_elo.team_ids) ^ old_ids) | (old_ids - new_ids))
    if mismatched:
        raise ValueError(f"rosters do not match across configurations; unmatched ids: {mismatched}")

    stats = {k: m.by_team() for k, m in mats.items()}
    rows = []
    for tid in n_uefa.team_ids:
        sig = {k: (stats[k][tid][1] if tid in stats[k] else None) for k in mats}
        mean = {k: (stats[k][tid][0] if tid in stats[k] else None) for k in mats}
        if tid in old_ids:
            s = sig
            dv1 = (s["n"] - s["n_elo"]) - (s["o"] - s["o_elo"])
            dv2 = s["n_elo"] - s["n_elo_t16"]
            dv3 = s["n_elo_t16"] - s["o_elo"]
            # summed from the components so the identity holds to the last bit
            dv = dv1 + dv2 + dv3
            rows.append(TeamDecomposition(tid, sig, mean, dv, dv1, dv2, dv3))
        else:
            rows.append(TeamDecomposition(tid, sig, mean, None, None, None, None))
    return DecompositionReport(tuple(rows))


def run_decomposition(roster: SeasonRoster, num_draws: int = 1000, num_scenarios: int = 1000,
                      master_seed: int = 0, workers: int | None = None, progress=None):
    """Run the five configurations and decompose; returns (report, matrices by key)."""
    mats = {}
    for key, design, policy in DECOMPOSITION_CONFIGS:
        cfg = ExperimentConfig(design, policy, num_draws, num_scenarios, master_seed)
        log.info("running %s (%d draws x %d scenarios)", cfg.tag, num_draws, num_scenarios)
        mats[key] = run_config(roster, cfg, workers=workers, progress=progress)
    report = decompose(mats["n"], mats["o"], mats["n_elo"], mats["o_elo"], mats["n_elo_t16"])
    return report, mats
