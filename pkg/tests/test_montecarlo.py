from dataclasses import replace

import numpy as np
import pytest

from tourneysim.model import Design, SeasonRoster, SeedingPolicy, bundled_season
from tourneysim.montecarlo import (DrawProbabilityMatrix, ExperimentConfig, decompose, default_workers,
                                   derive_stream, run_config, run_decomposition)

ALL_CONFIGS = [(d, p) for d in Design for p in SeedingPolicy]


@pytest.fixture(scope="module")
def roster():
    return bundled_season("2024-25")


@pytest.mark.parametrize("design,policy", ALL_CONFIGS, ids=lambda x: x.value)
def test_single_scenario_counts(roster, design, policy):
    mat = run_config(roster, ExperimentConfig(design, policy, num_draws=2, num_scenarios=1, master_seed=3), workers=1)
    assert set(np.unique(mat.q)) <= {0.0, 1.0}
    assert (mat.q.sum(axis=0) == 16).all()
    assert len(mat.team_ids) == design.num_teams


@pytest.mark.parametrize("design,policy", ALL_CONFIGS, ids=lambda x: x.value)
def test_conservation_and_bounds(roster, design, policy):
    mat = run_config(roster, ExperimentConfig(design, policy, num_draws=4, num_scenarios=60, master_seed=1), workers=1)
    assert (mat.counts.sum(axis=0) == 16 * 60).all()
    assert mat.mean.sum() == pytest.approx(16.0, abs=1e-12)
    assert (mat.sigma <= 0.5).all() and (mat.sigma >= 0).all()


def test_streams():
    a = derive_stream(5, "new-uefa", 3, 7).integers(0, 2**63, 16)
    b = derive_stream(5, "new-uefa", 3, 7).integers(0, 2**63, 16)
    c = derive_stream(5, "new-uefa", 3, 8).integers(0, 2**63, 16)
    assert (a == b).all()
    assert (a != c).any()
    outputs = {
        tuple(derive_stream(seed, tag, d, s).integers(0, 2**63, 4))
        for seed in (0, 1) for tag in ("old-uefa", "new-uefa", "new-elo")
        for d in (0, 1, 2) for s in (-1, 0, 1)
    }
    assert len(outputs) == 2 * 3 * 3 * 3


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(Design.NEW, SeedingPolicy.UEFA, num_draws=1)
    with pytest.raises(ValueError):
        ExperimentConfig(Design.NEW, SeedingPolicy.UEFA, num_scenarios=0)
    with pytest.raises(ValueError):
        ExperimentConfig(Design.NEW, SeedingPolicy.UEFA, master_seed=-1)
    assert ExperimentConfig(Design.NEW_T16, SeedingPolicy.ELO).tag == "new-t16-elo"


def test_population_sigma():
    cfg = ExperimentConfig(Design.OLD, SeedingPolicy.UEFA, num_draws=4, num_scenarios=10)
    counts = np.array([[1, 3, 5, 7], [9, 7, 5, 3]])
    mat = DrawProbabilityMatrix(cfg, ["a", "b"], counts)
    q = np.array([0.1, 0.3, 0.5, 0.7])
    assert mat.sigma[0] == pytest.approx(np.sqrt(((q - q.mean()) ** 2).mean()))


def _boosted(roster, team="manchester-city", delta=2000.0):
    return SeasonRoster("boosted", tuple(replace(t, elo=t.elo + delta) if t.id == team else t for t in roster.teams))


def test_overwhelming_team_has_zero_sigma(roster):
    mat = run_config(_boosted(roster), ExperimentConfig(Design.NEW, SeedingPolicy.UEFA, num_draws=3, num_scenarios=200),
                     workers=1)
    assert mat.by_team()["manchester-city"] == (1.0, 0.0)


@pytest.mark.parametrize("design", [Design.OLD, Design.NEW_T16])
def test_overwhelming_team_nearly_certain(roster, design):
    # goal rates are bounded polynomials, so even a huge Elo edge loses the odd match
    S = 400
    mat = run_config(_boosted(roster), ExperimentConfig(design, SeedingPolicy.UEFA, num_draws=4, num_scenarios=S),
                     workers=1)
    p, s = mat.by_team()["manchester-city"]
    assert p > 0.98
    assert s < 3 * np.sqrt(p * (1 - p) / S) + 1e-12


def test_constant_counts_give_zero_sigma():
    cfg = ExperimentConfig(Design.NEW, SeedingPolicy.UEFA, num_draws=5, num_scenarios=7)
    mat = DrawProbabilityMatrix(cfg, ["a"], np.full((1, 5), 7))
    assert mat.sigma[0] == 0.0 and mat.mean[0] == 1.0


def test_worker_count_does_not_change_results(roster):
    cfg = ExperimentConfig(Design.NEW, SeedingPolicy.UEFA, num_draws=6, num_scenarios=30, master_seed=11)
    one = run_config(roster, cfg, workers=1)
    three = run_config(roster, cfg, workers=3)
    assert np.array_equal(one.counts, three.counts)
    assert one.team_ids == three.team_ids


def test_default_workers_env(monkeypatch):
    monkeypatch.setenv("TOURNEYSIM_WORKERS", "3")
    assert default_workers() == 3


def _fake(design, policy, ids, rng, D=5, S=20):
    cfg = ExperimentConfig(design, policy, num_draws=D, num_scenarios=S)
    return DrawProbabilityMatrix(cfg, list(ids), rng.integers(0, S + 1, (len(ids), D)))


def test_decomposition_identity(roster):
    rng = np.random.default_rng(0)
    new_ids = [t.id for t in roster.teams]
    old_ids = [t.id for t in roster.teams if t.in_old_design]
    report = decompose(
        _fake(Design.NEW, SeedingPolicy.UEFA, new_ids, rng), _fake(Design.OLD, SeedingPolicy.UEFA, old_ids, rng),
        _fake(Design.NEW, SeedingPolicy.ELO, new_ids, rng), _fake(Design.OLD, SeedingPolicy.ELO, old_ids, rng),
        _fake(Design.NEW_T16, SeedingPolicy.ELO, new_ids, rng),
    )
    rows = report.by_team()
    assert len(rows) == 36
    for tid in old_ids:
        r = rows[tid]
        assert r.dV == r.dV1 + r.dV2 + r.dV3
        assert r.dV == pytest.approx(r.sigma["n"] - r.sigma["o"], abs=1e-15)
        assert r.dV2 == r.sigma["n_elo"] - r.sigma["n_elo_t16"]
    for tid in set(new_ids) - set(old_ids):
        r = rows[tid]
        assert r.dV is None and r.sigma["o"] is None and r.sigma["n"] is not None


def test_decomposition_rejects_mismatch(roster):
    rng = np.random.default_rng(0)
    new_ids = [t.id for t in roster.teams]
    old_ids = [t.id for t in roster.teams if t.in_old_design]
    with pytest.raises(ValueError, match="bologna"):
        decompose(
            _fake(Design.NEW, SeedingPolicy.UEFA, new_ids, rng), _fake(Design.OLD, SeedingPolicy.UEFA, old_ids, rng),
            _fake(Design.NEW, SeedingPolicy.ELO, [t for t in new_ids if t != "bologna"], rng),
            _fake(Design.OLD, SeedingPolicy.ELO, old_ids, rng),
            _fake(Design.NEW_T16, SeedingPolicy.ELO, new_ids, rng),
        )


def test_run_decomposition_small(roster):
    report, mats = run_decomposition(roster, num_draws=3, num_scenarios=20, master_seed=2, workers=1)
    assert set(mats) == {"o", "n", "o_elo", "n_elo", "n_elo_t16"}
    for mat in mats.values():
        assert (mat.counts.sum(axis=0) == 16 * 20).all()
    assert sum(r.dV is not None for r in report.rows) == 32
