import csv
import io

import pytest

from tourneysim.cli import (RunManifest, build_parser, build_manifest, groups_to_csv, main, parse_draw_dump,
                            schedule_to_csv)
from tourneysim.draw import GroupAssignment, LeagueSchedule
from tourneysim.model import Design, SeedingPolicy, bundled_season, dump_roster


def _rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def _reemit(path):
    out = io.StringIO()
    csv.writer(out, lineterminator="\n").writerows(_rows(path))
    return out.getvalue()


@pytest.mark.parametrize("design,rows", [("new", 36), ("old", 32), ("new-t16", 36)])
def test_simulate_row_counts(tmp_path, design, rows):
    out = tmp_path / design
    code = main(["simulate", "--design", design, "--draws", "3", "--scenarios", "20", "--seed", "42",
                 "--workers", "1", "--out", str(out)])
    assert code == 0
    probs = _rows(out / "probabilities.csv")
    assert probs[0] == ["team_id", "name", "elo", "pot", "p_qualify", "sigma"]
    assert len(probs) == rows + 1
    assert sum(float(r[4]) for r in probs[1:]) == pytest.approx(16.0, abs=1e-5)
    per_draw = _rows(out / "per_draw.csv")
    assert per_draw[0] == ["team_id", "draw_index", "q"]
    assert len(per_draw) == rows * 3 + 1
    for name in ("probabilities.csv", "per_draw.csv"):
        assert _reemit(out / name) == (out / name).read_text(encoding="utf-8")


def test_missing_roster_file(tmp_path, capsys):
    missing = tmp_path / "nope.csv"
    assert main(["simulate", "--teams", str(missing), "--draws", "2", "--scenarios", "1"]) == 2
    assert str(missing) in capsys.readouterr().err


def test_custom_roster_file(tmp_path):
    path = tmp_path / "season.csv"
    path.write_text(dump_roster(bundled_season("2024-25")), encoding="utf-8")
    out = tmp_path / "o"
    assert main(["simulate", "--teams", str(path), "--design", "old", "--draws", "2", "--scenarios", "5",
                 "--workers", "1", "--out", str(out)]) == 0


def test_bad_roster_is_usage_error(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("id,name\nx,y\n", encoding="utf-8")
    assert main(["draw", "--teams", str(path), "--out", str(tmp_path)]) == 2
    assert "bad header" in capsys.readouterr().err


def test_decompose_outputs(tmp_path):
    out = tmp_path / "dec"
    assert main(["decompose", "--draws", "2", "--scenarios", "10", "--workers", "1", "--out", str(out)]) == 0
    rows = _rows(out / "decomposition.csv")
    assert rows[0] == ["team_id", "name", "elo", "sigma_o", "sigma_n", "sigma_o_elo", "sigma_n_elo",
                       "sigma_n_elo_t16", "dV", "dV1", "dV2", "dV3", "pct_change"]
    assert len(rows) == 37
    body = {r[0]: r for r in rows[1:]}
    assert body["lille"][3] == "" and body["lille"][8] == ""
    for r in rows[1:]:
        if r[8]:
            assert abs(float(r[9]) + float(r[10]) + float(r[11]) - float(r[8])) < 5e-6
    fig = _rows(out / "figure6_data.csv")
    assert fig[0] == ["team_id", "name", "elo", "series", "sigma"]
    assert len(fig) == 1 + 32 * 5 + 4 * 3
    assert {r[3] for r in fig[1:]} == {"new_uefa", "old_uefa", "new_elo", "old_elo", "new_elo_t16"}


@pytest.mark.parametrize("design", ["new", "old"])
def test_draw_deterministic_and_valid(tmp_path, design):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["draw", "--design", design, "--seed", "7", "--out", str(a)]) == 0
    assert main(["draw", "--design", design, "--seed", "7", "--out", str(b)]) == 0
    text = (a / "draw.csv").read_text()
    assert text == (b / "draw.csv").read_text()
    assert main(["validate", str(a / "draw.csv")]) == 0
    lines = text.splitlines()
    assert len(lines) == (145 if design == "new" else 33)


def test_draw_round_trip(tmp_path):
    assert main(["draw", "--design", "new", "--seed", "1", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "draw.csv").read_text()
    fixtures = parse_draw_dump(text)
    assert schedule_to_csv(LeagueSchedule(frozenset(fixtures))) == text
    assert main(["draw", "--design", "old", "--seed", "1", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "draw.csv").read_text()
    groups = parse_draw_dump(text)
    assert isinstance(groups, GroupAssignment) and len(groups.groups) == 8
    assert groups_to_csv(groups) == text


def _league_dump(tmp_path, seed=3):
    main(["draw", "--design", "new", "--seed", str(seed), "--out", str(tmp_path)])
    return parse_draw_dump((tmp_path / "draw.csv").read_text())


def _write_fixtures(path, fixtures):
    path.write_text("home_id,away_id\n" + "".join(f"{h},{a}\n" for h, a in fixtures), encoding="utf-8")


def test_validate_same_association(tmp_path, capsys):
    fixtures = _league_dump(tmp_path)
    # replace one of Barcelona's fixtures with a Spanish derby
    i = next(k for k, (h, a) in enumerate(fixtures) if h == "barcelona")
    fixtures[i] = ("barcelona", "girona")
    bad = tmp_path / "bad.csv"
    _write_fixtures(bad, fixtures)
    capsys.readouterr()
    assert main(["validate", str(bad)]) == 1
    out = capsys.readouterr().out
    assert "barcelona,girona" in out and "same association" in out


def test_validate_five_home_fixtures(tmp_path, capsys):
    fixtures = _league_dump(tmp_path)
    i = next(k for k, (h, a) in enumerate(fixtures) if a == "arsenal" and h != "real-madrid")
    h, a = fixtures[i]
    fixtures[i] = (a, h)
    bad = tmp_path / "bad.csv"
    _write_fixtures(bad, fixtures)
    capsys.readouterr()
    assert main(["validate", str(bad)]) == 1
    assert "arsenal: 5 home fixtures" in capsys.readouterr().out


def test_validate_unparseable(tmp_path):
    p = tmp_path / "junk.csv"
    p.write_text("what,is,this\n1,2,3\n")
    assert main(["validate", str(p)]) == 2
    assert main(["validate", str(tmp_path / "absent.csv")]) == 2


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# test run\ndraws = 11\nscenarios = 22  # inline\nseeding = elo\ndesign = old\n")
    parser = build_parser()
    m = build_manifest(parser.parse_args(["simulate", "--config", str(cfg), "--draws", "5"]))
    assert m.draws == 5
    assert m.scenarios == 22
    assert m.seeding is SeedingPolicy.ELO and m.design is Design.OLD
    assert m.seed == RunManifest().seed
    d = build_manifest(parser.parse_args(["simulate"]))
    assert d == RunManifest()


@pytest.mark.parametrize("content", ["draws 5\n", "colour = blue\n", "draws = many\n"])
def test_config_errors(tmp_path, content):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(content)
    assert main(["simulate", "--config", str(cfg)]) == 2


def test_invalid_counts():
    assert main(["simulate", "--draws", "0"]) == 2
    assert main(["simulate", "--workers", "0"]) == 2
