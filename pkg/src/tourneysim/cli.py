"""Command-line interface: simulate, decompose, draw, validate.

Exit status: 0 success, 1 validation failure, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from tourneysim.draw import (
    DrawInfeasibleError, GroupAssignment, LeagueSchedule, draw_groups, draw_league,
    validate_groups, validate_schedule,
)
from tourneysim.model import (
    Design, RosterError, SeasonRoster, SeedingPolicy, assign_pots, bundled_season, design_teams, load_roster,
)
from tourneysim.montecarlo import (
    DECOMPOSITION_CONFIGS, DRAW_STREAM, DecompositionReport, DrawProbabilityMatrix, ExperimentConfig,
    decompose, derive_stream, run_config,
)

log = logging.getLogger("tourneysim")

EXIT_OK, EXIT_INVALID, EXIT_USAGE = 0, 1, 2

SERIES_LABELS = {
    "n": "new_uefa",
    "o": "old_uefa",
    "n_elo": "new_elo",
    "o_elo": "old_elo",
    "n_elo_t16": "new_elo_t16",
}


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunManifest:
    season: str | None = "2024-25"
    teams: Path | None = None
    design: Design = Design.NEW
    seeding: SeedingPolicy = SeedingPolicy.UEFA
    draws: int = 1000
    scenarios: int = 1000
    seed: int = 0
    workers: int | None = None
    out: Path = Path("results")

    def roster(self) -> SeasonRoster:
        if self.teams is not None:
            if not self.teams.is_file():
                raise UsageError(f"roster file not found: {self.teams}")
            return load_roster(self.teams)
        return bundled_season(self.season)

    def config(self, design: Design | None = None, seeding: SeedingPolicy | None = None) -> ExperimentConfig:
        return ExperimentConfig(design or self.design, seeding or self.seeding,
                                self.draws, self.scenarios, self.seed)


_CONVERTERS = {
    "season": str,
    "teams": Path,
    "design": Design,
    "seeding": SeedingPolicy,
    "draws": int,
    "scenarios": int,
    "seed": int,
    "workers": int,
    "out": Path,
}


def read_config_file(path: Path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment. Keys mirror the long flags."""
    if not path.is_file():
        raise UsageError(f"config file not found: {path}")
    values = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONVERTERS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def build_manifest(args: argparse.Namespace) -> RunManifest:
    """Defaults, overridden by the config file, overridden by flags."""
    raw = read_config_file(Path(args.config)) if getattr(args, "config", None) else {}
    for f in fields(RunManifest):
        flag = getattr(args, f.name, None)
        if flag is not None:
            raw[f.name] = flag
    if "teams" in raw:
        raw.setdefault("season", None)
    try:
        values = {k: (v if not isinstance(v, str) else _CONVERTERS[k](v)) for k, v in raw.items()}
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    manifest = replace(RunManifest(), **values)
    if manifest.draws < 1 or manifest.scenarios < 1:
        raise UsageError("--draws and --scenarios must be positive")
    if not 0 <= manifest.seed < 2**64:
        raise UsageError("--seed must be an unsigned 64-bit integer")
    if manifest.workers is not None and manifest.workers < 1:
        raise UsageError("--workers must be positive")
    return manifest


# ---------------------------------------------------------------------------
# CSV helpers


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return f"{x:.6f}"
    return str(x)


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def schedule_to_csv(schedule: LeagueSchedule) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["home_id", "away_id"])
    writer.writerows(schedule.sorted_fixtures())
    return out.getvalue()


def groups_to_csv(assignment: GroupAssignment) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["group", "pot", "team_id"])
    for g, group in enumerate(assignment.groups):
        for p, team in enumerate(group):
            writer.writerow([chr(ord("A") + g), p + 1, team])
    return out.getvalue()


def parse_draw_dump(text: str) -> GroupAssignment | list[tuple[str, str]]:
    """Parse a group table or a fixture list; fixtures stay a list so repeats survive."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ValueError("empty draw file")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if r]
    if header == ["home_id", "away_id"]:
        if any(len(r) != 2 for r in body):
            raise ValueError("league dump rows must have two columns")
        return [(h.strip(), a.strip()) for h, a in body]
    if header == ["group", "pot", "team_id"]:
        groups: dict[str, dict[int, str]] = {}
        for r in body:
            if len(r) != 3:
                raise ValueError("group dump rows must have three columns")
            g, p, t = (x.strip() for x in r)
            slots = groups.setdefault(g, {})
            if int(p) in slots:
                raise ValueError(f"group {g} has two pot-{p} teams")
            slots[int(p)] = t
        return GroupAssignment(tuple(
            tuple(slots[p] for p in sorted(slots)) for _, slots in sorted(groups.items())
        ))
    raise ValueError(f"unrecognised draw header: {','.join(header)}")


# ---------------------------------------------------------------------------
# Commands


def _progress_printer(total: int):
    done = [0]

    def step(n):
        done[0] += n
        if sys.stderr.isatty():
            print(f"\r  {done[0]}/{total} draws", end="" if done[0] < total else "\n", file=sys.stderr)
    return step


def write_simulation(out: Path, roster: SeasonRoster, mat: DrawProbabilityMatrix) -> None:
    teams = roster.by_id()
    pot_of = mat.pots.pot_of()
    rows = [(t, teams[t].name, teams[t].elo, pot_of[t] + 1, p, s)
            for t, p, s in zip(mat.team_ids, mat.mean, mat.sigma)]
    write_csv(out / "probabilities.csv", ["team_id", "name", "elo", "pot", "p_qualify", "sigma"], rows)
    q = mat.q
    per_draw = ((t, d, q[i, d]) for i, t in enumerate(mat.team_ids) for d in range(q.shape[1]))
    write_csv(out / "per_draw.csv", ["team_id", "draw_index", "q"], per_draw)


def cmd_simulate(manifest: RunManifest) -> int:
    roster = manifest.roster()
    cfg = manifest.config()
    manifest.out.mkdir(parents=True, exist_ok=True)
    mat = run_config(roster, cfg, workers=manifest.workers, progress=_progress_printer(cfg.num_draws))
    write_simulation(manifest.out, roster, mat)
    teams = roster.by_id()
    print(f"{cfg.tag}: {cfg.num_draws} draws x {cfg.num_scenarios} scenarios, seed {cfg.master_seed}")
    print(f"{'team':<24}{'elo':>9}{'pot':>5}{'p_R16':>9}{'sigma':>9}")
    pot_of = mat.pots.pot_of()
    for t, p, s in sorted(zip(mat.team_ids, mat.mean, mat.sigma), key=lambda r: -teams[r[0]].elo):
        print(f"{teams[t].name:<24}{teams[t].elo:>9.2f}{pot_of[t] + 1:>5}{100 * p:>8.2f}%{s:>9.4f}")
    print(f"wrote {manifest.out / 'probabilities.csv'} and {manifest.out / 'per_draw.csv'}")
    return EXIT_OK


DECOMPOSITION_HEADER = [
    "team_id", "name", "elo", "sigma_o", "sigma_n", "sigma_o_elo", "sigma_n_elo", "sigma_n_elo_t16",
    "dV", "dV1", "dV2", "dV3", "pct_change",
]


def write_decomposition(out: Path, roster: SeasonRoster, report: DecompositionReport) -> None:
    teams = roster.by_id()
    rows = []
    long_rows = []
    for r in report.rows:
        t = teams[r.team_id]
        s = r.sigma
        rows.append((r.team_id, t.name, t.elo, s["o"], s["n"], s["o_elo"], s["n_elo"], s["n_elo_t16"],
                     r.dV, r.dV1, r.dV2, r.dV3, r.pct_change))
        for key, label in SERIES_LABELS.items():
            if s[key] is not None:
                long_rows.append((r.team_id, t.name, t.elo, label, s[key]))
    write_csv(out / "decomposition.csv", DECOMPOSITION_HEADER, rows)
    write_csv(out / "figure6_data.csv", ["team_id", "name", "elo", "series", "sigma"], long_rows)


def cmd_decompose(manifest: RunManifest) -> int:
    roster = manifest.roster()
    manifest.out.mkdir(parents=True, exist_ok=True)
    mats = {}
    for key, design, policy in DECOMPOSITION_CONFIGS:
        cfg = manifest.config(design, policy)
        print(f"running {cfg.tag} ...", file=sys.stderr)
        mats[key] = run_config(roster, cfg, workers=manifest.workers, progress=_progress_printer(cfg.num_draws))
    report = decompose(mats["n"], mats["o"], mats["n_elo"], mats["o_elo"], mats["n_elo_t16"])
    write_decomposition(manifest.out, roster, report)
    teams = roster.by_id()
    print(f"{'team':<24}{'sigma_o':>9}{'sigma_n':>9}{'dV':>9}{'dV1':>9}{'dV2':>9}{'dV3':>9}{'change':>9}")
    for r in sorted(report.rows, key=lambda r: -teams[r.team_id].elo):
        if r.dV is None:
            print(f"{teams[r.team_id].name:<24}{'---':>9}{r.sigma['n']:>9.4f}")
            continue
        pct = "---" if r.pct_change is None else f"{r.pct_change:.2f}%"
        print(f"{teams[r.team_id].name:<24}{r.sigma['o']:>9.4f}{r.sigma['n']:>9.4f}{r.dV:>9.4f}"
              f"{r.dV1:>9.4f}{r.dV2:>9.4f}{r.dV3:>9.4f}{pct:>9}")
    changes = [r.pct_change for r in report.rows if r.pct_change is not None]
    print(f"mean change in sigma: {np.mean(changes):.2f}%")
    print(f"wrote {manifest.out / 'decomposition.csv'} and {manifest.out / 'figure6_data.csv'}")
    return EXIT_OK


def cmd_draw(manifest: RunManifest) -> int:
    roster = manifest.roster()
    design = Design.NEW if manifest.design is Design.NEW_T16 else manifest.design
    pots = assign_pots(design_teams(roster, design), design, manifest.seeding)
    rng = derive_stream(manifest.seed, f"draw-{design.value}-{manifest.seeding.value}", 0, DRAW_STREAM)
    if design is Design.OLD:
        outcome = draw_groups(pots, rng)
        text = groups_to_csv(outcome)
        problems = validate_groups(outcome, pots)
    else:
        outcome = draw_league(pots, rng)
        text = schedule_to_csv(outcome)
        problems = validate_schedule(outcome, pots)
    manifest.out.mkdir(parents=True, exist_ok=True)
    path = manifest.out / "draw.csv"
    path.write_text(text, encoding="utf-8")
    print(f"wrote {path}")
    _report(problems)
    return EXIT_OK if not problems else EXIT_INVALID


def cmd_validate(path: Path, manifest: RunManifest) -> int:
    if not path.is_file():
        raise UsageError(f"draw file not found: {path}")
    try:
        outcome = parse_draw_dump(path.read_text(encoding="utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise UsageError(f"cannot parse {path}: {exc}") from None
    roster = manifest.roster()
    if isinstance(outcome, GroupAssignment):
        pots = assign_pots(design_teams(roster, Design.OLD), Design.OLD, manifest.seeding)
        problems = validate_groups(outcome, pots)
    else:
        pots = assign_pots(design_teams(roster, Design.NEW), Design.NEW, manifest.seeding)
        problems = validate_schedule(outcome, pots)
    _report(problems)
    return EXIT_OK if not problems else EXIT_INVALID


def _report(problems: list[str]) -> None:
    if problems:
        print(f"INVALID: {len(problems)} violation(s)")
        for p in problems:
            print(f"  - {p}")
    else:
        print("OK: all draw constraints satisfied")


# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, run: bool = True) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--season", help="bundled season name (default 2024-25)")
    src.add_argument("--teams", help="season CSV path (overrides --season)")
    p.add_argument("--seeding", choices=[s.value for s in SeedingPolicy])
    p.add_argument("--config", help="flat key = value file; flags take precedence")
    if run:
        p.add_argument("--design", choices=[d.value for d in Design])
        p.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
        p.add_argument("--out", help="output directory (default results)")


def _add_mc(p: argparse.ArgumentParser) -> None:
    p.add_argument("--draws", type=int, help="number of draws D (default 1000)")
    p.add_argument("--scenarios", type=int, help="scenarios per draw S (default 1000)")
    p.add_argument("--workers", type=int,
                   help="worker processes (default $TOURNEYSIM_WORKERS or CPU count)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tourneysim", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("simulate", help="qualification probabilities and draw impact for one design")
    _add_common(p)
    _add_mc(p)
    p = sub.add_parser("decompose", help="run all five configurations and decompose the reform effect")
    _add_common(p)
    _add_mc(p)
    p = sub.add_parser("draw", help="emit one sampled draw and check its constraints")
    _add_common(p)
    p = sub.add_parser("validate", help="check a draw dump against every draw constraint")
    p.add_argument("path")
    _add_common(p, run=False)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        manifest = build_manifest(args)
        if args.command == "simulate":
            return cmd_simulate(manifest)
        if args.command == "decompose":
            return cmd_decompose(manifest)
        if args.command == "draw":
            return cmd_draw(manifest)
        return cmd_validate(Path(args.path), manifest)
    except (UsageError, RosterError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DrawInfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
