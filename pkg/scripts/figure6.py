"""Plot each team's draw impact by series from a figure6_data.csv.

    tourneysim decompose --out results/dec
    python scripts/figure6.py results/dec/figure6_data.csv --out results/dec/figure6.png

Needs matplotlib (pip install -e ".[plot]").
"""

import argparse
import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "old_uefa": ("tab:blue", "o", "old, UEFA seeding"),
    "new_uefa": ("tab:red", "s", "new, UEFA seeding"),
    "old_elo": ("tab:cyan", "^", "old, Elo seeding"),
    "new_elo": ("tab:orange", "v", "new, Elo seeding"),
    "new_elo_t16": ("tab:green", "D", "new, Elo seeding, top 16 qualify"),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv", type=Path)
    ap.add_argument("--out", type=Path, default=Path("figure6.png"))
    args = ap.parse_args()

    series = defaultdict(list)
    with open(args.csv, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            series[row["series"]].append((float(row["elo"]), float(row["sigma"])))

    fig, ax = plt.subplots(figsize=(9, 5))
    for key, (colour, marker, label) in STYLE.items():
        if key in series:
            x, y = zip(*sorted(series[key]))
            ax.scatter(x, y, c=colour, marker=marker, s=22, label=label)
    ax.set_xlabel("Elo rating")
    ax.set_ylabel("standard deviation of qualification probability across draws")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
