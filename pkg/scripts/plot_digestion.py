#!/usr/bin/env python3
"""Plot digestion curves from a trajectory CSV.

Usage:
    digestsim run --config configs/figure2_digestion.yaml --out out/
    python scripts/plot_digestion.py out/trajectory.csv -o digestion.png
"""

import argparse
import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load_columns(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        rows = [{k: float(v) for k, v in row.items()} for row in reader]
    return {key: [row[key] for row in rows] for key in rows[0]}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("trajectory", type=Path)
    parser.add_argument("-o", "--output", type=Path, default=Path("digestion.png"))
    args = parser.parse_args()

    cols = load_columns(args.trajectory)
    hours = [t / 3600.0 for t in cols["t_s"]]

    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(9, 7), sharex=True)
    for key, label in (("a_s_g", "solubilized substrate"),
                       ("a_ns_g", "non-solubilized substrate"),
                       ("a_nd_g", "non-degradable"),
                       ("b_int_g", "intermediate product"),
                       ("b_abs_g", "absorbable product"),
                       ("absorbed_cum_g", "absorbed (cumulative)")):
        ax1.plot(hours, cols[key], label=label)
    ax1.set_ylabel("mass [g]")
    ax1.legend(loc="center right", fontsize=8)
    ax1.set_title("Bolus composition along the transit")

    ax2.plot(hours, cols["w_g"], label="water")
    ax2.plot(hours, cols["x_m"], label="position [m]")
    ax2.set_xlabel("time [h]")
    ax2.legend(loc="center right", fontsize=8)

    fig.tight_layout()
    fig.savefig(args.output, dpi=150)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
