#!/usr/bin/env python3
"""Plot resolved vs averaged velocity traces from a homog-compare run.

Usage:
    digestsim homog-compare --config configs/figure3_velocity.yaml --out out/
    python scripts/plot_velocity.py out/velocity_traces.csv -o velocity.png
"""

import argparse
import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("traces", type=Path)
    parser.add_argument("-o", "--output", type=Path, default=Path("velocity.png"))
    parser.add_argument("--window", type=float, nargs=2, default=None,
                        metavar=("T0", "T1"),
                        help="time window in seconds (default: full run)")
    args = parser.parse_args()

    with open(args.traces, newline="", encoding="utf-8") as fh:
        rows = [(float(r["t_s"]), float(r["v_m3_mps"]), float(r["v_m4_mps"]))
                for r in csv.DictReader(fh)]
    if args.window:
        t0, t1 = args.window
        rows = [r for r in rows if t0 <= r[0] <= t1]
    t, v3, v4 = zip(*rows)

    fig, ax = plt.subplots(figsize=(9, 4))
    ax.plot(t, v3, lw=0.6, label="pulse-resolved (M3)")
    ax.plot(t, v4, lw=1.5, label="homogenized (M4)")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("velocity [m/s]")
    ax.set_title("Bolus velocity: resolved pulses vs averaged forcing")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
