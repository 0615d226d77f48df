#!/usr/bin/env python3
"""Plot a simulation run from its CSV outputs.

Usage: plot_run.py OUT_PREFIX [--channels a,b,c] [--save FILE]

OUT_PREFIX is the path prefix used by `arcsim simulate`, e.g.
`out/cow_staircase` for out/cow_staircase_{trajectory,events}.csv.
"""

import argparse
import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_csv(path):
    with open(path) as f:
        rows = list(csv.reader(f))
    header, data = rows[0], rows[1:]
    cols = {name: [] for name in header}
    for row in data:
        for name, value in zip(header, row):
            cols[name].append(value)
    return cols


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("prefix")
    ap.add_argument("--channels", default="")
    ap.add_argument("--save", default="")
    args = ap.parse_args()

    traj = read_csv(args.prefix + "_trajectory.csv")
    t = [float(x) for x in traj.pop("t")]
    names = [c for c in args.channels.split(",") if c] or list(traj)

    fig, axes = plt.subplots(len(names), 1, sharex=True,
                             figsize=(9, 1.8 * len(names)))
    if len(names) == 1:
        axes = [axes]
    for ax, name in zip(axes, names):
        ax.plot(t, [float(x) for x in traj[name]], lw=1.0)
        ax.set_ylabel(name)
        ax.grid(True, alpha=0.3)
    axes[-1].set_xlabel("t [s]")

    try:
        events = read_csv(args.prefix + "_events.csv")
        for et in {float(x) for x in events["t"]}:
            for ax in axes:
                ax.axvline(et, color="k", lw=0.4, alpha=0.25)
    except FileNotFoundError:
        pass

    out = args.save or args.prefix + ".png"
    fig.tight_layout()
    fig.savefig(out, dpi=130)
    print(f"wrote {out}")


if __name__ == "__main__":
    sys.exit(main())
