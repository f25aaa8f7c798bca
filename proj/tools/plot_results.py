#!/usr/bin/env python3
"""Render quick trend plots from an experiment CSV.

The CSV is the canonical artifact; this script only aggregates replication
means and draws one figure per (scenario, metric) pair:

    python3 tools/plot_results.py results.csv --out-dir figures
"""

import argparse
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

AXES = [
    "n",
    "epsilon",
    "censoring_rate",
    "dimension",
    "servers",
    "step_size",
    "noise_constant",
]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv", type=pathlib.Path)
    parser.add_argument("--out-dir", type=pathlib.Path, default=pathlib.Path("figures"))
    parser.add_argument("--linear-y", action="store_true", help="linear y axis")
    args = parser.parse_args()

    frame = pd.read_csv(args.csv)
    args.out_dir.mkdir(parents=True, exist_ok=True)

    for (scenario, metric), rows in frame.groupby(["scenario", "metric"]):
        varying = [a for a in AXES if rows[a].nunique() > 1]
        x_axis = varying[0] if varying else "n"
        series_axis = varying[1] if len(varying) > 1 else None

        fig, ax = plt.subplots(figsize=(6, 4))
        if series_axis is None:
            means = rows.groupby(x_axis)["value"].mean()
            ax.plot(means.index, means.values, marker="o")
        else:
            for key, chunk in rows.groupby(series_axis):
                means = chunk.groupby(x_axis)["value"].mean()
                label = f"{series_axis} = {key:g}" if isinstance(key, float) else f"{series_axis} = {key}"
                ax.plot(means.index, means.values, marker="o", label=label)
            ax.legend(fontsize=8)
        if not args.linear_y:
            ax.set_yscale("log")
        if x_axis in ("n", "epsilon"):
            ax.set_xscale("log")
        ax.set_xlabel(x_axis)
        ax.set_ylabel(f"mean {metric}")
        ax.set_title(scenario)
        ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
        out = args.out_dir / f"{scenario}_{metric}.png"
        fig.savefig(out, dpi=150)
        plt.close(fig)
        print(f"wrote {out}")


if __name__ == "__main__":
    main()
