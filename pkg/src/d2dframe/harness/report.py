"""
Writing experiment output: the CSV table, the timing sidecar and an
optional standalone plot script that reads the CSV back.
"""

import json
import os
from typing import Optional

from .experiments import ExperimentResult

# x column, y columns and group column per experiment
PLOT_LAYOUT = {
    "fig5": ("d_mr", ["pct_constant", "pct_adaptive", "pct_max"], None),
    "fig6a": ("d", ["median_rate_gain"], "d_mr"),
    "fig6b": ("d_mr", ["rate_distance_only", "rate_two_stage"], None),
    "fig7": ("d_mr", ["vertex_sum_rate", "oracle_sum_rate"], None),
    "fig8": ("d_mr", ["sum_rate_gain"], "d"),
}

_SCRIPT = '''\
# Plots {csv} next to this script. Needs matplotlib.
import csv
import os
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
CSV = os.path.join(HERE, {csv!r})
X, YS, GROUP = {x!r}, {ys!r}, {group!r}

with open(CSV, encoding="utf-8") as fh:
    rows = list(csv.DictReader(fh))

series = defaultdict(lambda: ([], []))
for row in rows:
    for y in YS:
        key = y if GROUP is None else "%s %s=%s" % (y, GROUP, row[GROUP])
        series[key][0].append(float(row[X]))
        series[key][1].append(float(row[y]))

fig, ax = plt.subplots()
for label, (xs, ys) in series.items():
    ax.plot(xs, ys, marker="o", label=label)
ax.set_xlabel(X)
ax.legend()
fig.savefig(os.path.join(HERE, {png!r}), dpi=120)
'''


def write_csv(result: ExperimentResult, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(result.to_csv())


def write_timing(result: ExperimentResult, path: str) -> Optional[str]:
    """Wall-clock numbers live in a JSON sidecar so the CSV stays reproducible."""
    if not result.extras or "vertex_seconds" not in result.extras[0]:
        return None
    side = path + ".timing.json"
    vert = sum(e["vertex_seconds"] for e in result.extras)
    orac = sum(e["oracle_seconds"] for e in result.extras)
    body = {"vertex_seconds": vert, "oracle_seconds": orac,
            "oracle_over_vertex": orac / vert if vert > 0 else None,
            "per_point": [{"vertex_seconds": e["vertex_seconds"],
                           "oracle_seconds": e["oracle_seconds"]}
                          for e in result.extras]}
    with open(side, "w", encoding="utf-8") as fh:
        json.dump(body, fh, indent=2)
    return side


def write_plot_script(result: ExperimentResult, csv_path: str) -> str:
    x, ys, group = PLOT_LAYOUT[result.name]
    stem, _ = os.path.splitext(csv_path)
    script = stem + "_plot.py"
    csv_name = os.path.basename(csv_path)
    png_name = os.path.basename(stem) + ".png"
    with open(script, "w", encoding="utf-8") as fh:
        fh.write(_SCRIPT.format(csv=csv_name, x=x, ys=ys, group=group, png=png_name))
    return script
