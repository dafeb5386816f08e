"""Render experiment rows straight to an image file."""

from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .experiments import ExperimentResult
from .report import PLOT_LAYOUT


def render(result: ExperimentResult, path: str) -> str:
    x, ys, group = PLOT_LAYOUT[result.name]
    series = defaultdict(lambda: ([], []))
    for row in result.rows:
        for y in ys:
            key = y if group is None else "%s %s=%g" % (y, group, row[group])
            series[key][0].append(row[x])
            series[key][1].append(row[y])
    fig, ax = plt.subplots()
    for label, (xs, vs) in series.items():
        ax.plot(xs, vs, marker="o", label=label)
    ax.set_xlabel(x)
    ax.set_title(result.name)
    ax.legend(fontsize="small")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
