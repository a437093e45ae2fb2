"""Figure helpers for reports (matplotlib, non-interactive backend)."""

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
}


def new_figure(width=6.0, height=None, ncols=1):
    golden_ratio = (math.sqrt(5) - 1.0) / 2.0
    if not height:
        height = width * golden_ratio
    with plt.rc_context(RC):
        fig, ax = plt.subplots(1, ncols, figsize=(width, height))
    return fig, ax


def save(fig, path):
    with plt.rc_context(RC):
        fig.tight_layout()
        fig.savefig(path)
    plt.close(fig)
    return path


def plot_series(series, path, xlabel, ylabel, title="", logx=False, errors=None):
    """Line plot of ``{name: (xs, ys)}``; ``errors`` maps name -> per-point stderr."""
    fig, ax = new_figure()
    for name, (xs, ys) in series.items():
        if errors and name in errors:
            ax.errorbar(xs, ys, yerr=errors[name], marker="o", ms=3, capsize=2, label=name)
        else:
            ax.plot(xs, ys, marker="o", ms=3, label=name)
    if logx:
        ax.set_xscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(series) > 1:
        ax.legend(frameon=False, ncol=2)
    return save(fig, path)


def plot_bars(labels, groups, path, ylabel, title=""):
    """Grouped bars; ``groups`` maps a legend name to one value per label."""
    fig, ax = new_figure(width=max(6.0, 0.35 * len(labels)))
    width = 0.8 / max(len(groups), 1)
    for i, (name, vals) in enumerate(groups.items()):
        xs = [j + (i - (len(groups) - 1) / 2) * width for j in range(len(labels))]
        ax.bar(xs, vals, width=width, label=name)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=6)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    return save(fig, path)
