"""Optional PNG rendering for CLI artifacts (``--plot PATH``).

matplotlib is imported lazily with the Agg backend so the library and the
data path never need a display.
"""
import math

import numpy as np


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _figure(plt, width=6.0):
    golden = (math.sqrt(5) - 1.0) / 2.0
    fig, ax = plt.subplots(figsize=(width, width * golden), dpi=120)
    ax.tick_params(direction="in", top=True, right=True)
    return fig, ax


def line_plot(path, x, curves, xlabel, ylabel, title="", logy=False, markers=False):
    """``curves`` is a list of (label, y) pairs sharing the abscissa ``x``."""
    plt = _pyplot()
    fig, ax = _figure(plt)
    style = "o-" if markers else "-"
    for label, y in curves:
        ax.plot(x, y, style, lw=1.2, ms=3, label=label)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title, fontsize=10)
    if len(curves) > 1:
        ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def map_plot(path, x, y, values, xlabel, ylabel, title="", cbar="relative"):
    """Filled contour of ``values[i, j]`` over (x[i], y[j])."""
    plt = _pyplot()
    fig, ax = _figure(plt)
    v = np.asarray(values, float)
    top = v.max() if v.size and v.max() > 0 else 1.0
    if len(x) > 1 and len(y) > 1:
        cs = ax.contourf(np.asarray(x), np.asarray(y), (v / top).T, levels=20, cmap="viridis")
        fig.colorbar(cs, ax=ax, label=cbar)
    else:
        # A single row or column: fall back to a line.
        xs, row = (x, v[:, 0]) if len(y) == 1 else (y, v[0])
        ax.plot(xs, row / top)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
