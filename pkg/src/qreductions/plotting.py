"""Report figures, rendered headless to PNG files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_META = {"Software": None}


def plot_convergence(evaluation, path, title: str = "") -> None:
    """Running empirical error with a 3 SE band and the exact error."""
    run = evaluation.running_error()
    t = np.arange(1, run.size + 1)
    band = 3 * np.sqrt(np.clip(run * (1 - run), 0, None) / t)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(t, run, lw=1, label="empirical error")
    ax.fill_between(t, run - band, run + band, alpha=0.25, label="3 SE")
    if evaluation.exact_error is not None:
        ax.axhline(evaluation.exact_error, color="k", ls="--", lw=1, label="exact error")
    ax.set_xscale("log")
    ax.set_xlabel("trials")
    ax.set_ylabel("error")
    ax.set_title(title)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=_META)
    plt.close(fig)


def plot_bounds(reports, path) -> None:
    """Bound value against exact PGM error, one panel per bound and interpretation."""
    groups: dict[tuple[str, str], list] = {}
    for r in reports:
        groups.setdefault((r.bound_name, r.interpretation), []).append(r)
    keys = sorted(groups)
    cols = 4
    rows = -(-len(keys) // cols)
    fig, axes = plt.subplots(rows, cols, figsize=(3.2 * cols, 3 * rows), squeeze=False)
    for ax, key in zip(axes.flat, keys):
        g = groups[key]
        x = np.array([r.exact_error for r in g])
        y = np.array([r.bound_value for r in g])
        ok = np.array([r.holds for r in g])
        ax.scatter(x[ok], y[ok], s=6, c="tab:blue")
        ax.scatter(x[~ok], y[~ok], s=6, c="tab:red")
        lo, hi = min(x.min(), y.min(), 0.0), max(x.max(), y.max(), 1.0)
        ax.plot([lo, hi], [lo, hi], "k:", lw=0.8)
        ax.set_title(f"{key[0]}\n{key[1]} ({(~ok).mean():.0%} violated)", fontsize=8)
        ax.set_xlabel("exact PGM error", fontsize=8)
        ax.tick_params(labelsize=7)
    for ax in axes.flat[len(keys):]:
        ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=_META)
    plt.close(fig)
