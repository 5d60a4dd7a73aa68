"""Figure rendering for benchmark reports.

Each function takes the report dict produced by hac.scenarios and writes one
PNG next to the delimited output.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_PART_COLORS = {
    "found": "#6aa84f",
    "wrong": "#e06666",
    "duplicate": "#6d9eeb",
    "missing": "#674ea7",
}


def render_characters(report: dict, path: str) -> None:
    """Stacked found/wrong/duplicate/missing bars per method and n."""
    n_values = report["n_values"]
    methods = ("hac", "random", "mis")
    agg = report["aggregate"]
    fig, axes = plt.subplots(1, len(n_values), figsize=(3.2 * len(n_values), 3.4), sharey=True)
    if len(n_values) == 1:
        axes = [axes]
    for ax, n in zip(axes, n_values):
        bottoms = np.zeros(len(methods))
        for part, color in _PART_COLORS.items():
            vals = np.array([agg[f"{m}_n{n}_{part}_fraction"] for m in methods])
            ax.bar(range(len(methods)), vals, bottom=bottoms, color=color, label=part)
            bottoms += vals
        ax.set_xticks(range(len(methods)))
        ax.set_xticklabels([m.upper() for m in methods])
        ax.set_title(f"top {n}")
        ax.set_ylim(0, 1.02)
    axes[0].set_ylabel("fraction of requested outputs")
    axes[-1].legend(loc="lower right", fontsize=8)
    fig.suptitle("Recovering the main entities")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_guarantees(report: dict, path: str) -> None:
    """Distance-to-nearest-output distributions for dense vs sparse points."""
    dense = np.asarray(report["distance_distributions"]["dense"])
    sparse = np.asarray(report["distance_distributions"]["sparse"])
    r = report["r"]
    finite = np.concatenate([dense[np.isfinite(dense)], sparse[np.isfinite(sparse)]])
    hi = float(finite.max()) if finite.size else 1.0
    bins = np.linspace(0.0, max(hi, r * 1.5), 60)
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.hist(np.clip(dense, 0, bins[-1]), bins=bins, density=True, alpha=0.6,
            color="tab:blue", label="dense points")
    ax.hist(np.clip(sparse, 0, bins[-1]), bins=bins, density=True, alpha=0.6,
            color="#6aa84f", label="sparse points")
    ax.axvline(r, color="k", linestyle="--", linewidth=1, label=f"r = {r}")
    ax.set_xlabel("distance to closest output")
    ax.set_ylabel("density")
    agg = report["aggregate"]
    ax.set_title(
        f"dense within r: {agg['dense_covered']:.1%}   "
        f"sparse within r: {agg['sparse_near']:.1%}"
    )
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_household(report: dict, path: str) -> None:
    """Per-object rank of the true top human, averaged over seeds."""
    per_seed = report["per_seed"]
    objects = [row["object"] for row in per_seed[0]["objects"]]
    fig, ax = plt.subplots(figsize=(7.0, 3.6))
    width = 0.8 / len(per_seed)
    for j, seed_row in enumerate(per_seed):
        ranks = []
        for row in seed_row["objects"]:
            if row["true_top"] is None:
                ranks.append(0.0)  # untouched: no rank to show
            else:
                ranks.append(row["rank"] if row["rank"] is not None else len(objects))
        xs = np.arange(len(objects)) + j * width
        ax.bar(xs, ranks, width=width, label=f"seed {seed_row['seed']}")
    ax.axhline(1.0, color="k", linewidth=0.8, linestyle="--")
    ax.set_xticks(np.arange(len(objects)) + 0.4)
    ax.set_xticklabels(objects)
    ax.set_ylabel("rank of true top human (0 = untouched)")
    ax.set_title("Who moved each object?")
    ax.legend(fontsize=7, ncols=min(5, len(per_seed)))
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


RENDERERS = {
    "characters": render_characters,
    "guarantees": render_guarantees,
    "household": render_household,
}
