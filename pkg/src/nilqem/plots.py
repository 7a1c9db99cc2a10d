"""Figure rendering for the report path.

matplotlib is imported lazily so library users who never render figures pay
no import cost; the CSV/JSON outputs stay readable without any of this.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_curve_figure(rows, path: str | Path, unmitigated: float | None = None) -> Path:
    """MSE against neighbor count, log-scaled, from `curve` rows."""
    plt = _pyplot()
    path = Path(path)
    s = [r[0] for r in rows]
    train = [r[1] for r in rows]
    test = [r[2] for r in rows]
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.plot(s, train, "o-", label="train MSE")
    if not all(math.isnan(v) for v in test):
        ax.plot(s, test, "s-", label="test MSE")
    if unmitigated is not None:
        ax.axhline(unmitigated, color="gray", ls="--", lw=1, label="unmitigated")
    ax.set_xlabel("number of neighbor circuits")
    ax.set_ylabel("MSE")
    ax.set_yscale("log")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_prediction_figure(labels, predictions, path: str | Path, mse: float | None = None) -> Path:
    """Mitigated predictions against ideal values for the test circuits."""
    plt = _pyplot()
    path = Path(path)
    labels = np.asarray(labels)
    predictions = np.asarray(predictions)
    fig, ax = plt.subplots(figsize=(4.2, 4.0))
    lo = float(min(labels.min(), predictions.min()))
    hi = float(max(labels.max(), predictions.max()))
    pad = 0.05 * (hi - lo + 1e-9)
    ax.plot([lo - pad, hi + pad], [lo - pad, hi + pad], color="gray", lw=1)
    ax.plot(labels, predictions, ".", ms=4, alpha=0.6)
    ax.set_xlabel("ideal expectation value")
    ax.set_ylabel("mitigated prediction")
    if mse is not None:
        ax.set_title(f"test MSE = {mse:.3e}", fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_comparison_figure(comparisons: dict[str, float], path: str | Path) -> Path:
    """Bar chart of method MSEs (log scale)."""
    plt = _pyplot()
    path = Path(path)
    names = list(comparisons)
    values = [comparisons[k] for k in names]
    fig, ax = plt.subplots(figsize=(4.6, 3.4))
    ax.bar(range(len(names)), values, color="#4878cf")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=20, ha="right")
    ax.set_ylabel("MSE")
    ax.set_yscale("log")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
