"""Convergence plots of residual histories (matplotlib, written to file)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .afpi import AfpiReport  # noqa: E402
from .iterations import IterationReport  # noqa: E402

STYLE = {"font.size": 10, "axes.grid": True, "grid.alpha": 0.3, "lines.markersize": 4}


def _series(label, report):
    if isinstance(report, AfpiReport):
        ks = [s.k for s in report.steps]
        yield f"{label} X_hat", ks, [s.nres_xhat for s in report.steps]
        yield f"{label} H", ks, [s.nres_h for s in report.steps]
    elif isinstance(report, IterationReport):
        yield label, list(range(len(report.nres_history))), report.nres_history


def plot_convergence(reports: dict, path: str, title: str = "") -> str:
    """Semilog plot of NRes against the outer iteration for each report.

    Zero or missing residuals are dropped (they have no logarithm).
    """
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 4))
        for label, report in reports.items():
            for name, ks, ys in _series(label, report):
                pts = [(k, y) for k, y in zip(ks, ys) if y is not None and y > 0]
                if pts:
                    ax.semilogy(*zip(*pts), marker="o", label=name)
        ax.set_xlabel("k")
        ax.set_ylabel("NRes")
        if title:
            ax.set_title(title)
        if ax.lines:
            ax.legend()
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)
    return path
