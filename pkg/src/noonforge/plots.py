"""Figure rendering for fringe data and fits.

Every report path that writes a fringe CSV also drops a PNG next to it so
results can be eyeballed without a plotting session.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import pair_name
from .measurement import FringeData, FringeParams


def fringe_model(params: FringeParams, thetas: np.ndarray) -> np.ndarray:
    return params.offset / 2 + params.visibility / 2 * np.cos(8 * thetas + params.phase)


def save_fringe_plot(
    path: str | Path, data: FringeData, fit: FringeParams | None = None
) -> None:
    """Measured coincidence fraction vs analyzer angle, with the fitted
    sinusoid overlaid when available."""
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    p = data.p11()
    label = "normalized counts" if data.is_count_mode else "probability"
    ax.plot(data.thetas, p, "o", ms=5, color="tab:blue", label=label)
    if data.is_count_mode:
        totals = data.counts.sum(axis=1).astype(float)
        with np.errstate(divide="ignore", invalid="ignore"):
            err = np.sqrt(np.clip(p * (1 - p), 0, None) / np.where(totals > 0, totals, 1))
        ax.errorbar(data.thetas, p, yerr=err, fmt="none", ecolor="tab:blue", alpha=0.5)
    if fit is not None:
        dense = np.linspace(data.thetas[0], data.thetas[-1], 400)
        ax.plot(dense, fringe_model(fit, dense), "-", color="tab:red", label="fit")
    ax.set_xlabel(r"analyzer HWP angle $\theta$ (rad)")
    ax.set_ylabel(r"$P_{11}$")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(f"pair {pair_name(data.pair)}")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_bounds_plot(path: str | Path, f_lower: float, f_upper: float,
                     f_point: float | None = None, threshold: float = 2 / 3) -> None:
    """Fidelity interval against the biseparability threshold."""
    fig, ax = plt.subplots(figsize=(5.0, 2.4))
    ax.axhspan(f_lower, f_upper, color="tab:blue", alpha=0.3,
               label=f"bounds [{f_lower:.3f}, {f_upper:.3f}]")
    if f_point is not None:
        ax.axhline(f_point, color="tab:blue", lw=2, label=f"estimate {f_point:.3f}")
    ax.axhline(threshold, color="tab:red", ls="--", lw=1.5,
               label=f"biseparable bound {threshold:.3f}")
    ax.set_xlim(0, 1)
    ax.set_xticks([])
    ax.set_ylabel("fidelity")
    ax.set_ylim(0, 1.05)
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
