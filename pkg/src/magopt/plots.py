"""Rendering of report tables and simulation output to png files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .reports import RATE_FIGURE_PAIRS, BRANCHES, TableSpec

_BRANCH_LABELS = {
    "magnetic": "magnetic (w only)",
    "optomech": "optomechanical (rho only)",
    "combined_neg": "combined, delta < 0",
    "combined_pos": "combined, delta > 0",
}

_BRANCH_STYLE = {
    "magnetic": dict(color="tab:blue", linestyle="-"),
    "optomech": dict(color="black", linestyle="--"),
    "combined_neg": dict(color="tab:red", linestyle="-"),
    "combined_pos": dict(color="tab:purple", linestyle=":"),
}


def _masked(values) -> np.ndarray:
    return np.array(
        [np.nan if v is None or v == "" else float(v) for v in values]
    )


def render_table(spec: TableSpec, path: str) -> None:
    """One png per table: thresholds or transport rates against x."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    x = _masked(spec.columns[spec.x_key])
    if spec.kind == "rates":
        colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
        for (t_uk, _), color in zip(RATE_FIGURE_PAIRS, colors):
            label = f"{t_uk:g}uK"
            ax.plot(x, _masked(spec.columns[f"r_{label}"]), color=color,
                    linestyle="-", label=f"ballistic, {t_uk:g} uK")
            ax.plot(x, _masked(spec.columns[f"dq2_{label}"]), color=color,
                    linestyle="--", label=f"diffusive, {t_uk:g} uK")
        ax.set_ylabel("relaxation rate [1/s]")
    else:
        for branch in BRANCHES:
            y = _masked(spec.columns[f"i_{branch}_mW_cm2"])
            if np.all(np.isnan(y)):
                continue
            ax.plot(x, y, label=_BRANCH_LABELS[branch], **_BRANCH_STYLE[branch])
        ax.set_ylabel("threshold pump intensity [mW/cm^2]")
    if spec.logx:
        ax.set_xscale("log")
    if spec.logy:
        ax.set_yscale("log")
    ax.set_xlabel(spec.x_key)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_diagnostics(columns: dict, path: str) -> None:
    """Tracked mode amplitudes against time, log scale."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    t = _masked(columns["time"])
    for name, label in (("amp_rho_q", "density mode"),
                        ("amp_w_q", "orientation mode")):
        amp = _masked(columns[name])
        if np.any(amp > 0):
            ax.semilogy(t, np.where(amp > 0, amp, np.nan), label=label)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("mode amplitude")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_state(rho: np.ndarray, w: np.ndarray, spacing: float,
                 path: str) -> None:
    """Final-state profiles: line plots in 1D, image pair in 2D."""
    if rho.ndim == 1:
        fig, ax = plt.subplots(figsize=(6.0, 4.2))
        x_um = np.arange(rho.size) * spacing * 1e6
        ax.plot(x_um, rho, label="rho")
        ax.plot(x_um, w, label="w")
        ax.set_xlabel("x [um]")
        ax.set_ylabel("field value")
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=8)
    else:
        fig, axes = plt.subplots(1, 2, figsize=(8.0, 3.6))
        extent = (0, rho.shape[1] * spacing * 1e6,
                  0, rho.shape[0] * spacing * 1e6)
        for ax, data, name in zip(axes, (rho, w), ("rho", "w")):
            im = ax.imshow(data, origin="lower", extent=extent, aspect="equal")
            ax.set_title(name)
            ax.set_xlabel("y [um]")
            ax.set_ylabel("x [um]")
            fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
