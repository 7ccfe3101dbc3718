"""Figure rendering for run artifacts (headless, file output only)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_regret_figure(report, path, title: str = "") -> None:
    """Cumulative regret curves plus the time-averaged swap regret."""
    rounds = np.arange(1, report.phi_curve.size + 1)
    fig, (ax_cum, ax_avg) = plt.subplots(1, 2, figsize=(10, 4))
    ax_cum.plot(rounds, report.external_curve, label="external")
    ax_cum.plot(rounds, report.internal_curve, label="internal")
    ax_cum.plot(rounds, report.phi_curve, label="swap mixture", linestyle="--")
    if report.decomposition is not None:
        ax_cum.plot(rounds, report.decomposition["ftpl_curve"], label="leader term", alpha=0.6)
        ax_cum.plot(rounds, report.decomposition["sampling_curve"], label="sampling term", alpha=0.6)
    ax_cum.set_xlabel("round")
    ax_cum.set_ylabel("cumulative regret")
    ax_cum.legend(fontsize=8)
    ax_cum.grid(alpha=0.3)

    ax_avg.plot(rounds, report.phi_curve / rounds, label="swap regret / t")
    ax_avg.plot(rounds, 1.0 / np.sqrt(rounds), label="1/sqrt(t)", linestyle=":")
    ax_avg.set_xlabel("round")
    ax_avg.set_ylabel("time-averaged")
    ax_avg.set_yscale("log")
    ax_avg.set_xscale("log")
    ax_avg.legend(fontsize=8)
    ax_avg.grid(alpha=0.3)

    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_ce_figure(eps_curve, path) -> None:
    """Equilibrium gap of the empirical joint play over time."""
    rounds = np.arange(1, len(eps_curve) + 1)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(rounds, eps_curve, label="equilibrium gap")
    ax.plot(rounds, 1.0 / np.sqrt(rounds), label="1/sqrt(t)", linestyle=":")
    ax.set_xlabel("round")
    ax.set_ylabel("gap")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
