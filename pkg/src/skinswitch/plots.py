"""Optional figure rendering for experiment results.

Everything here is best-effort: data export never depends on it, and the
caller catches all exceptions. Output is vector graphics (SVG).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .experiments import ExperimentResult, ResultTable

_DIVERGING = "coolwarm"


def _spectrum_scatter(ax, re, im, ipr, tau):
    ipr = np.asarray(ipr)
    lim = max(np.abs(ipr).max(), 10 * tau)
    colors = np.clip(ipr / lim, -1, 1)
    gray = np.abs(ipr) <= tau
    ax.scatter(np.asarray(re)[gray], np.asarray(im)[gray], s=6, c="0.7")
    ax.scatter(np.asarray(re)[~gray], np.asarray(im)[~gray], s=8,
               c=colors[~gray], cmap=_DIVERGING, vmin=-1, vmax=1)
    ax.set_xlabel("Re E")
    ax.set_ylabel("Im E")


def _table(result: ExperimentResult, name: str) -> ResultTable | None:
    for t in result.tables:
        if t.name == name:
            return t
    return None


def emit(result: ExperimentResult, plotdir: Path, tau: float = 1e-3) -> list[Path]:
    plotdir.mkdir(parents=True, exist_ok=True)
    made: list[Path] = []

    def save(fig, name):
        p = plotdir / f"{name}.svg"
        fig.savefig(p, bbox_inches="tight")
        plt.close(fig)
        made.append(p)

    if result.experiment == "fig1":
        modes = _table(result, "modes")
        summary = _table(result, "summary")
        Ns = sorted(set(modes.column("N")))
        fig, axes = plt.subplots(1, len(Ns), figsize=(4 * len(Ns), 3.2))
        axes = np.atleast_1d(axes)
        rows = np.array(modes.rows, dtype=object)
        for ax, N in zip(axes, Ns):
            sel = rows[:, 0] == N
            _spectrum_scatter(ax, rows[sel, 2].astype(float),
                              rows[sel, 3].astype(float),
                              rows[sel, 4].astype(float), tau)
            ax.set_title(f"N = {N}")
        save(fig, "spectra_per_N")
        fig, ax = plt.subplots(figsize=(4.2, 3.2))
        srows = np.array(summary.rows, dtype=object)
        for N in Ns:
            sel = srows[:, 0] == N
            ax.plot(srows[sel, 1].astype(float), srows[sel, 2].astype(float),
                    "o-", label=f"N={N}")
        ax.set_xlabel("r")
        ax.set_ylabel("mean x-IPR")
        ax.legend()
        save(fig, "mean_ipr_vs_r")

    elif result.experiment == "fig2":
        curves = _table(result, "curves")
        rows = np.array(curves.rows, dtype=object)
        fig, ax = plt.subplots(figsize=(4.6, 3.4))
        tags = sorted({(r[0], r[1]) for r in curves.rows})
        for model, t0 in tags:
            sel = (rows[:, 0] == model) & (rows[:, 1] == t0)
            style = "s--" if model == "benchmark" else "o-"
            ax.plot(rows[sel, 2].astype(float), rows[sel, 3].astype(float),
                    style, label=f"{model} t0={t0}")
        ax.set_xlabel("L_y")
        ax.set_ylabel("mean x-IPR")
        ax.axhline(0, color="0.8", lw=0.8)
        ax.legend(fontsize=7)
        save(fig, "mean_ipr_vs_Ly")

    elif result.experiment == "fig3":
        for panel in ("panel_a_modes", "panel_b_modes"):
            tab = _table(result, panel)
            fig, ax = plt.subplots(figsize=(4.2, 3.2))
            rows = np.array(tab.rows, dtype=object)
            _spectrum_scatter(ax, rows[:, 0].astype(float),
                              rows[:, 1].astype(float),
                              rows[:, 2].astype(float), tau)
            save(fig, panel)
        traj = _table(result, "trajectory")
        fig, ax = plt.subplots(figsize=(4.6, 3.0))
        ax.plot(traj.column("t"), traj.column("x_cm"))
        ax.set_xlabel("t")
        ax.set_ylabel("x_cm")
        save(fig, "trajectory")

    elif result.experiment in ("fig4", "appB"):
        spectra = _table(result, "spectra")
        rows = np.array(spectra.rows, dtype=object)
        beta_ys = sorted({r[0] for r in spectra.rows}, reverse=True)
        fig, axes = plt.subplots(1, len(beta_ys),
                                 figsize=(3.3 * len(beta_ys), 3.0))
        axes = np.atleast_1d(axes)
        for ax, by in zip(axes, beta_ys):
            for bx, size in ((0.2, 4), (0.0, 12)):   # thin reference under thick
                sel = (rows[:, 0] == by) & (rows[:, 1] == bx)
                if not sel.any():
                    continue
                ipr = rows[sel, 4].astype(float)
                lim = max(np.abs(ipr).max(), 10 * tau)
                ax.scatter(rows[sel, 2].astype(float), rows[sel, 3].astype(float),
                           s=size, c=np.clip(ipr / lim, -1, 1),
                           cmap=_DIVERGING, vmin=-1, vmax=1,
                           alpha=0.45 if bx else 1.0)
            ax.set_title(f"beta_y = {by:g}", fontsize=8)
        save(fig, "spectra_sweep")

    elif result.experiment == "fig5":
        tp = _table(result, "trajectory_ypbc")
        to = _table(result, "trajectory_yobc")
        fig, ax = plt.subplots(figsize=(4.8, 3.2))
        ax.plot(tp.column("t"), tp.column("x_cm"), label="y-PBC")
        ax.plot(to.column("t"), to.column("x_cm"), label="y-OBC")
        onset = result.notes.get("divergence_onset")
        if onset is not None:
            ax.axvline(onset, color="0.6", ls=":", label=f"diverge t={onset:g}")
        ax.set_xlabel("t")
        ax.set_ylabel("x_cm")
        ax.legend()
        save(fig, "xcm_comparison")

    elif result.experiment == "appA":
        prof = _table(result, "profiles")
        rows = np.array(prof.rows, dtype=object)
        Lys = sorted({r[1] for r in prof.rows})
        fig, axes = plt.subplots(1, len(Lys), figsize=(3.4 * len(Lys), 2.8))
        axes = np.atleast_1d(axes)
        for ax, Ly in zip(axes, Lys):
            for t0 in sorted({r[0] for r in prof.rows}):
                sel = (rows[:, 0] == t0) & (rows[:, 1] == Ly)
                ax.plot(rows[sel, 2].astype(float), rows[sel, 3].astype(float),
                        label=f"t0={t0}")
            ax.set_title(f"L_y = {Ly}", fontsize=8)
            ax.set_xlabel("x")
        axes[0].set_ylabel("summed density")
        axes[-1].legend(fontsize=7)
        save(fig, "profiles")

    elif result.experiment == "appC":
        spectra = _table(result, "spectra")
        rows = np.array(spectra.rows, dtype=object)
        shapes = sorted({(r[0], r[1]) for r in spectra.rows}, reverse=True)
        fig, axes = plt.subplots(1, len(shapes), figsize=(3.3 * len(shapes), 3.0))
        axes = np.atleast_1d(axes)
        for ax, (lx, ly) in zip(axes, shapes):
            sel = (rows[:, 0] == lx) & (rows[:, 1] == ly)
            _spectrum_scatter(ax, rows[sel, 2].astype(float),
                              rows[sel, 3].astype(float),
                              rows[sel, 4].astype(float), tau)
            ax.set_title(f"{lx} x {ly}", fontsize=8)
        save(fig, "spectra_shapes")

    elif result.experiment == "appD":
        spectra = _table(result, "spectra")
        rows = np.array(spectra.rows, dtype=object)
        for tag in sorted({r[0] for r in spectra.rows}):
            sel0 = rows[:, 0] == tag
            steps = sorted({r[1] for r in rows[sel0]})
            fig, axes = plt.subplots(1, len(steps),
                                     figsize=(2.6 * len(steps), 2.6))
            axes = np.atleast_1d(axes)
            for ax, st in zip(axes, steps):
                sel = sel0 & (rows[:, 1] == st)
                _spectrum_scatter(ax, rows[sel, 4].astype(float),
                                  rows[sel, 5].astype(float),
                                  rows[sel, 6].astype(float), tau)
                ax.set_title(f"step {st}", fontsize=7)
            save(fig, f"path_{tag}")
    return made
