"""Figure output for traces and threshold sweeps."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

STYLE = {
    "font.family": "serif",
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.2,
    "svg.hashsalt": "hexactrl",  # stable element ids across runs
}

# No timestamp so repeated runs produce identical files.
_METADATA = {"Date": None}


def _save(fig, path):
    fmt = str(path).rsplit(".", 1)[-1].lower()
    fig.savefig(path, format=fmt, metadata=_METADATA if fmt in ("svg", "pdf") else None)
    plt.close(fig)


def plot_trace(trace, path, title: str = "") -> None:
    """Four stacked panels (h, phi, theta, psi) against time, with setpoints dashed."""
    sp = trace.setpoints
    panels = [
        ("h [m]", 0, sp.h),
        (r"$\phi$ [rad]", 1, sp.phi),
        (r"$\theta$ [rad]", 2, sp.theta),
        (r"$\psi$ [rad]", 3, sp.psi),
    ]
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(4, 1, sharex=True, figsize=(6.0, 6.5))
        for ax, (label, col, target) in zip(axes, panels):
            ax.plot(trace.t, trace.x[:, col], color="C0")
            ax.axhline(target, color="0.4", ls="--", lw=0.8)
            ax.set_ylabel(label)
            ax.grid(alpha=0.3)
        axes[-1].set_xlabel("t [s]")
        fault_rows = np.flatnonzero(np.any(np.diff(trace.eta, axis=0) != 0, axis=1))
        for k in fault_rows:
            for ax in axes:
                ax.axvline(trace.t[k + 1], color="C3", lw=0.8, alpha=0.6)
        heading = title or "trace"
        axes[0].set_title(f"{heading}: {trace.classification}")
        fig.tight_layout()
        _save(fig, path)


def plot_sweep(rows, path, analytic: float | None = None, rotor: int | None = None) -> None:
    """Interior margins of the degraded sets against maximum rotor lift."""
    K = np.array([r["max_lift_n"] for r in rows])
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6.0, 3.5))
        ax.plot(K, [r["margin_ua"] for r in rows], label=r"allocated $\bar U^a$", color="C0")
        ax.plot(K, [r["margin_u0"] for r in rows], label=r"exact $\bar U^0$", color="C1")
        ax.axhline(0.0, color="0.3", lw=0.8)
        if analytic is not None:
            ax.axvline(analytic, color="C3", ls="--", lw=0.8, label=r"$\frac{5}{18} m g$")
        ax.set_xlabel("maximum lift K [N]")
        ax.set_ylabel("interior margin at hover")
        if rotor is not None:
            ax.set_title(f"rotor {rotor} failed")
        ax.legend()
        ax.grid(alpha=0.3)
        fig.tight_layout()
        _save(fig, path)
