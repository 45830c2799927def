"""Optional PNG renderings of the CLI outputs (matplotlib, headless)."""

from __future__ import annotations

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_qfi_scan(path, t, coherence, rel_err, t_opt):
    plt = _pyplot()
    fig, (a1, a2) = plt.subplots(2, 1, sharex=True, figsize=(5, 5))
    a1.semilogx(t, coherence)
    a1.set_ylabel("coherence")
    a2.loglog(t, rel_err)
    a2.axvline(t_opt, ls="--", c="k", lw=0.8)
    a2.set_ylabel("relative error")
    a2.set_xlabel("t (us)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_bound_sweep(path, rows):
    """rows: dicts with g_tau, spectrum, control, min_epsilon, bound."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 4))
    keys = sorted({(r["spectrum"], r["control"]) for r in rows})
    for spec, ctl in keys:
        sel = [r for r in rows if r["spectrum"] == spec and r["control"] == ctl]
        ax.loglog([r["g_tau"] for r in sel], [r["min_epsilon"] for r in sel], "o-", label=f"{spec} {ctl}")
    for spec in sorted({r["spectrum"] for r in rows}):
        sel = [r for r in rows if r["spectrum"] == spec]
        ax.axhline(sel[0]["bound"], ls="--", lw=0.8, c="k")
    ax.set_xlabel("g tau_c")
    ax.set_ylabel("minimal relative error")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_adaptive(path, arms):
    """arms: {label: (n, mean_t, mean_eps, t_opt, bound)}."""
    plt = _pyplot()
    fig, (a1, a2) = plt.subplots(2, 1, sharex=True, figsize=(5, 6))
    for label, (n, mt, eps, t_opt, bound) in arms.items():
        a1.semilogx(n, mt, label=label)
        a1.axhline(t_opt, ls="--", lw=0.8)
        a2.loglog(n, eps, label=label)
        a2.loglog(n, bound, ls="--", lw=0.8)
    a1.set_ylabel("mean t_m (us)")
    a2.set_ylabel("relative error")
    a2.set_xlabel("N_m")
    a1.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
