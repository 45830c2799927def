"""Command-line runner: ``qprobe {constants,qfi-scan,bound-sweep,adaptive}``.

Each command writes comma-separated UTF-8 output with a header row and
numbers at 12 significant digits. Exit codes: 0 ok, 2 config error,
3 self-check failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import fisher
from .attenuation import c_beta
from .bayes import AdaptiveConfig, run_protocol
from .config import ConfigError, ExperimentConfig, load_config
from .control import CPMG, CW, FID
from .model import ProbeModel
from .spectra import OhmicSpectrum, OrnsteinUhlenbeckSpectrum

EXIT_OK, EXIT_CONFIG, EXIT_SELFCHECK = 0, 2, 3


def fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.12g}"
    return str(value)


def write_csv(path, header, rows):
    """Write rows to ``path`` ('-' for stdout)."""
    if str(path) == "-":
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        w.writerows([fmt(v) for v in r] for r in rows)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows([fmt(v) for v in r] for r in rows)


def _sibling(path, suffix, ext=".csv"):
    p = Path(path)
    return p.with_name(p.stem + suffix + ext)


# --- constants ----------------------------------------------------------------

# name -> (reference, tolerance)
SELF_CHECKS = {
    "J0": (0.7968, 5e-4),
    "eps0": (2.484, 5e-3),
    "J1": (0.106, 1e-3),
    "eps1": (2.04, 1e-2),
    "c_beta_CPMG_2": (1.0 / 12.0, 1e-4),
    "c_beta_CW_2": (1.0 / math.pi ** 2, 1e-4),
}


def cmd_constants():
    """Rows ``(name, value, reference, tolerance, pass)`` and the overall verdict."""
    bc = fisher.bound_constants()
    values = {"J0": bc.J0, "eps0": bc.eps0, "J1": bc.J1, "eps1": bc.eps1}
    for beta in range(2, 9, 2):
        values[f"c_beta_CW_{beta}"] = c_beta(beta, CW)
        values[f"c_beta_CPMG_{beta}"] = c_beta(beta, CPMG)
    for s in (0.5, 2.0, 3.0):
        for ctl in (CW, CPMG):
            values[f"c_s_{ctl}_{s:g}"] = fisher.c_s_single(s, ctl)
    rows, ok = [], True
    for name, v in values.items():
        if name in SELF_CHECKS:
            ref, tol = SELF_CHECKS[name]
            passed = abs(v - ref) <= tol
            ok &= passed
            rows.append((name, v, ref, tol, passed))
        else:
            rows.append((name, v, "", "", ""))
    return rows, ok


# --- qfi scan -----------------------------------------------------------------

def _model(cfg, kind=None, n=None, backend=None):
    sp = cfg.spectrum.build()
    return ProbeModel(
        sp,
        kind or cfg.control.kind,
        n if n is not None else cfg.control.n,
        cfg.estimation.target,
        backend or cfg.estimation.backend,
    )


def cmd_qfi_scan(cfg):
    """Scan rows ``(t, coherence, J, QFI, relative_error, argmax)``; the refined optimum is inserted."""
    model = _model(cfg)
    sc = cfg.scan
    rep = fisher.maximize_qfi_numeric(model, (sc.t_min, sc.t_max), n_grid=sc.n_points)
    ts = np.geomspace(sc.t_min, sc.t_max, sc.n_points)
    ts = np.unique(np.append(ts, rep.t_opt))
    rows = []
    for t in ts:
        res = model.result(t)
        f = fisher.qfi(res)
        rows.append((t, math.exp(-res.J), res.J, f, fisher.relative_error(f, model.x_value), t == rep.t_opt))
    return rows, rep


# --- bound sweep --------------------------------------------------------------

def _sweep_point(args):
    g_tau, family, param, tau, margin = args
    g = g_tau / tau
    if family == "ou":
        sp = OrnsteinUhlenbeckSpectrum(g, tau, int(param))
        label = f"ou_beta{int(param)}"
    else:
        sp = OhmicSpectrum(g, tau, float(param))
        label = f"ohmic_s{param:g}"
    out = []
    kind, n, t_guess = fisher.optimal_control(sp, margin)
    m = ProbeModel(sp, kind, n, "tau_c")
    rep = fisher.minimal_error(m, (t_guess / 5.0, t_guess * 5.0))
    out.append((g_tau, label, kind, n, rep))
    mf = ProbeModel(sp, FID, 1, "tau_c")
    rep = fisher.minimal_error(mf, fisher.fid_time_range(sp), n_grid=240)
    out.append((g_tau, label, FID, 1, rep))
    return out


SWEEP_HEADER = ["g_tau", "spectrum", "control", "N", "t_opt", "J", "alpha", "min_epsilon", "bound", "ratio"]


def cmd_bound_sweep(cfg, threads=1):
    sw = cfg.sweep
    jobs = [(gt, fam, p, sw.tau_c, sw.margin) for gt in sw.g_tau for fam, p in (("ou", sw.beta), ("ohmic", sw.s))]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_sweep_point, jobs))
    else:
        parts = [_sweep_point(j) for j in jobs]
    rows = []
    for gt, label, kind, n, rep in sorted((p for part in parts for p in part), key=lambda r: (r[0], r[1], r[2])):
        rows.append((gt, label, kind, n, rep.t_opt, rep.J, rep.alpha, rep.relative_error, rep.ultimate_bound, rep.ratio_to_bound))
    return rows


# --- adaptive -----------------------------------------------------------------

TRAJ_HEADER = ["arm", "realization", "m", "t", "outcome", "mean", "std", "relative_error", "backend"]
ENS_HEADER = ["arm", "n_measurements", "mean_t", "mean_relative_error", "rmse_relative", "t_opt", "bound"]


def _adaptive_config(cfg, kind, n):
    est = cfg.estimation
    model = _model(cfg, kind, n)
    truth = _model(cfg, kind, n, est.truth_backend)
    x = model.x_value
    return AdaptiveConfig(
        model=model,
        x_true=x,
        prior_range=(est.prior_min * x, est.prior_max * x),
        n_measurements=est.n_measurements,
        grid_size=est.grid_size,
        spacing=est.spacing,
        n_candidates=est.n_candidates,
        candidate_span=est.candidate_span,
        seed=est.seed,
        realizations=est.realizations,
        truth=truth,
        refine=est.refine,
    )


def cmd_adaptive(cfg, threads=1):
    """Run the main arm (and an optional baseline arm); returns ``(trajectory_rows, ensemble_rows, arms)``."""
    est = cfg.estimation
    arms = [(cfg.control.kind, cfg.control.n)]
    if est.baseline:
        arms.append((est.baseline, est.baseline_n))
    traj, ens, summary = [], [], {}
    for kind, n in arms:
        acfg = _adaptive_config(cfg, kind, n)
        res = run_protocol(acfg, threads=threads)
        label = acfg.model.kind if acfg.model.kind == FID else f"{acfg.model.kind}{acfg.model.n}"
        for rec in res.trajectories:
            for m in range(len(rec)):
                traj.append((label, rec.index, m + 1, rec.t[m], int(rec.outcome[m]), rec.mean[m], rec.std[m],
                             rec.relative_error[m], rec.backend))
        t_opt = fisher.maximize_qfi_numeric(
            acfg.model.with_x(acfg.x_true),
            (res.t_opt_estimate / 50.0, res.t_opt_estimate * 50.0), n_grid=400,
        ).t_opt if est.n_measurements else math.nan
        nm = np.arange(1, est.n_measurements + 1)
        bound = fisher.bound_constants().eps0 / (acfg.model.alpha * np.sqrt(nm))
        if est.n_measurements:
            mt, me, rm = res.mean_t, res.mean_relative_error, res.rmse_relative
            for i, k in enumerate(nm):
                ens.append((label, k, mt[i], me[i], rm[i], t_opt, bound[i]))
            summary[label] = (nm, mt, me, t_opt, bound)
    return traj, ens, summary


# --- entry point --------------------------------------------------------------

def _parser():
    p = argparse.ArgumentParser(prog="qprobe", description="Qubit-probe noise spectroscopy experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, needs_cfg in (("constants", False), ("qfi-scan", True), ("bound-sweep", True), ("adaptive", True)):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=needs_cfg, help="experiment config (INI)")
        sp.add_argument("--seed", type=int, default=None, help="override estimation.seed (u64)")
        sp.add_argument("--out", default=None, help="output CSV path ('-' for stdout)")
        sp.add_argument("--threads", type=int, default=1, help="worker processes")
        sp.add_argument("--plot", action="store_true", help="also write a PNG next to the CSV")
    return p


def _resolve(args):
    cfg = load_config(args.config) if args.config else ExperimentConfig(kind=args.command)
    if cfg.kind != args.command:
        raise ConfigError(f"config is for '{cfg.kind}', not '{args.command}' (set experiment.kind)")
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        cfg = dataclasses.replace(cfg, estimation=dataclasses.replace(cfg.estimation, seed=args.seed))
    if args.threads < 1:
        raise ConfigError("--threads must be at least 1")
    return cfg


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        cfg = _resolve(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or (cfg.output if args.config else "-")
    png = _sibling(out, "", ".png") if args.plot and out != "-" else None

    if args.command == "constants":
        rows, ok = cmd_constants()
        write_csv(out, ["name", "value", "reference", "tolerance", "pass"], rows)
        if not ok:
            print("self-check failed", file=sys.stderr)
            return EXIT_SELFCHECK
        return EXIT_OK

    try:
        if args.command == "qfi-scan":
            rows, rep = cmd_qfi_scan(cfg)
            write_csv(out, ["t", "coherence", "J", "QFI", "relative_error", "argmax"], rows)
            if png:
                from .plotting import plot_qfi_scan

                arr = np.array([r[:5] for r in rows], dtype=float)
                plot_qfi_scan(png, arr[:, 0], arr[:, 1], arr[:, 4], rep.t_opt)
        elif args.command == "bound-sweep":
            rows = cmd_bound_sweep(cfg, args.threads)
            write_csv(out, SWEEP_HEADER, rows)
            if png:
                from .plotting import plot_bound_sweep

                plot_bound_sweep(png, [dict(zip(SWEEP_HEADER, r)) for r in rows])
        else:
            traj, ens, summary = cmd_adaptive(cfg, args.threads)
            write_csv(out, TRAJ_HEADER, traj)
            write_csv("-" if out == "-" else _sibling(out, "_ensemble"), ENS_HEADER, ens)
            if png and summary:
                from .plotting import plot_adaptive

                plot_adaptive(png, summary)
    except ValueError as exc:
        # invalid physical setup (e.g. prior excludes truth, regime unreachable)
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
