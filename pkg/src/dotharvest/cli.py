"""Command-line entry point: configuration ingestion, subcommand dispatch,
deterministic seeding and tabular artifact output."""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .config import COMMANDS, ConfigError, DEFAULT_CONFIG, RunConfig, parse_config
from .correlations import default_tau_grid, g_hl, g_ll
from .counting import default_field_grids, ldf_surface
from .csvio import write_table
from .cycles import ALL_CLASSES, cycle_stats, dft_check, table_entropy
from .master import bias_sweep, observables, steady_state
from .model import build_generator, carnot
from .oscillation import minimize_all_methods
from .semistoch import semi_ensemble
from .trajectory import simulate


def _manifest(path, config_text, cfg, wall):
    import scipy
    lines = [
        "dotharvest run manifest",
        f"version: {__version__}",
        f"numpy: {np.__version__}",
        f"scipy: {scipy.__version__}",
        f"command: {cfg.command}",
        f"base_seed: {cfg.base_seed}",
        f"wall_seconds: {wall:.3f}",
        f"finished_at: {time.strftime('%Y-%m-%dT%H:%M:%S')}",
        "",
        "--- configuration echo ---",
        config_text.rstrip("\n"),
        "",
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))


def _simulate_star(args):
    params, duration, seed = args
    return simulate(params, duration, seed)


def _ensemble(cfg: RunConfig):
    jobs = [(cfg.params, cfg.duration, (cfg.base_seed, k)) for k in range(cfg.n_traj)]
    if cfg.threads > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            # map preserves submission order, so aggregation is scheduling independent
            return list(pool.map(_simulate_star, jobs, chunksize=8))
    return [_simulate_star(j) for j in jobs]


def _cmd_steady(cfg: RunConfig, out):
    obs = observables(cfg.params)
    eta = obs.efficiency if obs.efficiency is not None else float("nan")
    write_table(os.path.join(out, "steady.csv"),
                ("I_L", "J_H", "P", "eta", "sigma_dot", "eta_carnot"),
                [(obs.current_l, obs.heat_h, obs.power, eta, obs.entropy_rate,
                  carnot(cfg.params))])


def _cmd_sweep(cfg: RunConfig, out):
    lo = cfg.options.get("sweep.delta_mu_min", 1e-3)
    hi = cfg.options.get("sweep.delta_mu_max",
                         cfg.params.coulomb_u * max(carnot(cfg.params), 0.1))
    n = cfg.options.get("sweep.n_points", 200)
    rows = bias_sweep(cfg.params, np.linspace(lo, hi, n))
    write_table(os.path.join(out, "sweep.csv"),
                ("delta_mu", "I_L", "J_H", "P", "eta", "sigma_dot"), rows)


def _cmd_correlations(cfg: RunConfig, out):
    n = cfg.options.get("correlations.n_tau", 400)
    tmax = cfg.options.get("correlations.tau_max", 200.0)
    grid = default_tau_grid(n=n, t_max=tmax)
    cll = g_ll(cfg.params, grid)
    chl = g_hl(cfg.params, grid)
    write_table(os.path.join(out, "correlations.csv"), ("tau", "g_ll", "g_hl"),
                zip(grid.tolist(), cll.values.tolist(), chl.values.tolist()))


def _cmd_oscillation(cfg: RunConfig, out):
    seed = cfg.options.get("oscillation.seed", cfg.base_seed)
    results = minimize_all_methods(seed=seed, x=cfg.params.x)
    rows = [(r.method, *r.best_point, r.delta_min, r.evaluations) for r in results]
    write_table(os.path.join(out, "oscillation_search.csv"),
                ("method", "U", "T_W", "T_H", "delta_mu", "delta_min", "evaluations"),
                rows)


def _cmd_trajectories(cfg: RunConfig, out):
    trajectories = _ensemble(cfg)
    for k, traj in enumerate(trajectories[: min(4, len(trajectories))]):
        write_table(os.path.join(out, f"trajectory_{k:04d}.csv"), ("time", "label"),
                    [(ev.time, ev.label) for ev in traj.events])
    from .trajectory import residence_fractions, stochastic_intensity
    rows = [(k, len(t), stochastic_intensity(t), *residence_fractions(t))
            for k, t in enumerate(trajectories)]
    write_table(os.path.join(out, "trajectory_summary.csv"),
                ("index", "n_jumps", "intensity", "p00", "p01", "p10", "p11"), rows)


def _cmd_cycles(cfg: RunConfig, out):
    trajectories = _ensemble(cfg)
    stats = cycle_stats(trajectories, cfg.params)
    rows = []
    for cls in ALL_CLASSES:
        n = stats.counts[cls]
        mean_dur = float(np.mean(stats.durations[cls])) if n else float("nan")
        rows.append((cls, n, stats.rate(cls), mean_dur))
    write_table(os.path.join(out, "cycle_rates.csv"),
                ("class", "count", "rate", "mean_duration"), rows)
    for cls in ("C4", "C6"):
        durs = np.asarray(stats.durations[cls], dtype=float)
        if len(durs) == 0:
            continue
        hist, edges = np.histogram(durs, bins=np.arange(0.0, 20.0 + 0.25, 0.25),
                                   density=True)
        write_table(os.path.join(out, f"duration_hist_{cls}.csv"),
                    ("bin_left", "density"), zip(edges[:-1].tolist(), hist.tolist()))
    rows = []
    for row in dft_check(stats, min_counts=1):
        rows.append((row.cls,
                     row.log_ratio if row.log_ratio is not None else float("nan"),
                     table_entropy(cfg.params, row.cls), row.n_forward, row.n_reverse))
    write_table(os.path.join(out, "fluctuation_report.csv"),
                ("class", "log_ratio", "dsigma_analytic", "n_forward", "n_reverse"),
                rows)


def _cmd_ldf(cfg: RunConfig, out):
    n_lam = cfg.options.get("ldf.n_lambda", 45)
    n_xi = cfg.options.get("ldf.n_xi", 41)
    lams, xis = default_field_grids(cfg.params, n_lam=n_lam, n_xi=n_xi)
    surf = ldf_surface(cfg.params, lams, xis)
    rows = []
    for i, l in enumerate(surf.lam):
        for j, x in enumerate(surf.xi):
            rows.append((float(l), float(x), float(surf.cgf_values[i, j]),
                         float(surf.current[i, j]), float(surf.heat[i, j]),
                         float(surf.rate_function[i, j])))
    write_table(os.path.join(out, "ldf_surface.csv"),
                ("lambda", "xi", "S", "I", "J", "R"), rows)


def _cmd_semistoch(cfg: RunConfig, out):
    from .semistoch import telegraph_trace, work_dot_response
    n_traj = cfg.options.get("semistoch.n_traj", cfg.n_traj)
    duration = cfg.options.get("semistoch.duration", cfg.duration)
    trace = telegraph_trace(cfg.params, min(duration, 200.0), (cfg.base_seed, 0))
    resp = work_dot_response(cfg.params, trace)
    ts = np.linspace(0.0, trace.duration, 2001)
    write_table(os.path.join(out, "semistoch_trace.csv"), ("t", "n_h", "N_w"),
                ((float(t), trace.occupation_at(float(t)), float(resp.value(float(t))))
                 for t in ts))
    ens = semi_ensemble(cfg.params, n_traj, duration, cfg.base_seed)
    write_table(os.path.join(out, "semistoch_occupation.csv"),
                ("t", "mean_N_w", "se_N_w"),
                zip(ens.t_grid.tolist(), ens.mean_occupation.tolist(),
                    ens.se_occupation.tolist()))
    from .semistoch import max_qin
    top = max_qin(cfg.params)
    hist, edges = np.histogram(ens.q_in, bins=np.linspace(0.0, top, 51), density=True)
    write_table(os.path.join(out, "semistoch_qin_hist.csv"), ("bin_left", "density"),
                zip(edges[:-1].tolist(), hist.tolist()))
    w = ens.w_out
    lim = max(abs(float(w.min())), abs(float(w.max()))) or 1.0
    hist, edges = np.histogram(w, bins=np.linspace(-lim, lim, 51), density=True)
    write_table(os.path.join(out, "semistoch_wout_hist.csv"), ("bin_left", "density"),
                zip(edges[:-1].tolist(), hist.tolist()))


_DISPATCH = {
    "steady": _cmd_steady,
    "sweep": _cmd_sweep,
    "correlations": _cmd_correlations,
    "oscillation-search": _cmd_oscillation,
    "trajectories": _cmd_trajectories,
    "cycles": _cmd_cycles,
    "ldf": _cmd_ldf,
    "semistoch": _cmd_semistoch,
}


def run(cfg: RunConfig, config_text: str = "") -> int:
    """Dispatch one configured command and write its artifacts plus a
    manifest; returns the process exit status."""
    t0 = time.monotonic()
    out = cfg.output_dir
    os.makedirs(out, exist_ok=True)
    # quick sanity pass so obviously broken physics fails before artifacts
    steady_state(build_generator(cfg.params))
    _DISPATCH[cfg.command](cfg, out)
    _manifest(os.path.join(out, "manifest.txt"), config_text, cfg, time.monotonic() - t0)
    return 0


_CONFIG_HELP = """\
configuration keys by section:
  [engine]      eps_w, eps_h, coulomb_u, delta_mu, temp_w, temp_h,
                gamma_base, gamma_h, x
  [run]         command, output_dir, base_seed, threads
  [ensemble]    n_traj, duration
  [sweep]       delta_mu_min, delta_mu_max, n_points
  [ldf]         n_lambda, n_xi
  [correlations] n_tau, tau_max
  [oscillation] seed
  [semistoch]   n_traj, duration
"""


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="dotharvest",
        description="Simulator for a two-quantum-dot three-terminal heat engine.",
        epilog=_CONFIG_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--config", help="path to a key = value configuration file")
    ap.add_argument("--out", help="output directory (overrides the configuration)")
    ap.add_argument("--seed", type=int, help="base seed (overrides the configuration)")
    ap.add_argument("--threads", type=int,
                    help="worker processes for ensembles "
                         "(overrides config and DOTHARVEST_THREADS)")
    ap.add_argument("--print-default-config", action="store_true",
                    help="write the reference configuration to stdout and exit")
    ap.add_argument("command", nargs="?", choices=COMMANDS,
                    help="subcommand (overrides the configuration)")
    args = ap.parse_args(argv)

    if args.print_default_config:
        sys.stdout.write(DEFAULT_CONFIG)
        return 0
    if not args.config:
        ap.error("--config is required (or use --print-default-config)")

    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
        cfg = parse_config(text)
    except OSError as exc:
        print(f"error: cannot read configuration: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    updates = {}
    if args.command:
        updates["command"] = args.command
    if args.out:
        updates["output_dir"] = args.out
    if args.seed is not None:
        updates["base_seed"] = args.seed
    threads = args.threads
    if threads is None:
        env = os.environ.get("DOTHARVEST_THREADS")
        threads = int(env) if env else None
    if threads is not None:
        updates["threads"] = max(1, threads)
    if updates:
        cfg = RunConfig(params=cfg.params,
                        command=updates.get("command", cfg.command),
                        output_dir=updates.get("output_dir", cfg.output_dir),
                        base_seed=updates.get("base_seed", cfg.base_seed),
                        threads=updates.get("threads", cfg.threads),
                        n_traj=cfg.n_traj, duration=cfg.duration, options=cfg.options)

    try:
        return run(cfg, config_text=text)
    except Exception as exc:   # map module errors to a nonzero exit with a diagnostic
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
