"""
Seeded Monte-Carlo experiments.

Every trial draws from its own stream, keyed on
``(master_seed, experiment, sweep point, trial index)``, so a row never
depends on how work was split across processes. Work is farmed out per
sweep point and rows come back in sweep order.
"""

import csv
import io
import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..channel import LINKS, gains_from_fading, sample_fading, sample_gains
from ..framework import TrialRecord, run_trial
from ..mode_selection import (adaptive_distance_threshold, cellular_two_hop_sinr,
                              d2d_sinr_at_max)
from ..ortho_alloc import (InfeasibleRateError, SnrSet, cellular_constrained,
                           dedicated_constrained)
from ..reuse_power import exhaustive_search, vertex_search
from .config import ExperimentConfig

EXPERIMENT_CODES = {"fig5": 5, "fig6a": 61, "fig6b": 62, "fig7": 7, "fig8": 8,
                    "single-shot": 0}


def trial_rng(config: ExperimentConfig, point: int, trial: int) -> np.random.Generator:
    ss = np.random.SeedSequence(config.master_seed,
                                spawn_key=(EXPERIMENT_CODES[config.name], point, trial))
    return np.random.default_rng(ss)


def sweep_points(config: ExperimentConfig) -> List[Dict[str, float]]:
    sw = config.sweeps
    if config.name == "fig5":
        return [{"d_mr": v} for v in sw["d_mr"]]
    if config.name == "fig8":
        return [{"d": d, "d_mr": m} for d, m in itertools.product(sw["d"], sw["d_mr"])]
    return [{"d_mr": m, "d": d} for m, d in itertools.product(sw["d_mr"], sw["d"])]


# ---------------------------------------------------------------------------
# per-point workers; each returns (row, extras)
# ---------------------------------------------------------------------------
def _fig5_point(config, idx, pt):
    params = config.params
    lo, hi = config.sweeps["d_range"]
    hits = {"constant": 0, "adaptive": 0, "max": 0}
    for k in range(config.trials):
        rng = trial_rng(config, idx, k)
        d = float(rng.uniform(lo, hi))
        orth = bool(rng.random() < config.orthogonal_probability)
        gains = sample_gains(config.topology_for(pt["d_mr"], d), params, rng)
        d_adapt = adaptive_distance_threshold(gains, params)
        if not orth:
            continue
        hits["constant"] += d <= params.d_constant_m
        hits["adaptive"] += d <= d_adapt
        hits["max"] += d <= max(params.d_constant_m, d_adapt)
    n = config.trials
    row = {"d_mr": pt["d_mr"],
           "pct_constant": 100.0 * hits["constant"] / n,
           "pct_adaptive": 100.0 * hits["adaptive"] / n,
           "pct_max": 100.0 * hits["max"] / n,
           "admitted_constant": hits["constant"],
           "admitted_adaptive": hits["adaptive"],
           "admitted_max": hits["max"], "trials": n}
    return row, {}


def _rate_draws(config, idx, pt):
    params = config.params
    top = config.topology_for(pt["d_mr"], pt["d"])
    d = top.d
    out = []
    for k in range(config.trials):
        gains = sample_gains(top, params, trial_rng(config, idx, k))
        out.append((d2d_sinr_at_max(gains, params), cellular_two_hop_sinr(gains, params),
                    adaptive_distance_threshold(gains, params), d))
    return out


def _fig6a_point(config, idx, pt):
    draws = _rate_draws(config, idx, pt)
    rd = np.array([math.log2(1 + s) for s, _, _, _ in draws])
    rc = np.array([math.log2(1 + c) for _, c, _, _ in draws])
    with np.errstate(divide="ignore"):
        ratio = rd / rc
    sd = np.array([s for s, _, _, _ in draws])
    sc = np.array([c for _, c, _, _ in draws])
    row = {"d_mr": pt["d_mr"], "d": pt["d"],
           "mean_d2d_rate": float(rd.mean()), "mean_cellular_rate": float(rc.mean()),
           "median_rate_gain": float(np.median(ratio)),
           "ratio_of_mean_rates": float(rd.mean() / rc.mean()),
           "d2d_better_fraction": float(np.mean(sd > sc)), "trials": len(draws)}
    return row, {}


def _fig6b_point(config, idx, pt):
    params = config.params
    draws = _rate_draws(config, idx, pt)
    dist_only, two_stage, n_d2d = [], [], 0
    for s_d2d, s_cell, d_adapt, d in draws:
        r_d2d, r_cell = math.log2(1 + s_d2d), math.log2(1 + s_cell)
        dist_only.append(r_d2d if d <= params.d_constant_m else r_cell)
        if d <= max(params.d_constant_m, d_adapt) and s_d2d > s_cell:
            two_stage.append(r_d2d)
            n_d2d += 1
        else:
            two_stage.append(r_cell)
    row = {"d_mr": pt["d_mr"], "d": pt["d"],
           "rate_distance_only": float(np.mean(dist_only)),
           "rate_two_stage": float(np.mean(two_stage)),
           "d2d_fraction_two_stage": n_d2d / len(draws), "trials": len(draws)}
    return row, {}


def _fig7_point(config, idx, pt):
    params = config.params
    top = config.topology_for(pt["d_mr"], pt["d"])
    v_rates, o_rates, ratios, v_evals = [], [], [], []
    infeasible = 0
    t_vertex = t_oracle = 0.0
    for k in range(config.trials):
        gains = sample_gains(top, params, trial_rng(config, idx, k))
        t0 = time.perf_counter()
        v = vertex_search(gains, params)
        t1 = time.perf_counter()
        o = exhaustive_search(gains, params, config.oracle_grid)
        t2 = time.perf_counter()
        t_vertex += t1 - t0
        t_oracle += t2 - t1
        if not (v.feasible and o.feasible):
            infeasible += 1
            continue
        v_rates.append(v.sum_rate_bps_hz)
        o_rates.append(o.sum_rate_bps_hz)
        ratios.append(v.sum_rate_bps_hz / o.sum_rate_bps_hz)
        v_evals.append(v.evaluations)
    n_ok = len(ratios)
    r = np.array(ratios) if ratios else np.array([math.nan])
    row = {"d_mr": pt["d_mr"], "d": pt["d"], "trials": config.trials,
           "feasible_trials": n_ok, "infeasible_trials": infeasible,
           "vertex_sum_rate": float(np.mean(v_rates)) if n_ok else math.nan,
           "oracle_sum_rate": float(np.mean(o_rates)) if n_ok else math.nan,
           "min_vertex_oracle_ratio": float(r.min()),
           "frac_vertex_ge_099_oracle": float(np.mean(r >= 0.99)) if n_ok else math.nan,
           "frac_vertex_ge_oracle": float(np.mean(r >= 1.0)) if n_ok else math.nan,
           "vertex_evals_max": max(v_evals) if v_evals else 0,
           "oracle_evals": config.oracle_grid ** 3}
    extras = {"vertex_seconds": t_vertex, "oracle_seconds": t_oracle,
              "ratios": ratios}
    return row, extras


def _fig8_point(config, idx, pt):
    params = config.params
    top = config.topology_for(pt["d_mr"], pt["d"])
    r_min = config.r_min or (0.0, 0.0, 0.0)
    ded_rates, cel_rates = [], []
    infeasible = 0
    for k in range(config.trials):
        gains = sample_gains(top, params, trial_rng(config, idx, k))
        snrs = SnrSet.from_gains(gains, params)
        try:
            ded = dedicated_constrained(snrs.dedicated, r_min)
        except InfeasibleRateError:
            infeasible += 1
            continue
        cel = cellular_constrained(snrs, r_min, config.lattice_step)
        if not cel.feasible:
            infeasible += 1
            continue
        ded_rates.append(ded.sum_rate)
        cel_rates.append(cel.sum_rate)
    n_ok = len(ded_rates)
    ded_m = float(np.mean(ded_rates)) if n_ok else math.nan
    cel_m = float(np.mean(cel_rates)) if n_ok else math.nan
    row = {"d": pt["d"], "d_mr": pt["d_mr"], "trials": config.trials,
           "feasible_trials": n_ok, "infeasible_trials": infeasible,
           "dedicated_sum_rate": ded_m, "cellular_sum_rate": cel_m,
           "sum_rate_gain": ded_m / cel_m if n_ok else math.nan}
    return row, {}


WORKERS = {"fig5": _fig5_point, "fig6a": _fig6a_point, "fig6b": _fig6b_point,
           "fig7": _fig7_point, "fig8": _fig8_point}


def _run_point(args):
    config, idx, pt = args
    return WORKERS[config.name](config, idx, pt)


class ExperimentResult:
    def __init__(self, name, rows, extras):
        self.name = name
        self.rows = rows
        self.extras = extras

    @property
    def columns(self):
        return list(self.rows[0].keys()) if self.rows else []

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_fmt(row[c]) for c in self.columns])
        return buf.getvalue()

    def column(self, name, **where):
        return [r[name] for r in self.rows
                if all(r[k] == v for k, v in where.items())]


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def run_experiment(config: ExperimentConfig, workers: Optional[int] = None) -> ExperimentResult:
    """Run every sweep point of ``config`` and collect one row per point.

    ``workers > 1`` spreads sweep points across processes; the rows are
    identical to a serial run.
    """
    if config.name == "single-shot":
        raise ValueError("use single_shot() for the single-shot experiment")
    workers = workers or config.workers
    tasks = [(config, i, pt) for i, pt in enumerate(sweep_points(config))]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_point, tasks))
    else:
        results = [_run_point(t) for t in tasks]
    rows = [r for r, _ in results]
    extras = [e for _, e in results]
    return ExperimentResult(config.name, rows, extras)


def regenerate_gains(config: ExperimentConfig, point: int, trial: int):
    """Rebuild the exact fading draw behind one trial of a sweep point."""
    pt = sweep_points(config)[point]
    rng = trial_rng(config, point, trial)
    if config.name == "fig5":
        lo, hi = config.sweeps["d_range"]
        d = float(rng.uniform(lo, hi))
        rng.random()
        top = config.topology_for(pt["d_mr"], d)
    else:
        top = config.topology_for(pt["d_mr"], pt["d"])
    return top, sample_gains(top, config.params, rng)


def single_shot(config: ExperimentConfig, orthogonal_available: Optional[bool] = None,
                fading=None) -> TrialRecord:
    """Run the whole decision pipeline once.

    ``fading`` may be ``"random"`` (seeded draw), ``"none"`` (all
    ``|h|^2 = 1``) or a mapping of explicit ``|h|^2`` per link; links not
    in the mapping default to 1. The topology is the first point of the
    configured sweep, overridden by any explicit node positions.
    """
    fading = config.fading if fading is None else fading
    pt = sweep_points(config)[0]
    top = config.topology_for(pt["d_mr"], pt["d"])
    rng = trial_rng(config, 0, 0)
    if orthogonal_available is None:
        orthogonal_available = config.orthogonal_available
    if orthogonal_available is None:
        orthogonal_available = bool(rng.random() < config.orthogonal_probability)
    if fading == "random":
        h = sample_fading(rng)
    elif fading == "none":
        h = sample_fading(None)
    else:
        h = {link: float(fading.get(link, 1.0)) for link in LINKS}
    gains = gains_from_fading(top, config.params, h)
    rec = run_trial(gains, config.params, top.d, orthogonal_available,
                    r_mins=config.r_min, lattice_step=config.lattice_step)
    rec.trial, rec.point = 0, 0
    return rec


def crossover(xs: Sequence[float], ys: Sequence[float], level: float = 1.0) -> float:
    """First ``x`` where ``ys`` falls through ``level``, linearly interpolated."""
    for (x0, y0), (x1, y1) in zip(zip(xs, ys), zip(xs[1:], ys[1:])):
        if y0 >= level > y1:
            return x0 + (y0 - level) * (x1 - x0) / (y0 - y1)
    return math.nan
