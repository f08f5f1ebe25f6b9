"""Multi-setup experiment drivers producing flat result rows.

Every row carries ``seed`` and ``setup`` so a single setup can be replayed
with :func:`run_setup`.
"""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np

from . import montecarlo as mc
from .alternating import STRATEGIES, maximize_ee
from .baselines import gradient_ascent_phases
from .channel import init_rng, sample_setup, setup_rng
from .config import SystemConfig
from .phase_opt import optimize_phases
from .statistics import compute_statistics

SWEEP_HEADER = ("seed", "setup", "p_tx_dbm", "k1", "strategy", "ee", "M", "power_used", "utilization",
                "sum_rate", "min_rate", "qos_feasible", "alg3_iterations", "monotone")
CONVERGENCE_HEADER = ("seed", "setup", "method", "iteration", "sum_rate")
TIMING_HEADER = ("seed", "setup", "method", "seconds", "iterations", "sum_rate")
VALIDATE_HEADER = ("seed", "setup", "ue", "strategy", "M", "bound", "mc_mean", "mc_stderr", "gap", "valid", "excluded")
CCDF_HEADER = ("seed", "quantity", "strategy", "value", "ccdf")
CCDF_SAMPLES_HEADER = ("seed", "setup", "ue", "strategy", "rate_bound", "ee")


def _map(fn, items, threads: int):
    if threads and threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def setup_geometry(config: SystemConfig, setup: int):
    return sample_setup(config, setup_rng(config.seed, setup))


def run_setup(config: SystemConfig, setup: int, strategies=STRATEGIES, method=None):
    """Optimize one setup under each strategy from matched random starts."""
    geometry = setup_geometry(config, setup)
    stats = compute_statistics(geometry, config)
    return geometry, stats, {
        s: maximize_ee(geometry, config, s, init_rng(config.seed, setup), stats, method=method)
        for s in strategies
    }


def _monotone(history, tol=1e-9) -> bool:
    h = np.asarray(history)
    return bool(np.all(np.diff(h) >= -tol * np.maximum(1.0, np.abs(h[1:]))))


def _sweep_one(args, config, strategies, method):
    p_tx_dbm, setup = args
    cfg = config.with_p_tx_dbm(p_tx_dbm)
    _, _, sols = run_setup(cfg, setup, strategies, method)
    rows = []
    for name, sol in sols.items():
        used = float(np.sum(sol.p))
        rows.append(dict(
            seed=cfg.seed, setup=setup, p_tx_dbm=p_tx_dbm, k1=cfg.K1, strategy=name, ee=sol.ee, M=sol.M,
            power_used=used, utilization=used / cfg.P_TX, sum_rate=float(np.sum(sol.rates)),
            min_rate=float(np.min(sol.rates)), qos_feasible=int(sol.qos_feasible),
            alg3_iterations=len(sol.history) - 1, monotone=int(_monotone(sol.history)),
        ))
    return rows


def sweep(config: SystemConfig, p_tx_list, S: int, strategies=STRATEGIES, method=None, threads=1):
    jobs = [(p, s) for p in p_tx_list for s in range(S)]
    chunks = _map(partial(_sweep_one, config=config, strategies=tuple(strategies), method=method), jobs, threads)
    return [row for chunk in chunks for row in chunk]


def rician(config: SystemConfig, k1_list, p_tx_list, S: int, strategies=("p_v_M",), method=None, threads=1):
    rows = []
    for k1 in k1_list:
        rows.extend(sweep(config.replace(K1=float(k1)), p_tx_list, S, strategies, method, threads))
    return rows


def summarize(rows, keys=("p_tx_dbm", "k1", "strategy"), fields=("ee", "M", "utilization", "sum_rate")):
    """Average ``fields`` over setups for each combination of ``keys``."""
    groups: dict = {}
    for r in rows:
        groups.setdefault(tuple(r[k] for k in keys), []).append(r)
    out = []
    for key, rs in groups.items():
        d = dict(zip(keys, key))
        for f in fields:
            d[f] = float(np.mean([r[f] for r in rs]))
        d["n"] = len(rs)
        out.append(d)
    return out


def _convergence_one(setup, config, methods):
    geometry = setup_geometry(config, setup)
    stats = compute_statistics(geometry, config)
    rng = init_rng(config.seed, setup)
    v0 = np.exp(1j * rng.uniform(0.0, 2 * np.pi, config.N))
    M = config.M_max
    p = np.full(config.K, config.P_TX / config.K)
    out = {}
    for m in methods:
        t0 = time.perf_counter()
        if m == "gradient":
            res = gradient_ascent_phases(p, M, v0, stats, config)
            hist, iters = res.history, res.iterations
        else:
            res = optimize_phases(p, M, v0, stats, config, method=m)
            hist, iters = res.history, res.outer_iterations
        out[m] = (hist, iters, time.perf_counter() - t0)
    return setup, out


def convergence(config: SystemConfig, S: int, methods=("analytic", "sfp", "gradient"), threads=1):
    """Per-setup sum-rate traces at M = M_max and uniform power."""
    return _map(partial(_convergence_one, config=config, methods=tuple(methods)), range(S), threads)


def convergence_rows(results, config):
    rows = []
    for setup, per in results:
        for m, (hist, _, _) in per.items():
            rows.extend(dict(seed=config.seed, setup=setup, method=m, iteration=i, sum_rate=f)
                        for i, f in enumerate(hist))
    return rows


def timing_rows(results, config):
    return [dict(seed=config.seed, setup=setup, method=m, seconds=sec, iterations=it, sum_rate=hist[-1])
            for setup, per in results for m, (hist, it, sec) in per.items()]


def _validate_one(setup, config, strategy, T):
    geometry, stats, sols = run_setup(config, setup, (strategy,))
    sol = sols[strategy]
    rep = mc.validate_lower_bound(geometry, sol, config, T, setup_index=setup, stats=stats)
    return [dict(seed=config.seed, setup=setup, ue=k, strategy=strategy, M=sol.M, bound=rep.bound[k],
                 mc_mean=rep.mean[k], mc_stderr=rep.stderr[k], gap=rep.gap[k], valid=int(rep.valid[k]),
                 excluded=rep.excluded)
            for k in range(config.K)]


def validate_lb(config: SystemConfig, S: int, T: int, strategy="p_v_M", threads=1):
    chunks = _map(partial(_validate_one, config=config, strategy=strategy, T=T), range(S), threads)
    return [r for c in chunks for r in c]


def _ccdf_one(setup, config, strategies):
    _, _, sols = run_setup(config, setup, strategies)
    return [dict(seed=config.seed, setup=setup, ue=k, strategy=s, rate_bound=sol.rates[k], ee=sol.ee)
            for s, sol in sols.items() for k in range(config.K)]


def ccdf_samples(config: SystemConfig, S: int, strategies=STRATEGIES, threads=1):
    chunks = _map(partial(_ccdf_one, config=config, strategies=tuple(strategies)), range(S), threads)
    return [r for c in chunks for r in c]


def ccdf_rows(samples, config):
    rows = []
    strategies = sorted({r["strategy"] for r in samples}, key=lambda s: STRATEGIES.index(s))
    for s in strategies:
        rates = [r["rate_bound"] for r in samples if r["strategy"] == s]
        ees = [r["ee"] for r in samples if r["strategy"] == s and r["ue"] == 0]
        for quantity, data in (("rate", rates), ("ee", ees)):
            x, c = mc.ccdf(data)
            rows.extend(dict(seed=config.seed, quantity=quantity, strategy=s, value=a, ccdf=b) for a, b in zip(x, c))
    return rows
