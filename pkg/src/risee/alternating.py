"""Alternating EE maximization over (v, M, p) and its strategy variants."""
from __future__ import annotations

import logging

import numpy as np

from .channel import SetupGeometry
from .config import SystemConfig
from .phase_opt import optimize_phases
from .power_antenna_opt import InfeasibleError, optimize_power_antennas
from .statistics import (
    ChannelStatistics,
    Solution,
    compute_statistics,
    energy_efficiency,
    hermitize,
    rate_lower_bound,
)

log = logging.getLogger(__name__)

STRATEGIES = ("p_only", "p_v", "p_M", "p_v_M", "random_all")

# strategy -> (optimize v, optimize M, optimize p)
_FLAGS = {
    "p_only": (False, False, True),
    "p_v": (True, False, True),
    "p_M": (False, True, True),
    "p_v_M": (True, True, True),
    "random_all": (False, False, False),
}


def refresh_A(stats: ChannelStatistics, config: SystemConfig, alpha_G: float) -> ChannelStatistics:
    """Rebuild A_k from Lambda, B and s_k (they do not depend on v, p or M)."""
    d = np.real(np.diag(np.linalg.inv(stats.Lambda)))
    A = d[:, None, None] * stats.B[None, :, :]
    if config.K1 > 0:
        A = A - config.K1 * alpha_G * np.einsum("kn,km->knm", stats.s.conj(), stats.s)
    return ChannelStatistics(Lambda=stats.Lambda, B=stats.B, A=hermitize(A), s=stats.s, a_N=stats.a_N, F=stats.F)


def initial_point(config: SystemConfig, strategy: str, rng: np.random.Generator):
    """Feasible starting values: random phases, uniform power and either
    ``M_max`` (when M is optimized) or a uniformly random feasible M."""
    v = np.exp(1j * rng.uniform(0.0, 2 * np.pi, config.N))
    M_random = int(rng.integers(config.K + 1, config.M_max + 1))
    M = config.M_max if _FLAGS[strategy][1] else M_random
    p = np.full(config.K, config.P_TX / config.K)
    return M, p, v


def maximize_ee(
    geometry: SetupGeometry,
    config: SystemConfig,
    strategy: str = "p_v_M",
    rng: np.random.Generator | None = None,
    stats: ChannelStatistics | None = None,
    method: str | None = None,
    strict: bool = False,
) -> Solution:
    """Run the alternating optimizer for one setup.

    ``rng`` only drives the random initial/unoptimized values, so passing
    identically seeded generators gives matched starts across strategies.
    """
    if strategy not in _FLAGS:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    opt_v, opt_M, opt_p = _FLAGS[strategy]
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    stats = stats if stats is not None else compute_statistics(geometry, config)
    method = method or config.method
    if method == "gradient":
        from .baselines import gradient_ascent_phases as _grad

        def phase_step(p, M, v):
            return _grad(p, M, v, stats, config).v
    else:
        def phase_step(p, M, v):
            return optimize_phases(p, M, v, stats, config, method=method).v

    M, p, v = initial_point(config, strategy, rng)
    rates = rate_lower_bound(p, M, v, stats, config)
    ee = energy_efficiency(p, M, rates, config)
    sol = Solution(
        M=M, p=p, v=v, mu=np.zeros(config.K), vartheta=0.0, rates=rates, ee=ee,
        qos_feasible=bool(np.all(rates >= config.R_min)), history=[ee],
    )
    if not opt_p:
        return sol

    converged = False
    for _ in range(config.max_iter_alg3):
        if opt_v:
            sol.v = phase_step(sol.p, sol.M, sol.v)
        stats = refresh_A(stats, config, geometry.alpha_G)
        res = optimize_power_antennas(sol.v, sol, stats, config, optimize_M=opt_M)
        prev = sol.ee
        sol.M, sol.p = res.M, res.p
        sol.mu, sol.vartheta = res.dual.mu, res.dual.vartheta
        sol.rates, sol.ee = res.rates, res.ee
        sol.power_feasible, sol.qos_feasible = res.power_feasible, res.qos_feasible
        sol.history.append(sol.ee)
        if abs(sol.ee - prev) <= config.eps_outer * max(abs(sol.ee), 1e-12):
            converged = True
            break
    sol.converged = converged
    if not sol.feasible:
        log.info("strategy %s: QoS floor not met (min rate %.3f)", strategy, float(np.min(sol.rates)))
        if strict:
            raise InfeasibleError("QoS constraints not attainable within the power budget", sol)
    return sol
