"""
Joint outage probability of the two symbols, its high-SNR expansion and diversity order.

The system is out when any of g_sd < Delta1, g_sr < Delta2, g_rd < Delta3 holds, so with
independent links the outage is 1 - prod(1 - F_i(Delta_i)). The product is taken as
-expm1(sum log1p(-F_i)), which keeps full relative precision when every F_i is tiny.
"""
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from crsnomalab.analysis.channel_model import CombinerKind, SystemConfig, gain_ccdf, gain_cdf
from crsnomalab.analysis.specfun import ln_gamma
from crsnomalab.core.errors import DomainError, require


@dataclass(frozen=True)
class OutageThresholds:
    theta: float
    delta1: Optional[float]
    delta2: Optional[float]
    delta3: Optional[float]
    feasible: bool


def thresholds(a2: float, rho: float, target_rate: float) -> OutageThresholds:
    """Decoding thresholds of the S->D, S->R and R->D gains; deltas are None when a2 >= 1/(1+theta)."""
    require(0.0 < a2 < 0.5, f"a2 must satisfy 0 < a2 < 0.5, got {a2!r}")
    require(rho > 0, f"rho must be > 0, got {rho!r}")
    require(target_rate > 0, f"target rate must be > 0, got {target_rate!r}")
    theta = 2.0 ** (2.0 * target_rate) - 1.0
    if not a2 < 1.0 / (1.0 + theta):
        return OutageThresholds(theta=theta, delta1=None, delta2=None, delta3=None, feasible=False)
    delta1 = theta / (rho * ((1.0 - a2) - a2 * theta))
    delta2 = max(delta1, theta / (a2 * rho))
    return OutageThresholds(theta=theta, delta1=delta1, delta2=delta2, delta3=theta / rho, feasible=True)


def config_thresholds(cfg: SystemConfig, rho: float) -> OutageThresholds:
    return thresholds(cfg.a2, rho, cfg.target_rate)


def link_cdfs(cfg: SystemConfig, limits: OutageThresholds) -> Tuple[float, float, float]:
    """F_sd(Delta1), F_sr(Delta2), F_rd(Delta3)."""
    return (gain_cdf(cfg.sd, cfg.n_d, cfg.combiner, limits.delta1),
            gain_cdf(cfg.sr, cfg.n_r, cfg.combiner, limits.delta2),
            gain_cdf(cfg.rd, cfg.n_d, cfg.combiner, limits.delta3))


def _log_ccdf(link, n, combiner, x):
    cdf = gain_cdf(link, n, combiner, x)
    if cdf < 0.5:
        return math.log1p(-cdf)
    ccdf = gain_ccdf(link, n, combiner, x)
    return math.log(ccdf) if ccdf > 0.0 else -math.inf


def outage_closed(cfg: SystemConfig, rho: float) -> float:
    limits = config_thresholds(cfg, rho)
    if not limits.feasible:
        return 1.0
    log_survival = math.fsum((
        _log_ccdf(cfg.sd, cfg.n_d, cfg.combiner, limits.delta1),
        _log_ccdf(cfg.sr, cfg.n_r, cfg.combiner, limits.delta2),
        _log_ccdf(cfg.rd, cfg.n_d, cfg.combiner, limits.delta3),
    ))
    if log_survival == -math.inf:
        return 1.0
    return min(max(-math.expm1(log_survival), 0.0), 1.0)


def outage_inclusion_exclusion(cfg: SystemConfig, rho: float) -> float:
    """F1 + F2 + F3 - F1 F2 - F1 F3 - F2 F3 + F1 F2 F3."""
    limits = config_thresholds(cfg, rho)
    if not limits.feasible:
        return 1.0
    f1, f2, f3 = link_cdfs(cfg, limits)
    return math.fsum((f1, f2, f3, -f1 * f2, -f1 * f3, -f2 * f3, f1 * f2 * f3))


def coding_constant(m: int, omega: float) -> float:
    """
    (m/Omega)**m / Gamma(m), the coefficient in front of the series of the link CDF:
    P(m, m x / Omega) = c x**m / m + O(x**(m+1)).
    """
    require(m >= 1, f"m must be >= 1, got {m}")
    require(omega > 0, f"omega must be > 0, got {omega}")
    return math.exp(m * math.log(m / omega) - ln_gamma(m))


def _leading_cdf(link, n, combiner, x):
    if combiner is CombinerKind.MRC:
        order = link.m * n
        return math.exp(order * math.log(link.m * x / link.omega) - ln_gamma(order + 1))
    return (coding_constant(link.m, link.omega) / link.m * x ** link.m) ** n


def asymptotic_outage(cfg: SystemConfig, rho: float) -> float:
    """Sum of the leading small-x terms of the three link CDFs; all three exponents are kept."""
    limits = config_thresholds(cfg, rho)
    if not limits.feasible:
        return 1.0
    return math.fsum((
        _leading_cdf(cfg.sd, cfg.n_d, cfg.combiner, limits.delta1),
        _leading_cdf(cfg.sr, cfg.n_r, cfg.combiner, limits.delta2),
        _leading_cdf(cfg.rd, cfg.n_d, cfg.combiner, limits.delta3),
    ))


def diversity_order(cfg: SystemConfig) -> int:
    return min(cfg.sd.m * cfg.n_d, cfg.sr.m * cfg.n_r, cfg.rd.m * cfg.n_d)


def diversity_slope_estimate(points: Sequence[Tuple[float, float]]) -> float:
    """
    Least-squares slope of log10(outage) against log10(rho), negated.

    Args:
        points: (rho_db, outage) pairs with rho_db strictly increasing and 0 < outage < 1.
            Saturated points (outage 0 or 1) must be dropped by the caller.
    """
    if len(points) < 2:
        raise DomainError(f"need at least 2 points, got {len(points)}")
    rho_db = np.array([p[0] for p in points], dtype=float)
    outage = np.array([p[1] for p in points], dtype=float)
    if np.any(outage <= 0.0) or np.any(outage >= 1.0):
        raise DomainError("every outage value must lie strictly between 0 and 1")
    if np.any(np.diff(rho_db) <= 0.0):
        raise DomainError("rho_db must be strictly increasing")
    slope, _intercept = np.polyfit(rho_db / 10.0, np.log10(outage), 1)
    return float(-slope)
