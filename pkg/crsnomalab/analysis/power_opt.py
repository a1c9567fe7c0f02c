from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from crsnomalab.analysis.channel_model import SystemConfig, db_to_linear, gain_ccdf
from crsnomalab.analysis.outage_diversity import outage_closed, thresholds
from crsnomalab.core import logger
from crsnomalab.core.config import LabConfiguration
from crsnomalab.core.errors import DomainError, require
from crsnomalab.core.event_bus import OPTIMIZATION_DONE, create_or_get_shared_event_bus


@dataclass(frozen=True)
class OptResult:
    """
    Outcome of a grid search for the power split minimizing closed-form outage.

    When every grid point is infeasible all outages are 1.0 and `a2_star` is the smallest
    grid point, so `feasible` is False.
    """
    rho: float
    a2_star: float
    outage_at_star: float
    grid: Tuple[float, ...]
    per_point: Tuple[Tuple[float, float], ...]
    feasible: bool


@dataclass(frozen=True)
class A2TraceRow:
    a2: float
    delta1: Optional[float]
    delta2: Optional[float]
    ccdf_sd: float
    ccdf_sr: float
    product: float
    outage: float


def _sorted_grid(grid):
    if grid is None:
        grid = LabConfiguration.get_instance().a2_grid
    grid = tuple(sorted(float(a2) for a2 in grid))
    if not grid:
        raise DomainError("a2 grid must not be empty")
    for a2 in grid:
        require(0.0 < a2 < 0.5, f"a2 grid values must lie in (0, 0.5), got {a2}")
    return grid


def optimal_a2(cfg: SystemConfig, rho: float, grid: Optional[Sequence[float]] = None) -> OptResult:
    """
    Minimizes outage_closed over `grid` (the configured default grid when None). The a2 of
    `cfg` itself is ignored. Ties go to the smallest a2.
    """
    grid = _sorted_grid(grid)
    per_point = tuple((a2, outage_closed(cfg.with_a2(a2), rho)) for a2 in grid)
    a2_star, outage_at_star = per_point[0]
    for a2, outage in per_point[1:]:
        if outage < outage_at_star:
            a2_star, outage_at_star = a2, outage
    result = OptResult(
        rho=rho,
        a2_star=a2_star,
        outage_at_star=outage_at_star,
        grid=grid,
        per_point=per_point,
        feasible=thresholds(a2_star, rho, cfg.target_rate).feasible,
    )
    logger.debug(f"[PowerOpt] rho={rho:.6g}: a2*={a2_star:g}, outage={outage_at_star:.6g}")
    create_or_get_shared_event_bus().emit(OPTIMIZATION_DONE, result)
    return result


def refine_a2(cfg: SystemConfig, rho: float, result: OptResult, factor: int = 2) -> OptResult:
    """Searches again one coarse step either side of `result.a2_star` with the step divided by `factor`."""
    require(factor >= 2, f"factor must be >= 2, got {factor}")
    steps = np.diff(result.grid)
    coarse = float(steps.min()) if steps.size else 0.01
    fine = coarse / factor
    candidates = {round(result.a2_star + k * fine, 12) for k in range(-factor, factor + 1)}
    candidates = sorted(a2 for a2 in candidates if 0.0 < a2 < 0.5)
    return optimal_a2(cfg, rho, candidates)


def optimal_a2_sweep(cfg: SystemConfig, rho_grid_db: Sequence[float], grid: Optional[Sequence[float]] = None,
                     thread_manager=None) -> Tuple[OptResult, ...]:
    """Per-rho optima, evaluated on `thread_manager` when one is given; results follow `rho_grid_db`."""
    rhos = [db_to_linear(rho_db) for rho_db in rho_grid_db]
    grid = _sorted_grid(grid)
    if thread_manager is None:
        return tuple(optimal_a2(cfg, rho, grid) for rho in rhos)
    return tuple(thread_manager.run_ordered(lambda rho: optimal_a2(cfg, rho, grid), rhos, tag='optimal-a2'))


def ccdf_factor_trace(cfg: SystemConfig, rho: float, a2_grid: Optional[Sequence[float]] = None) -> Tuple[A2TraceRow, ...]:
    """
    Per a2: Delta1, Delta2, CCDF_sd(Delta1), CCDF_sr(Delta2), their product and the outage.
    Delta3 does not depend on a2, so the product alone decides the optimum.
    """
    rows = []
    for a2 in _sorted_grid(a2_grid):
        limits = thresholds(a2, rho, cfg.target_rate)
        if not limits.feasible:
            rows.append(A2TraceRow(a2=a2, delta1=None, delta2=None, ccdf_sd=0.0, ccdf_sr=0.0, product=0.0,
                                   outage=1.0))
            continue
        ccdf_sd = gain_ccdf(cfg.sd, cfg.n_d, cfg.combiner, limits.delta1)
        ccdf_sr = gain_ccdf(cfg.sr, cfg.n_r, cfg.combiner, limits.delta2)
        rows.append(A2TraceRow(
            a2=a2,
            delta1=limits.delta1,
            delta2=limits.delta2,
            ccdf_sd=ccdf_sd,
            ccdf_sr=ccdf_sr,
            product=ccdf_sd * ccdf_sr,
            outage=outage_closed(cfg.with_a2(a2), rho),
        ))
    return tuple(rows)


def trace_argmax(rows: Sequence[A2TraceRow]) -> float:
    """a2 with the largest CCDF product, the smallest such a2 on ties."""
    best = rows[0]
    for row in rows[1:]:
        if row.product > best.product:
            best = row
    return best.a2
