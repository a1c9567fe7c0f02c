from dataclasses import astuple, dataclass, fields
from typing import List, Optional, Sequence, Tuple

from crsnomalab.analysis.channel_model import SystemConfig, db_to_linear
from crsnomalab.analysis.power_opt import A2TraceRow, ccdf_factor_trace
from crsnomalab.core import logger
from crsnomalab.core.config import LabConfiguration
from crsnomalab.core.config_manager import FigurePreset, all_figure_presets
from crsnomalab.core.errors import UsageError
from crsnomalab.core.logging_utils import log_a2_trace
from crsnomalab.sim.simulator import Metric, Scheme, SweepRow, run_sweep

TRACE_COLUMNS = ('rho_db',) + tuple(f.name for f in fields(A2TraceRow))
RATE_GAP_COLUMN = 'rate_gap_mc'


@dataclass(frozen=True)
class FigureTable:
    columns: Tuple[str, ...]
    rows: List[tuple]


def preset(name: str) -> FigurePreset:
    presets = all_figure_presets()
    if name not in presets:
        raise UsageError(f"unknown figure preset {name!r}; choose one of {', '.join(sorted(presets))}")
    return presets[name]


def rate_gaps(noma_rows: Sequence[SweepRow], oma_rows: Sequence[SweepRow]) -> List[float]:
    """NOMA minus OMA MC rate at each rho of two sweeps over the same grid."""
    return [n.rate_mc - o.rate_mc for n, o in zip(noma_rows, oma_rows)]


def crossover_rho_db(noma_rows: Sequence[SweepRow], oma_rows: Sequence[SweepRow]) -> Optional[float]:
    """
    Smallest rho (dB) above which the NOMA MC rate stays above the OMA one, linearly
    interpolated inside the grid cell where the difference changes sign. None when NOMA is
    not ahead at the last grid point.
    """
    diffs = [(n.rho_db, gap) for n, gap in zip(noma_rows, rate_gaps(noma_rows, oma_rows))]
    if not diffs or diffs[-1][1] <= 0.0:
        return None
    index = len(diffs) - 1
    while index > 0 and diffs[index - 1][1] > 0.0:
        index -= 1
    if index == 0:
        return diffs[0][0]
    (x0, y0), (x1, y1) = diffs[index - 1], diffs[index]
    return x0 + (x1 - x0) * (-y0) / (y1 - y0)


def _case_config(case, a2):
    return SystemConfig.uniform(m=case.m, n=case.n, combiner=case.combiner, a2=0.1 if a2 is None else a2)


def run_figure(name: str, n_trials: int = None, seed: int = None, thread_manager=None) -> FigureTable:
    """Rows of one figure preset; sweeps share the common SweepRow schema."""
    spec = preset(name)
    logger.info(f"[Figure] Running {spec.name} ({spec.kind}, {len(spec.cases)} cases)")

    if spec.kind == 'a2_trace':
        rows = []
        for case in spec.cases:
            cfg = _case_config(case, spec.a2)
            for rho_db in spec.rho_db:
                trace = ccdf_factor_trace(cfg, db_to_linear(rho_db))
                log_a2_trace(trace, rho_db)
                rows.extend((rho_db,) + astuple(row) for row in trace)
        return FigureTable(columns=TRACE_COLUMNS, rows=rows)

    metric = Metric.OUTAGE if spec.kind == 'outage' else Metric.RATE
    a2_grid = LabConfiguration.get_instance().a2_grid if spec.a2 is None else None
    schemes = tuple(map(Scheme, spec.schemes))
    paired = Scheme.NOMA in schemes and Scheme.OMA in schemes
    rows = []
    for case in spec.cases:
        cfg = _case_config(case, spec.a2)
        by_scheme = {scheme: run_sweep(cfg, spec.rho_db, scheme, metric, n_trials, seed,
                                       a2_grid=a2_grid, thread_manager=thread_manager)
                     for scheme in schemes}
        if not paired:
            rows.extend(row.values() for scheme in schemes for row in by_scheme[scheme])
            continue
        gaps = rate_gaps(by_scheme[Scheme.NOMA], by_scheme[Scheme.OMA])
        for scheme in schemes:
            rows.extend(row.values() + (gap,) for row, gap in zip(by_scheme[scheme], gaps))
        crossover = crossover_rho_db(by_scheme[Scheme.NOMA], by_scheme[Scheme.OMA])
        where = "nowhere on the grid" if crossover is None else f"{crossover:.2f} dB"
        logger.info(f"[Figure] {spec.name} m={case.m} N={case.n} {case.combiner}: NOMA ahead from {where}")
    columns = SweepRow.columns() + ((RATE_GAP_COLUMN,) if paired else ())
    return FigureTable(columns=columns, rows=rows)
