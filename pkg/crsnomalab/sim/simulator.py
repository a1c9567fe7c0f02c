"""
Monte Carlo link simulation of the two-slot relaying system.

Trials are cut into fixed chunks of `chunk_size`. Chunk k draws from its own Philox stream
seeded by SeedSequence(master_seed, spawn_key=(k,)), and chunk statistics are merged in
chunk order, so an estimate depends only on (config, rho, scheme, n_trials, seed, chunk_size),
never on the number of workers.
"""
import math
from dataclasses import astuple, dataclass, fields
from enum import Enum
from functools import partial
from typing import List, Optional, Sequence, Tuple

import numpy as np

from crsnomalab.analysis.analytic_rate import rate_high_snr, rate_total
from crsnomalab.analysis.channel_model import SystemConfig, db_to_linear, sample_gains
from crsnomalab.analysis.outage_diversity import outage_closed
from crsnomalab.analysis.power_opt import optimal_a2
from crsnomalab.core import logger
from crsnomalab.core.config import LabConfiguration
from crsnomalab.core.errors import DomainError, require
from crsnomalab.core.event_bus import CHUNK_DONE, SWEEP_POINT_DONE, create_or_get_shared_event_bus
from crsnomalab.core.thread_manager import get_thread_manager, scoped_thread_manager

_LN2 = math.log(2.0)


class Scheme(str, Enum):
    NOMA = 'noma'
    OMA = 'oma'

    def __str__(self):
        return self.value


class Metric(str, Enum):
    RATE = 'rate'
    OUTAGE = 'outage'

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    n_trials: int
    master_seed: int


@dataclass(frozen=True)
class SweepRow:
    """One rho point of a sweep; metrics that do not apply stay None."""
    rho_db: float
    scheme: Scheme
    combiner: str
    m_sr: int
    m_sd: int
    m_rd: int
    n_r: int
    n_d: int
    a2: Optional[float] = None
    rate_s1_analytic: Optional[float] = None
    rate_s2_analytic: Optional[float] = None
    rate_total_analytic: Optional[float] = None
    rate_high_snr: Optional[float] = None
    rate_mc: Optional[float] = None
    rate_mc_stderr: Optional[float] = None
    outage_analytic: Optional[float] = None
    outage_mc: Optional[float] = None
    outage_mc_stderr: Optional[float] = None
    trials: Optional[int] = None

    @classmethod
    def columns(cls) -> Tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    def values(self) -> tuple:
        return astuple(self)

    def within_bound(self, k: Optional[float] = None) -> bool:
        """
        Whether analytic and MC values agree to k standard errors (configured bound when None).
        The outage bound uses the larger of the MC stderr and the analytic binomial stderr so
        that zero-event estimates of tiny probabilities are judged fairly.
        """
        k = LabConfiguration.get_instance().stderr_bound if k is None else k
        if self.rate_total_analytic is not None and self.rate_mc is not None:
            if abs(self.rate_total_analytic - self.rate_mc) > k * self.rate_mc_stderr:
                return False
        if self.outage_analytic is not None and self.outage_mc is not None:
            p = self.outage_analytic
            analytic_stderr = math.sqrt(p * (1.0 - p) / self.trials) if self.trials else 0.0
            if abs(p - self.outage_mc) > k * max(self.outage_mc_stderr, analytic_stderr):
                return False
        return True


@dataclass(frozen=True)
class _ChunkStats:
    count: int
    mean: float
    m2: float

    @classmethod
    def of(cls, values: np.ndarray):
        mean = float(values.mean())
        return cls(count=int(values.size), mean=mean, m2=float(np.square(values - mean).sum()))

    def merge(self, other):
        count = self.count + other.count
        delta = other.mean - self.mean
        return _ChunkStats(
            count=count,
            mean=self.mean + delta * other.count / count,
            m2=self.m2 + other.m2 + delta * delta * self.count * other.count / count,
        )

    def estimate(self, seed) -> McEstimate:
        if self.count > 1:
            stderr = math.sqrt(self.m2 / (self.count - 1)) / math.sqrt(self.count)
        else:
            stderr = 0.0
        return McEstimate(mean=self.mean, stderr=stderr, n_trials=self.count, master_seed=seed)


def chunk_stream(master_seed: int, chunk: int) -> np.random.Generator:
    """Independent Philox stream of chunk `chunk` under `master_seed`."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(master_seed, spawn_key=(chunk,))))


def chunk_layout(n_trials: int, chunk_size: int) -> List[Tuple[int, int]]:
    """(chunk index, trials in chunk) pairs covering n_trials."""
    full, rest = divmod(n_trials, chunk_size)
    layout = [(index, chunk_size) for index in range(full)]
    if rest:
        layout.append((full, rest))
    return layout


def _draw(cfg: SystemConfig, rng, size):
    """Combined gains g_sr, g_sd, g_rd, drawn in that order."""
    g_sr = sample_gains(cfg.sr, cfg.n_r, cfg.combiner, rng, size)
    g_sd = sample_gains(cfg.sd, cfg.n_d, cfg.combiner, rng, size)
    g_rd = sample_gains(cfg.rd, cfg.n_d, cfg.combiner, rng, size)
    return g_sr, g_sd, g_rd


def _log2_1p(x):
    return np.log1p(x) / _LN2


def _s1_sinr(g, cfg, rho):
    return g * cfg.a1 * rho / (g * cfg.a2 * rho + 1.0)


def _noma_rates(cfg, rho, g_sr, g_sd, g_rd):
    s1 = 0.5 * np.minimum(_log2_1p(_s1_sinr(g_sd, cfg, rho)), _log2_1p(_s1_sinr(g_sr, cfg, rho)))
    s2 = 0.5 * _log2_1p(rho * np.minimum(cfg.a2 * g_sr, g_rd))
    return s1, s2


def _oma_rate(rho, g_sr, g_sd, g_rd):
    return 0.5 * _log2_1p(rho * np.minimum(g_sr, g_sd + g_rd))


def _rate_chunk(job, cfg, rho, scheme, seed):
    index, size = job
    g_sr, g_sd, g_rd = _draw(cfg, chunk_stream(seed, index), size)
    if scheme is Scheme.OMA:
        total = _oma_rate(rho, g_sr, g_sd, g_rd)
        stats = (None, None, _ChunkStats.of(total))
    else:
        s1, s2 = _noma_rates(cfg, rho, g_sr, g_sd, g_rd)
        stats = (_ChunkStats.of(s1), _ChunkStats.of(s2), _ChunkStats.of(s1 + s2))
    create_or_get_shared_event_bus().emit(CHUNK_DONE, index, size)
    return stats


def _outage_chunk(job, cfg, rho, seed):
    index, size = job
    g_sr, g_sd, g_rd = _draw(cfg, chunk_stream(seed, index), size)
    theta = cfg.theta
    # s1 is never decodable under SIC when a1 <= a2 theta
    if cfg.a1 > cfg.a2 * theta:
        served = ((_s1_sinr(g_sd, cfg, rho) >= theta)
                  & (_s1_sinr(g_sr, cfg, rho) >= theta)
                  & (g_sr * cfg.a2 * rho >= theta)
                  & (g_rd * rho >= theta))
        events = size - int(np.count_nonzero(served))
    else:
        events = size
    create_or_get_shared_event_bus().emit(CHUNK_DONE, index, size)
    return events


def _settings(n_trials, seed, chunk_size):
    configuration = LabConfiguration.get_instance()
    n_trials = configuration.n_trials if n_trials is None else n_trials
    seed = configuration.seed if seed is None else seed
    chunk_size = configuration.chunk_size if chunk_size is None else chunk_size
    require(isinstance(n_trials, (int, np.integer)) and n_trials >= 1, f"n_trials must be >= 1, got {n_trials!r}")
    require(chunk_size >= 1, f"chunk_size must be >= 1, got {chunk_size!r}")
    return int(n_trials), int(seed), int(chunk_size)


def _run_chunks(function, layout, thread_manager, tag):
    if thread_manager is None:
        thread_manager = get_thread_manager(LabConfiguration.get_instance().workers)
    if thread_manager is None or len(layout) == 1:
        return [function(job) for job in layout]
    return thread_manager.run_ordered(function, layout, tag=tag)


def _merge(stats: Sequence[_ChunkStats]) -> _ChunkStats:
    merged = stats[0]
    for item in stats[1:]:
        merged = merged.merge(item)
    return merged


def simulate_rate_components(cfg: SystemConfig, rho: float, n_trials: int = None, seed: int = None,
                             chunk_size: int = None, thread_manager=None) -> Tuple[McEstimate, McEstimate, McEstimate]:
    """NOMA estimates of (C_s1, C_s2, C_s1 + C_s2) from the same trials."""
    require(rho > 0, f"rho must be > 0, got {rho!r}")
    n_trials, seed, chunk_size = _settings(n_trials, seed, chunk_size)
    layout = chunk_layout(n_trials, chunk_size)
    per_chunk = _run_chunks(partial(_rate_chunk, cfg=cfg, rho=rho, scheme=Scheme.NOMA, seed=seed), layout,
                            thread_manager, tag=f'rate-{rho:.6g}-{seed}')
    return tuple(_merge([stats[i] for stats in per_chunk]).estimate(seed) for i in range(3))


def simulate_rate(cfg: SystemConfig, rho: float, scheme: Scheme = Scheme.NOMA, n_trials: int = None, seed: int = None,
                  chunk_size: int = None, thread_manager=None) -> McEstimate:
    require(rho > 0, f"rho must be > 0, got {rho!r}")
    scheme = Scheme(scheme)
    n_trials, seed, chunk_size = _settings(n_trials, seed, chunk_size)
    layout = chunk_layout(n_trials, chunk_size)
    per_chunk = _run_chunks(partial(_rate_chunk, cfg=cfg, rho=rho, scheme=scheme, seed=seed), layout,
                            thread_manager, tag=f'rate-{scheme}-{rho:.6g}-{seed}')
    estimate = _merge([stats[2] for stats in per_chunk]).estimate(seed)
    logger.debug(f"[Simulator] {scheme} rate at rho={rho:.6g}: {estimate.mean:.6f} +/- {estimate.stderr:.2g}")
    return estimate


def simulate_outage(cfg: SystemConfig, rho: float, n_trials: int = None, seed: int = None,
                    chunk_size: int = None, thread_manager=None) -> McEstimate:
    require(rho > 0, f"rho must be > 0, got {rho!r}")
    n_trials, seed, chunk_size = _settings(n_trials, seed, chunk_size)
    layout = chunk_layout(n_trials, chunk_size)
    events = sum(_run_chunks(partial(_outage_chunk, cfg=cfg, rho=rho, seed=seed), layout,
                             thread_manager, tag=f'outage-{rho:.6g}-{seed}'))
    p = events / n_trials
    estimate = McEstimate(mean=p, stderr=math.sqrt(p * (1.0 - p) / n_trials), n_trials=n_trials, master_seed=seed)
    logger.debug(f"[Simulator] outage at rho={rho:.6g}: {events}/{n_trials}")
    return estimate


def _row_base(cfg, rho_db, scheme, trials):
    return dict(
        rho_db=float(rho_db),
        scheme=scheme,
        combiner=cfg.combiner.value,
        m_sr=cfg.sr.m,
        m_sd=cfg.sd.m,
        m_rd=cfg.rd.m,
        n_r=cfg.n_r,
        n_d=cfg.n_d,
        a2=cfg.a2 if scheme is Scheme.NOMA else None,
        trials=trials,
    )


def sweep_point(cfg: SystemConfig, rho_db: float, scheme: Scheme, metric: Metric, n_trials: int = None,
                seed: int = None, a2_grid: Optional[Sequence[float]] = None, thread_manager=None) -> SweepRow:
    """
    One sweep row. With `a2_grid` the NOMA power split is first set to the outage-optimal
    grid value at this rho. Every rho point reuses `seed`.
    """
    scheme, metric = Scheme(scheme), Metric(metric)
    n_trials, seed, _chunk_size = _settings(n_trials, seed, None)
    rho = db_to_linear(rho_db)
    if scheme is Scheme.NOMA and a2_grid is not None:
        cfg = cfg.with_a2(optimal_a2(cfg, rho, a2_grid).a2_star)
    row = _row_base(cfg, rho_db, scheme, n_trials)

    if metric is Metric.RATE:
        estimate = simulate_rate(cfg, rho, scheme, n_trials, seed, thread_manager=thread_manager)
        row.update(rate_mc=estimate.mean, rate_mc_stderr=estimate.stderr)
        if scheme is Scheme.NOMA:
            report = rate_total(cfg, rho)
            row.update(rate_s1_analytic=report.rate_s1, rate_s2_analytic=report.rate_s2,
                       rate_total_analytic=report.rate_total, rate_high_snr=rate_high_snr(cfg, rho).rate_total)
    else:
        if scheme is Scheme.OMA:
            raise DomainError("outage is only defined for the NOMA scheme")
        estimate = simulate_outage(cfg, rho, n_trials, seed, thread_manager=thread_manager)
        row.update(outage_analytic=outage_closed(cfg, rho), outage_mc=estimate.mean,
                   outage_mc_stderr=estimate.stderr)
    return SweepRow(**row)


def run_sweep(cfg: SystemConfig, rho_grid_db: Sequence[float], scheme: Scheme = Scheme.NOMA,
              metric: Metric = Metric.RATE, n_trials: int = None, seed: int = None,
              a2_grid: Optional[Sequence[float]] = None, thread_manager=None) -> List[SweepRow]:
    """One SweepRow per grid point, ordered by rho; OMA rows carry no analytic values."""
    rho_grid_db = [float(rho_db) for rho_db in rho_grid_db]
    require(len(rho_grid_db) > 0, "rho grid must not be empty")
    require(all(b > a for a, b in zip(rho_grid_db, rho_grid_db[1:])), "rho grid must be increasing")
    scheme, metric = Scheme(scheme), Metric(metric)
    if metric is Metric.OUTAGE and scheme is Scheme.OMA:
        raise DomainError("outage is only defined for the NOMA scheme")

    bus = create_or_get_shared_event_bus()
    rows = []
    with scoped_thread_manager(thread_manager, LabConfiguration.get_instance().workers) as pool:
        for index, rho_db in enumerate(rho_grid_db):
            row = sweep_point(cfg, rho_db, scheme, metric, n_trials, seed, a2_grid, pool)
            rows.append(row)
            bus.emit(SWEEP_POINT_DONE, index, len(rho_grid_db), row)
    logger.info(f"[Sweep] {scheme} {metric} sweep finished: {len(rows)} points")
    return rows
