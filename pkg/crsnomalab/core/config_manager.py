import math
from dataclasses import dataclass
from typing import Optional, Tuple


def rho_grid(start_db, stop_db, step_db):
    """Inclusive grid start, start + step, ..., stop (dB), rounded to 10 decimals."""
    count = int(math.floor((stop_db - start_db) / step_db + 1e-9))
    return tuple(round(start_db + i * step_db, 10) for i in range(count + 1))


RHO_RATE_DB = rho_grid(0.0, 30.0, 2.0)
RHO_OUTAGE_DB = rho_grid(0.0, 40.0, 2.5)


@dataclass(frozen=True)
class FigureCase:
    m: int
    n: int
    combiner: str


@dataclass(frozen=True)
class FigurePreset:
    """
    A figure reproduction: which cases to run, on which rho range, with which schemes.

    kind is 'outage' (closed form and MC outage curves), 'a2_trace' (per-a2 CCDF factors at
    each rho in `rho_db`) or 'rate' (rate curves, NOMA rows with analytic columns).
    a2 None means the outage-optimal grid value at every rho.
    """
    name: str
    kind: str
    cases: Tuple[FigureCase, ...]
    rho_db: Tuple[float, ...]
    schemes: Tuple[str, ...] = ('noma',)
    a2: Optional[float] = None


def all_figure_presets():
    both = ('sc', 'mrc')
    return {
        'fig2': FigurePreset(
            name='fig2', kind='outage', rho_db=RHO_OUTAGE_DB,
            cases=tuple(FigureCase(m, n, c) for c in both for m in (1, 2) for n in (1, 2)),
        ),
        'fig3': FigurePreset(name='fig3', kind='a2_trace', rho_db=(2.0,), cases=(FigureCase(2, 2, 'sc'),)),
        'fig4': FigurePreset(name='fig4', kind='a2_trace', rho_db=(20.0,), cases=(FigureCase(2, 2, 'sc'),)),
        'fig5': FigurePreset(
            name='fig5', kind='rate', rho_db=RHO_RATE_DB, schemes=('noma', 'oma'),
            cases=(FigureCase(2, 1, 'mrc'), FigureCase(2, 2, 'mrc')),
        ),
        'fig6': FigurePreset(
            name='fig6', kind='rate', rho_db=RHO_RATE_DB, schemes=('noma', 'oma'),
            cases=(FigureCase(1, 2, 'mrc'), FigureCase(2, 2, 'mrc')),
        ),
        'fig7': FigurePreset(
            name='fig7', kind='rate', rho_db=RHO_RATE_DB, schemes=('noma', 'oma'),
            cases=tuple(FigureCase(2, n, c) for c in both for n in (1, 2)),
        ),
        'fig8': FigurePreset(
            name='fig8', kind='rate', rho_db=RHO_RATE_DB, a2=0.1,
            cases=tuple(FigureCase(2, n, c) for c in both for n in (1, 2)),
        ),
    }
