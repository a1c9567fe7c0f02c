"""
Link statistics and the effective post-combining gains.

A branch gain |h|**2 over Nakagami-m fading is Gamma(shape m, scale Omega/m). Selection
combining keeps the largest of N branch gains, maximal-ratio combining adds them, so with
P(a, x) the regularized lower incomplete gamma function:

    SC:  F(x) = P(m, m x / Omega) ** N
    MRC: F(x) = P(m N, m x / Omega)
"""
import math
import operator
from dataclasses import dataclass, replace
from enum import Enum
from typing import Tuple

import numpy as np
from scipy import integrate, stats

from crsnomalab.analysis.series_support import erlang_terms, expansion_terms
from crsnomalab.analysis.specfun import reg_lower_gamma, reg_upper_gamma
from crsnomalab.core import logger
from crsnomalab.core.config import LabConfiguration
from crsnomalab.core.errors import ConfigurationError, require

_warned_omega_pairs = set()


class CombinerKind(str, Enum):
    SC = 'sc'
    MRC = 'mrc'

    def __str__(self):
        return self.value


def db_to_linear(rho_db):
    return 10.0 ** (rho_db / 10.0)


@dataclass(frozen=True)
class LinkSpec:
    """One fading link: integer Nakagami shape `m` and mean-square value `omega`."""
    m: int
    omega: float

    def __post_init__(self):
        if isinstance(self.m, bool):
            raise ConfigurationError(f"Nakagami shape must be a positive integer, got {self.m!r}")
        try:
            m = operator.index(self.m)
        except TypeError:
            if isinstance(self.m, float) and self.m.is_integer():
                m = int(self.m)
            else:
                raise ConfigurationError(f"Nakagami shape must be a positive integer, got {self.m!r}") from None
        require(m >= 1, f"Nakagami shape must be >= 1, got {m}", ConfigurationError)
        require(math.isfinite(self.omega) and self.omega > 0,
                f"mean-square value must be finite and > 0, got {self.omega!r}", ConfigurationError)
        object.__setattr__(self, 'm', m)
        object.__setattr__(self, 'omega', float(self.omega))


@dataclass(frozen=True)
class SystemConfig:
    """
    The three-node system: S->R, S->D and R->D links, relay and destination antenna counts,
    the combiner both receivers use, the power split (a1 = 1 - a2) and the target rate R.
    """
    sr: LinkSpec
    sd: LinkSpec
    rd: LinkSpec
    n_r: int
    n_d: int
    combiner: CombinerKind
    a2: float
    target_rate: float = 1.0

    def __post_init__(self):
        try:
            object.__setattr__(self, 'combiner', CombinerKind(self.combiner))
        except ValueError:
            raise ConfigurationError(f"combiner must be one of sc, mrc; got {self.combiner!r}") from None
        for name in ('n_r', 'n_d'):
            value = getattr(self, name)
            require(isinstance(value, (int, np.integer)) and not isinstance(value, bool) and value >= 1,
                    f"{name} must be a positive integer, got {value!r}", ConfigurationError)
            object.__setattr__(self, name, int(value))
        require(math.isfinite(self.a2) and 0.0 < self.a2 < 0.5,
                f"a2 must satisfy 0 < a2 < 0.5 (a1 > a2), got {self.a2!r}", ConfigurationError)
        require(math.isfinite(self.target_rate) and self.target_rate > 0,
                f"target rate must be > 0, got {self.target_rate!r}", ConfigurationError)
        object.__setattr__(self, 'a2', float(self.a2))
        object.__setattr__(self, 'target_rate', float(self.target_rate))
        self.validate()

    def validate(self):
        """Warns (once per pair) when Omega_sd >= Omega_sr; the configuration stays usable."""
        pair = (self.sd.omega, self.sr.omega)
        if self.sd.omega >= self.sr.omega and pair not in _warned_omega_pairs:
            _warned_omega_pairs.add(pair)
            logger.warning(f"[SystemConfig] Omega_sd={self.sd.omega} >= Omega_sr={self.sr.omega}; "
                           f"the relay link is expected to be the stronger one")
        return self

    @property
    def a1(self) -> float:
        return 1.0 - self.a2

    @property
    def theta(self) -> float:
        return 2.0 ** (2.0 * self.target_rate) - 1.0

    def with_a2(self, a2):
        return replace(self, a2=a2)

    def with_combiner(self, combiner):
        return replace(self, combiner=combiner)

    @classmethod
    def uniform(cls, m=1, n=1, combiner=CombinerKind.SC, a2=0.1, target_rate=None,
                omega_sd=None, omega_sr=None, omega_rd=None, n_r=None, n_d=None):
        """Same shape `m` on every link and `n` antennas at both receivers, defaults from LabConfiguration."""
        defaults = LabConfiguration.get_instance()
        return cls(
            sr=LinkSpec(m, defaults.omega_sr if omega_sr is None else omega_sr),
            sd=LinkSpec(m, defaults.omega_sd if omega_sd is None else omega_sd),
            rd=LinkSpec(m, defaults.omega_rd if omega_rd is None else omega_rd),
            n_r=n if n_r is None else n_r,
            n_d=n if n_d is None else n_d,
            combiner=combiner,
            a2=a2,
            target_rate=defaults.target_rate if target_rate is None else target_rate,
        )


def _check_x(x):
    require(x >= 0, f"gain argument must be >= 0, got {x}")


def gain_cdf(link: LinkSpec, n: int, combiner: CombinerKind, x: float) -> float:
    _check_x(x)
    combiner = CombinerKind(combiner)
    if x == 0:
        return 0.0
    u = link.m * x / link.omega
    if combiner is CombinerKind.MRC:
        return reg_lower_gamma(link.m * n, u)
    return reg_lower_gamma(link.m, u) ** n


def gain_ccdf(link: LinkSpec, n: int, combiner: CombinerKind, x: float) -> float:
    """1 - gain_cdf, formed without subtracting from one so deep tails keep their digits."""
    _check_x(x)
    combiner = CombinerKind(combiner)
    if x == 0:
        return 1.0
    u = link.m * x / link.omega
    if combiner is CombinerKind.MRC:
        return reg_upper_gamma(link.m * n, u)
    lower = reg_lower_gamma(link.m, u)
    if lower == 0.0:
        return 1.0
    upper = reg_upper_gamma(link.m, u)
    log_lower = math.log1p(-upper) if upper < 0.5 else math.log(lower)
    return -math.expm1(n * log_lower)


def gain_pdf(link: LinkSpec, n: int, combiner: CombinerKind, x: float) -> float:
    _check_x(x)
    combiner = CombinerKind(combiner)
    scale = link.omega / link.m
    if combiner is CombinerKind.MRC:
        return float(stats.gamma.pdf(x, link.m * n, scale=scale))
    branch_pdf = float(stats.gamma.pdf(x, link.m, scale=scale))
    if n == 1:
        return branch_pdf
    return n * gain_cdf(link, 1, CombinerKind.SC, x) ** (n - 1) * branch_pdf


def gain_mean(link: LinkSpec, n: int, combiner: CombinerKind) -> float:
    combiner = CombinerKind(combiner)
    if combiner is CombinerKind.MRC:
        return n * link.omega
    if n == 1:
        return link.omega
    value, _abserr = integrate.quad(lambda x: gain_ccdf(link, n, combiner, x), 0.0, np.inf,
                                    epsabs=1e-12, epsrel=1e-12, limit=200)
    return value


def ccdf_terms(link: LinkSpec, n: int, combiner: CombinerKind, gain_scale: float = 1.0) -> Tuple:
    """Exponential-polynomial expansion of the CCDF of `gain_scale` times the combined gain."""
    if CombinerKind(combiner) is CombinerKind.MRC:
        return erlang_terms(link, n, gain_scale)
    return expansion_terms(link, n, gain_scale)


def min_pair_ccdf(link_a: LinkSpec, n_a: int, scale_a: float, link_b: LinkSpec, n_b: int, scale_b: float,
                  combiner: CombinerKind, x: float) -> float:
    """Pr(min(scale_a G_a, scale_b G_b) > x) for independent combined gains G_a, G_b."""
    _check_x(x)
    require(scale_a > 0 and scale_b > 0, f"scales must be > 0, got {scale_a}, {scale_b}")
    if x == 0:
        return 1.0
    return gain_ccdf(link_a, n_a, combiner, x / scale_a) * gain_ccdf(link_b, n_b, combiner, x / scale_b)


def sample_gains(link: LinkSpec, n: int, combiner: CombinerKind, rng: np.random.Generator, size: int) -> np.ndarray:
    """`size` independent combined gains; every call consumes exactly size * n gamma variates from `rng`."""
    branches = rng.gamma(shape=link.m, scale=link.omega / link.m, size=(size, n))
    if CombinerKind(combiner) is CombinerKind.MRC:
        return branches.sum(axis=1)
    return branches.max(axis=1)


def sample_gain(link: LinkSpec, n: int, combiner: CombinerKind, rng: np.random.Generator) -> float:
    return float(sample_gains(link, n, combiner, rng, 1)[0])
