"""
Exponential-polynomial expansions of the combined-gain CCDFs.

Every CCDF in the system is a finite sum of terms

    weight * x**exponent * exp(-decay * x),    weight = coeff * rate**exponent,

with rate = m / (scale * Omega). Selection combining yields the multinomial expansion over
weak compositions (k_0, ..., k_m) of N with k_0 != N; maximal-ratio combining yields the
Erlang tail sum. The CCDF of a minimum of independent gains is the product of two such
sums, which `product_terms` forms with each weight carried as (sign, log magnitude).
"""
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence, Tuple

from crsnomalab.core.errors import DomainError, require


@dataclass(frozen=True)
class SeriesTerm:
    coeff: float
    exponent: int
    decay: float
    rate: float

    @property
    def sign(self) -> int:
        return -1 if self.coeff < 0 else 1

    @property
    def log_weight(self) -> float:
        """ln |coeff * rate**exponent|."""
        return math.log(abs(self.coeff)) + self.exponent * math.log(self.rate)

    @property
    def weight(self) -> float:
        return self.sign * math.exp(self.log_weight)


@dataclass(frozen=True)
class CompositionTerm(SeriesTerm):
    """
    One class of the selection-combining expansion. `coeff` already carries the CCDF sign
    -(-1)**(N - k_0), the multinomial coefficient and the prod (1/mu!)**k_{mu+1} factor.
    """
    ks: Tuple[int, ...] = ()


@dataclass(frozen=True)
class PairTerm:
    """Product of one term from each of two independent CCDF expansions."""
    sign: int
    log_weight: float
    exponent: int
    decay: float

    @property
    def weight(self) -> float:
        return self.sign * math.exp(self.log_weight)


def weak_compositions(n: int, parts: int, exclude_first_full: bool = False) -> Iterator[Tuple[int, ...]]:
    """Yields length-`parts` tuples of non-negative integers summing to `n` in lexicographic order."""
    require(parts >= 1, f"parts must be >= 1, got {parts}")
    require(n >= 0, f"n must be >= 0, got {n}")

    def compose(remaining, slots):
        if slots == 1:
            yield (remaining,)
            return
        for first in range(remaining + 1):
            for rest in compose(remaining - first, slots - 1):
                yield (first,) + rest

    for ks in compose(n, parts):
        if exclude_first_full and ks[0] == n:
            continue
        yield ks


def multinomial(n: int, ks: Sequence[int]) -> int:
    """n! / (k_0! ... k_m!) in exact integer arithmetic."""
    if any(k < 0 for k in ks) or sum(ks) != n:
        raise DomainError(f"multinomial({n}; {tuple(ks)}) requires non-negative parts summing to n")
    result = 1
    remaining = n
    for k in ks:
        result *= math.comb(remaining, k)
        remaining -= k
    return result


@lru_cache(maxsize=None)
def _reciprocal_factorials(m: int) -> Tuple[float, ...]:
    return tuple(1.0 / math.factorial(mu) for mu in range(m))


def expansion_terms(link, n_antennas: int, gain_scale: float = 1.0) -> Tuple[CompositionTerm, ...]:
    """
    Terms of 1 - [P(m, m x / (scale Omega))]**N, the CCDF of scale * max of N i.i.d. gamma gains.

    Args:
        link (LinkSpec): Nakagami shape m and mean-square Omega of one antenna branch.
        n_antennas (int): Number of branches N.
        gain_scale (float): 1 for a plain link; a2 for the scaled S->R gain.
    """
    require(n_antennas >= 1, f"n_antennas must be >= 1, got {n_antennas}")
    require(gain_scale > 0, f"gain_scale must be > 0, got {gain_scale}")
    return _expansion_terms(link.m, float(link.omega), int(n_antennas), float(gain_scale))


@lru_cache(maxsize=1024)
def _expansion_terms(m, omega, n_antennas, gain_scale):
    rate = m / (gain_scale * omega)
    inverse_factorials = _reciprocal_factorials(m)
    terms = []
    for ks in weak_compositions(n_antennas, m + 1, exclude_first_full=True):
        k0 = ks[0]
        exponent = sum(mu * ks[mu + 1] for mu in range(m))
        factor = math.prod(inverse_factorials[mu] ** ks[mu + 1] for mu in range(m))
        sign = -1 if (n_antennas - k0) % 2 == 0 else 1
        terms.append(CompositionTerm(
            coeff=sign * multinomial(n_antennas, ks) * factor,
            exponent=exponent,
            decay=(n_antennas - k0) * rate,
            rate=rate,
            ks=ks,
        ))
    return tuple(terms)


def erlang_terms(link, n_antennas: int, gain_scale: float = 1.0) -> Tuple[SeriesTerm, ...]:
    """Terms of Q(m N, m x / (scale Omega)), the CCDF of scale * (sum of N i.i.d. gamma gains)."""
    require(n_antennas >= 1, f"n_antennas must be >= 1, got {n_antennas}")
    require(gain_scale > 0, f"gain_scale must be > 0, got {gain_scale}")
    return _erlang_terms(link.m, float(link.omega), int(n_antennas), float(gain_scale))


@lru_cache(maxsize=1024)
def _erlang_terms(m, omega, n_antennas, gain_scale):
    rate = m / (gain_scale * omega)
    return tuple(
        SeriesTerm(coeff=1.0 / math.factorial(mu), exponent=mu, decay=rate, rate=rate)
        for mu in range(m * n_antennas)
    )


def product_terms(terms_a: Sequence[SeriesTerm], terms_b: Sequence[SeriesTerm]) -> Tuple[PairTerm, ...]:
    """CCDF expansion of min(A, B) for independent A, B given their CCDF expansions."""
    return tuple(
        PairTerm(
            sign=a.sign * b.sign,
            log_weight=a.log_weight + b.log_weight,
            exponent=a.exponent + b.exponent,
            decay=a.decay + b.decay,
        )
        for a in terms_a
        for b in terms_b
    )


def ccdf_from_terms(terms, x: float) -> float:
    require(x >= 0, f"x must be >= 0, got {x}")
    return math.fsum(t.weight * x ** t.exponent * math.exp(-t.decay * x) for t in terms)


def pdf_from_terms(terms, x: float) -> float:
    """-d/dx of the expansion: sum of weight * exp(-decay x) * (decay x**n - n x**(n-1))."""
    require(x >= 0, f"x must be >= 0, got {x}")
    parts = []
    for t in terms:
        n = t.exponent
        envelope = t.weight * math.exp(-t.decay * x)
        parts.append(envelope * t.decay * x ** n)
        if n > 0:
            parts.append(-envelope * n * x ** (n - 1))
    return math.fsum(parts)
