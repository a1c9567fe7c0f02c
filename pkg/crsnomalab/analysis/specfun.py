"""
Special-function kernels used by the closed-form rate and outage expressions.

The rate formulas need G(n, x) = exp(x) * Gamma(-n, x) at x = decay / rho, which runs from
1e-8 (very high SNR) to 1e4 and beyond (very low SNR). Since

    Gamma(-n, x) = x**(-n) * E_{n+1}(x),

the kernel is evaluated as x**(-n) * [exp(x) * E_{n+1}(x)], with the bracket taken from the
continued fraction for x >= 1 and from the power series for x < 1. Nothing is ever
formed as exp(x) and Gamma(-n, x) separately, and the log form never overflows.
"""
import math
import operator

from scipy import special

from crsnomalab.core.errors import DomainError, NumericalFailure, require

EULER_GAMMA = 0.57721566490153286061

_SERIES_SWITCH = 1.0
_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 100_000


def _order(n, minimum=0):
    try:
        n = operator.index(n)
    except TypeError:
        raise DomainError(f"order must be an integer, got {n!r}") from None
    require(n >= minimum, f"order must be >= {minimum}, got {n}")
    return n


def ln_gamma(x):
    require(x > 0, f"ln_gamma requires x > 0, got {x}")
    return float(special.gammaln(x))


def reg_lower_gamma(a, x):
    """P(a, x) = gamma(a, x) / Gamma(a)."""
    require(a > 0, f"reg_lower_gamma requires a > 0, got {a}")
    require(x >= 0, f"reg_lower_gamma requires x >= 0, got {x}")
    return float(special.gammainc(a, x))


def reg_upper_gamma(a, x):
    """Q(a, x) = Gamma(a, x) / Gamma(a), evaluated directly so small tails keep their precision."""
    require(a > 0, f"reg_upper_gamma requires a > 0, got {a}")
    require(x >= 0, f"reg_upper_gamma requires x >= 0, got {x}")
    return float(special.gammaincc(a, x))


def digamma_int(n):
    """psi(n) for a positive integer n, as -gamma_E + H_{n-1}."""
    n = _order(n, minimum=1)
    return -EULER_GAMMA + math.fsum(1.0 / k for k in range(1, n))


def _scaled_en_continued_fraction(p, x):
    """exp(x) * E_p(x) for x >= 1 by the modified Lentz method."""
    b = x + p
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER + 1):
        an = -i * (p - 1 + i)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise NumericalFailure(f"continued fraction for E_{p}({x}) did not converge")


def _en_series(p, x):
    """E_p(x) for 0 < x < 1 from its power series (log term at k = p - 1)."""
    nm1 = p - 1
    terms = [1.0 / nm1 if nm1 != 0 else -math.log(x) - EULER_GAMMA]
    partial = terms[0]
    fact = 1.0
    for i in range(1, _MAX_ITER + 1):
        fact *= -x / i
        if i != nm1:
            delta = -fact / (i - nm1)
        else:
            delta = fact * (-math.log(x) + digamma_int(p))
        terms.append(delta)
        partial += delta
        if i >= nm1 and abs(delta) <= _EPS * abs(partial):
            return math.fsum(terms)
    raise NumericalFailure(f"power series for E_{p}({x}) did not converge")


def log_scaled_upper_gamma(n, x):
    """ln G(n, x) = ln(exp(x) * Gamma(-n, x)) for integer n >= 0 and x > 0."""
    n = _order(n)
    require(x > 0 and math.isfinite(x), f"scaled_upper_gamma requires finite x > 0, got {x}")
    if x >= _SERIES_SWITCH:
        return math.log(_scaled_en_continued_fraction(n + 1, x)) - n * math.log(x)
    return x - n * math.log(x) + math.log(_en_series(n + 1, x))


def scaled_upper_gamma(n, x):
    """
    G(n, x) = exp(x) * Gamma(-n, x).

    Raises:
        DomainError: n negative or non-integer, or x <= 0.
        NumericalFailure: the value is not representable as a double (x tiny with n large);
            use `log_scaled_upper_gamma` in that regime.
    """
    log_value = log_scaled_upper_gamma(n, x)
    try:
        return math.exp(log_value)
    except OverflowError:
        raise NumericalFailure(f"G({n}, {x}) overflows a double (log value {log_value:.6g})") from None


def exp1_scaled(x):
    """exp(x) * E_1(x)."""
    return scaled_upper_gamma(0, x)
