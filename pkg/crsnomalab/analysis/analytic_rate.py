"""
Ergodic rates of the two NOMA symbols.

With X = min(g_sd, g_sr) and Y = min(a2 g_sr, g_rd),

    C_s1 = E[log2(1 + rho X) - log2(1 + a2 rho X)] / 2
    C_s2 = E[log2(1 + rho Y)] / 2

and E[ln(1 + c Z)] = c * int_0^inf CCDF_Z(x) / (1 + c x) dx. Every CCDF is a finite sum of
w x**n exp(-d x), and each such term integrates to w * Gamma(n + 1) * c**(-n) * G(n, d / c)
with G(n, x) = exp(x) Gamma(-n, x). Terms are assembled as logs with the sign carried apart
and summed with math.fsum.
"""
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy import integrate

from crsnomalab.analysis.channel_model import SystemConfig, ccdf_terms, gain_ccdf, gain_pdf, min_pair_ccdf
from crsnomalab.analysis.series_support import product_terms
from crsnomalab.analysis.specfun import digamma_int, ln_gamma, log_scaled_upper_gamma
from crsnomalab.core import logger
from crsnomalab.core.config import LabConfiguration
from crsnomalab.core.errors import NumericalFailure, require

_HALF_OVER_LN2 = 0.5 / math.log(2.0)
# largest error estimate accepted when QUADPACK reports a warning
_QUAD_ACCEPTABLE_ERROR = 1e-9


class RateMethod(str, Enum):
    CLOSED_FORM = 'closed_form'
    HIGH_SNR = 'high_snr_approx'
    QUADRATURE = 'quadrature'


@dataclass(frozen=True)
class RateReport:
    rho: float
    rate_s1: float
    rate_s2: float
    method: RateMethod

    @property
    def rate_total(self) -> float:
        return self.rate_s1 + self.rate_s2


def _check_rho(rho):
    require(math.isfinite(rho) and rho > 0, f"rho must be finite and > 0, got {rho!r}")


@lru_cache(maxsize=512)
def _pair_terms(link_a, n_a, scale_a, link_b, n_b, scale_b, combiner):
    return product_terms(ccdf_terms(link_a, n_a, combiner, scale_a), ccdf_terms(link_b, n_b, combiner, scale_b))


def x_terms(cfg: SystemConfig):
    """CCDF expansion of X = min(g_sd, g_sr)."""
    return _pair_terms(cfg.sd, cfg.n_d, 1.0, cfg.sr, cfg.n_r, 1.0, cfg.combiner)


def y_terms(cfg: SystemConfig):
    """CCDF expansion of Y = min(a2 g_sr, g_rd)."""
    return _pair_terms(cfg.sr, cfg.n_r, cfg.a2, cfg.rd, cfg.n_d, 1.0, cfg.combiner)


def _log_term(term, c):
    """ln |w Gamma(n+1) c**(-n) G(n, d/c)| for one CCDF term against 1/(1 + c x)."""
    n = term.exponent
    return term.log_weight + ln_gamma(n + 1) - n * math.log(c) + log_scaled_upper_gamma(n, term.decay / c)


def expected_log1p(terms, c, rho=None):
    """E[ln(1 + c Z)] from the CCDF expansion of Z."""
    parts = []
    for term in terms:
        try:
            log_value = _log_term(term, c)
            parts.append(term.sign * math.exp(log_value))
        except (OverflowError, NumericalFailure) as e:
            raise NumericalFailure(f"term assembly failed: {e}", rho=rho, term=term) from None
    total = math.fsum(parts)
    if not math.isfinite(total):
        raise NumericalFailure("non-finite closed-form sum", rho=rho)
    return total


def rate_s1_closed(cfg: SystemConfig, rho: float) -> float:
    _check_rho(rho)
    terms = x_terms(cfg)
    value = _HALF_OVER_LN2 * (expected_log1p(terms, rho, rho) - expected_log1p(terms, cfg.a2 * rho, rho))
    return max(value, 0.0)


def rate_s2_closed(cfg: SystemConfig, rho: float) -> float:
    _check_rho(rho)
    return max(_HALF_OVER_LN2 * expected_log1p(y_terms(cfg), rho, rho), 0.0)


def rate_total(cfg: SystemConfig, rho: float) -> RateReport:
    return RateReport(rho=rho, rate_s1=rate_s1_closed(cfg, rho), rate_s2=rate_s2_closed(cfg, rho),
                      method=RateMethod.CLOSED_FORM)


def high_snr_constant(cfg: SystemConfig) -> float:
    """
    E[log2 Y] / 2, the offset of C_s2 from 0.5 log2(rho) at high SNR. Per term,

        int ln(x) * (-d/dx)(w x**n e**(-a x)) dx
            = w a**(-n) [Gamma(n+1) (psi(n+1) - ln a) - n Gamma(n) (psi(n) - ln a)]

    where the second part vanishes for n = 0.
    """
    parts = []
    for term in y_terms(cfg):
        n, alpha = term.exponent, term.decay
        log_alpha = math.log(alpha)
        scale = term.sign * math.exp(term.log_weight - n * log_alpha)
        bracket = math.exp(ln_gamma(n + 1)) * (digamma_int(n + 1) - log_alpha)
        if n > 0:
            bracket -= n * math.exp(ln_gamma(n)) * (digamma_int(n) - log_alpha)
        parts.append(scale * bracket)
    return _HALF_OVER_LN2 * math.fsum(parts)


def rate_high_snr(cfg: SystemConfig, rho: float) -> RateReport:
    _check_rho(rho)
    rate_s1 = 0.5 * math.log2(1.0 + cfg.a1 / cfg.a2)
    rate_s2 = 0.5 * math.log2(rho) + high_snr_constant(cfg)
    return RateReport(rho=rho, rate_s1=rate_s1, rate_s2=rate_s2, method=RateMethod.HIGH_SNR)


def rate_slope(cfg: SystemConfig, rho: float) -> float:
    """rate_total(10 rho) - rate_total(rho); tends to 0.5 log2(10) at high SNR."""
    return rate_total(cfg, 10.0 * rho).rate_total - rate_total(cfg, rho).rate_total


# Quadrature oracle


def _checked_quad(function, lower, upper, rho=None, **kwargs):
    configuration = LabConfiguration.get_instance()
    kwargs.setdefault('epsabs', configuration.quad_epsabs)
    kwargs.setdefault('epsrel', configuration.quad_epsrel)
    kwargs.setdefault('limit', 200)
    result = integrate.quad(function, lower, upper, full_output=1, **kwargs)
    value, abserr = result[0], result[1]
    if len(result) > 3:
        if not (math.isfinite(value) and abserr <= _QUAD_ACCEPTABLE_ERROR):
            raise NumericalFailure(f"quadrature on [{lower}, {upper}] did not converge "
                                   f"(abserr={abserr:.3g}): {result[3]}", rho=rho)
        logger.debug(f"[Quadrature] accepted [{lower:.6g}, {upper:.6g}] with abserr={abserr:.3g}")
    return value


def integration_cutoff(ccdf, start=1.0, cutoff_scale=1.0):
    """Smallest start * 2**k with ccdf below the configured cutoff, times `cutoff_scale`."""
    threshold = LabConfiguration.get_instance().ccdf_cutoff
    x = start
    for _ in range(2000):
        if ccdf(x) < threshold:
            return x * cutoff_scale
        x *= 2.0
    raise NumericalFailure(f"CCDF never fell below {threshold}")


def _breakpoints(rho, x_cut):
    points = [0.0]
    x = 1.0 / rho
    while x < x_cut:
        points.append(x)
        x *= 10.0
    points.append(x_cut)
    return points


def _integrate_segments(function, rho, x_cut):
    points = _breakpoints(rho, x_cut)
    return math.fsum(_checked_quad(function, lo, hi, rho=rho) for lo, hi in zip(points[:-1], points[1:]))


def _x_ccdf(cfg):
    return lambda x: min_pair_ccdf(cfg.sd, cfg.n_d, 1.0, cfg.sr, cfg.n_r, 1.0, cfg.combiner, x)


def _y_ccdf(cfg):
    return lambda x: min_pair_ccdf(cfg.sr, cfg.n_r, cfg.a2, cfg.rd, cfg.n_d, 1.0, cfg.combiner, x)


def rate_s1_quadrature(cfg: SystemConfig, rho: float, cutoff_scale: float = 1.0) -> float:
    _check_rho(rho)
    ccdf = _x_ccdf(cfg)
    x_cut = integration_cutoff(ccdf, cutoff_scale=cutoff_scale)
    a1_rho, a2_rho = cfg.a1 * rho, cfg.a2 * rho

    def integrand(x):
        return ccdf(x) * a1_rho / ((1.0 + rho * x) * (1.0 + a2_rho * x))

    return _HALF_OVER_LN2 * _integrate_segments(integrand, rho, x_cut)


def rate_s2_quadrature(cfg: SystemConfig, rho: float, cutoff_scale: float = 1.0) -> float:
    _check_rho(rho)
    ccdf = _y_ccdf(cfg)
    x_cut = integration_cutoff(ccdf, cutoff_scale=cutoff_scale)
    return _HALF_OVER_LN2 * _integrate_segments(lambda x: rho * ccdf(x) / (1.0 + rho * x), rho, x_cut)


def rate_quadrature_oracle(cfg: SystemConfig, rho: float, cutoff_scale: float = 1.0) -> RateReport:
    return RateReport(rho=rho,
                      rate_s1=rate_s1_quadrature(cfg, rho, cutoff_scale),
                      rate_s2=rate_s2_quadrature(cfg, rho, cutoff_scale),
                      method=RateMethod.QUADRATURE)


def y_pdf(cfg: SystemConfig, x: float) -> float:
    """Density of Y = min(a2 g_sr, g_rd)."""
    a2 = cfg.a2
    sr_scaled = x / a2
    return (gain_pdf(cfg.sr, cfg.n_r, cfg.combiner, sr_scaled) / a2 * gain_ccdf(cfg.rd, cfg.n_d, cfg.combiner, x)
            + gain_ccdf(cfg.sr, cfg.n_r, cfg.combiner, sr_scaled) * gain_pdf(cfg.rd, cfg.n_d, cfg.combiner, x))


def high_snr_constant_quadrature(cfg: SystemConfig) -> float:
    """E[log2 Y] / 2 by integrating ln(x) against the density of Y."""
    density = lambda x: y_pdf(cfg, x)  # noqa: E731
    near = _checked_quad(density, 0.0, 1.0, weight='alg-loga', wvar=(0.0, 0.0))
    x_cut = integration_cutoff(_y_ccdf(cfg))
    far = 0.0
    if x_cut > 1.0:
        far = _checked_quad(lambda x: math.log(x) * density(x), 1.0, x_cut,
                            points=list(np.geomspace(1.0, x_cut, 8)[1:-1]))
    return _HALF_OVER_LN2 * (near + far)

