import math

import pytest
from scipy import special

from crsnomalab.analysis import analytic_rate
from crsnomalab.analysis.analytic_rate import (RateMethod, high_snr_constant, high_snr_constant_quadrature,
                                               rate_high_snr, rate_quadrature_oracle, rate_s1_closed,
                                               rate_s2_closed, rate_s2_quadrature, rate_slope, rate_total)
from crsnomalab.analysis.channel_model import CombinerKind, SystemConfig, db_to_linear
from crsnomalab.core.errors import DomainError, NumericalFailure

HALF_LOG2_TEN = 0.5 * math.log2(10.0)
CASES = [(m, n, combiner) for m in (1, 2) for n in (1, 2, 3) for combiner in CombinerKind]


@pytest.mark.parametrize("m, n, combiner", CASES)
@pytest.mark.parametrize("a2", [0.05, 0.1, 0.2])
@pytest.mark.parametrize("rho_db", [0.0, 10.0, 20.0, 30.0])
def test_closed_form_matches_quadrature(m, n, combiner, a2, rho_db):
    cfg = SystemConfig.uniform(m=m, n=n, combiner=combiner, a2=a2)
    rho = db_to_linear(rho_db)
    closed = rate_total(cfg, rho)
    oracle = rate_quadrature_oracle(cfg, rho)
    assert closed.method is RateMethod.CLOSED_FORM and oracle.method is RateMethod.QUADRATURE
    assert closed.rate_s1 == pytest.approx(oracle.rate_s1, abs=1e-7)
    assert closed.rate_s2 == pytest.approx(oracle.rate_s2, abs=1e-7)


def test_rayleigh_example_against_quadrature(rayleigh_config):
    closed = rate_total(rayleigh_config, 10.0)
    oracle = rate_quadrature_oracle(rayleigh_config, 10.0)
    assert closed.rate_total == pytest.approx(oracle.rate_total, abs=1e-8)


def test_rates_vanish_at_low_snr(rayleigh_config):
    report = rate_total(rayleigh_config, 1e-6)
    assert 0.0 <= report.rate_s1 <= 1e-5
    assert 0.0 <= report.rate_s2 <= 1e-5


def test_first_symbol_saturates(rayleigh_config):
    assert rate_s1_closed(rayleigh_config, 1e6) == pytest.approx(1.6609640, abs=1e-3)


def test_strong_relay_link_reduces_second_symbol_to_exponential_integral():
    cfg = SystemConfig.uniform(m=1, n=1, a2=0.1, omega_sr=1e9)
    expected = math.exp(0.04) * float(special.exp1(0.04)) / (2 * math.log(2))
    assert rate_s2_closed(cfg, 10.0) == pytest.approx(expected, rel=1e-6)


def test_total_is_sum_of_symbols(two_by_two_sc):
    report = rate_total(two_by_two_sc, 100.0)
    assert report.rate_total == report.rate_s1 + report.rate_s2
    assert report.rate_s1 == rate_s1_closed(two_by_two_sc, 100.0)
    assert report.rate_s2 == rate_s2_closed(two_by_two_sc, 100.0)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_combiners_agree_with_one_antenna(m):
    sc = SystemConfig.uniform(m=m, n=1, combiner=CombinerKind.SC, a2=0.15)
    mrc = sc.with_combiner(CombinerKind.MRC)
    for rho in (1.0, 31.6, 1000.0):
        assert rate_total(sc, rho).rate_total == pytest.approx(rate_total(mrc, rho).rate_total, abs=1e-10)


@pytest.mark.parametrize("m, n", [(1, 2), (2, 2), (2, 3)])
def test_mrc_never_below_sc(m, n):
    sc = SystemConfig.uniform(m=m, n=n, combiner=CombinerKind.SC, a2=0.1)
    mrc = sc.with_combiner(CombinerKind.MRC)
    for rho_db in (0.0, 10.0, 20.0, 30.0):
        rho = db_to_linear(rho_db)
        assert rate_s1_closed(mrc, rho) >= rate_s1_closed(sc, rho) - 1e-12
        assert rate_s2_closed(mrc, rho) >= rate_s2_closed(sc, rho) - 1e-12


@pytest.mark.parametrize("combiner", list(CombinerKind))
def test_rates_grow_with_snr_and_antennas(combiner):
    rhos = [db_to_linear(rho_db) for rho_db in range(0, 32, 2)]
    previous_n = None
    for n in (1, 2, 3):
        cfg = SystemConfig.uniform(m=2, n=n, combiner=combiner, a2=0.1)
        totals = [rate_total(cfg, rho).rate_total for rho in rhos]
        assert all(b > a for a, b in zip(totals, totals[1:]))
        if previous_n is not None:
            assert all(t >= p - 1e-12 for t, p in zip(totals, previous_n))
        previous_n = totals


@pytest.mark.parametrize("a2", [0.05, 0.1, 0.2, 0.3])
def test_first_symbol_below_ceiling(a2):
    cfg = SystemConfig.uniform(m=2, n=2, combiner=CombinerKind.MRC, a2=a2)
    ceiling = 0.5 * math.log2(1.0 / a2)
    for rho in (1.0, 1e3, 1e6):
        assert 0.0 <= rate_s1_closed(cfg, rho) < ceiling


@pytest.mark.parametrize("a2, expected", [(0.1, 1.6609640), (0.2, 1.1609640)])
def test_high_snr_first_symbol(a2, expected):
    cfg = SystemConfig.uniform(m=1, n=1, a2=a2)
    report = rate_high_snr(cfg, 1e4)
    assert report.method is RateMethod.HIGH_SNR
    assert report.rate_s1 == pytest.approx(expected, abs=1e-7)


@pytest.mark.parametrize("m, n, combiner", [(1, 1, CombinerKind.SC), (2, 2, CombinerKind.SC),
                                            (2, 2, CombinerKind.MRC)])
def test_high_snr_approximation_is_tight_at_forty_db(m, n, combiner):
    cfg = SystemConfig.uniform(m=m, n=n, combiner=combiner, a2=0.1)
    rho = db_to_linear(40.0)
    assert abs(rate_high_snr(cfg, rho).rate_total - rate_total(cfg, rho).rate_total) <= 0.02


@pytest.mark.parametrize("m, n, combiner", [(1, 1, CombinerKind.SC), (2, 2, CombinerKind.SC),
                                            (2, 1, CombinerKind.MRC)])
def test_high_snr_constant_matches_quadrature(m, n, combiner):
    cfg = SystemConfig.uniform(m=m, n=n, combiner=combiner, a2=0.1)
    assert high_snr_constant(cfg) == pytest.approx(high_snr_constant_quadrature(cfg), abs=1e-8)


def test_rayleigh_high_snr_constant():
    cfg = SystemConfig.uniform(m=1, n=1, a2=0.1)
    # Y is exponential with rate 1/(a2 Omega_sr) + 1/Omega_rd = 1.4
    expected = (-0.5772156649015329 - math.log(1.4)) / (2 * math.log(2))
    assert high_snr_constant(cfg) == pytest.approx(expected, abs=1e-12)


def test_slope_per_decade(two_by_two_sc):
    assert rate_slope(two_by_two_sc, 1e4) == pytest.approx(HALF_LOG2_TEN, abs=0.05)


def test_doubling_the_cutoff_changes_nothing():
    cfg = SystemConfig.uniform(m=1, n=1, a2=0.1)
    base = rate_s2_quadrature(cfg, 10.0)
    assert abs(rate_s2_quadrature(cfg, 10.0, cutoff_scale=2.0) - base) < 1e-10


@pytest.mark.parametrize("rho", [0.0, -1.0, math.inf, math.nan])
def test_rejects_bad_snr(rayleigh_config, rho):
    with pytest.raises(DomainError):
        rate_s1_closed(rayleigh_config, rho)


def test_term_overflow_becomes_numerical_failure(monkeypatch):
    cfg = SystemConfig.uniform(m=2, n=3, combiner=CombinerKind.SC, a2=0.13)

    def overflowing(n, x):
        raise OverflowError("math range error")

    monkeypatch.setattr(analytic_rate, 'log_scaled_upper_gamma', overflowing)
    with pytest.raises(NumericalFailure) as info:
        rate_s2_closed(cfg, 1000.0)
    assert info.value.rho == 1000.0
    assert info.value.term is not None
