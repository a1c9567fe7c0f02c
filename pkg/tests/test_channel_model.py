import logging
import math

import numpy as np
import pytest
from scipy import integrate, special, stats

from crsnomalab.analysis.channel_model import (CombinerKind, LinkSpec, SystemConfig, db_to_linear, gain_ccdf,
                                               gain_cdf, gain_mean, gain_pdf, min_pair_ccdf, sample_gain,
                                               sample_gains)
from crsnomalab.analysis.series_support import ccdf_from_terms, erlang_terms, product_terms
from crsnomalab.core.errors import ConfigurationError, DomainError

SC, MRC = CombinerKind.SC, CombinerKind.MRC
UNIT = LinkSpec(1, 1.0)


def test_gain_cdf_examples():
    assert gain_cdf(UNIT, 1, SC, 1.0) == pytest.approx(0.6321206, abs=1e-7)
    assert gain_cdf(UNIT, 2, SC, 1.0) == pytest.approx(0.3995764, abs=1e-7)
    assert gain_cdf(UNIT, 2, MRC, 1.0) == pytest.approx(0.2642411, abs=1e-7)


def test_gain_cdf_rejects_negative_argument():
    with pytest.raises(DomainError):
        gain_cdf(UNIT, 1, SC, -0.1)


@pytest.mark.parametrize("m", [1, 2, 4])
def test_single_antenna_combiners_coincide(m):
    link = LinkSpec(m, 3.0)
    for x in np.linspace(0.0, 12.0, 25):
        assert gain_cdf(link, 1, SC, x) == gain_cdf(link, 1, MRC, x)
        assert gain_ccdf(link, 1, SC, x) == pytest.approx(gain_ccdf(link, 1, MRC, x), rel=1e-12)


@pytest.mark.parametrize("combiner", [SC, MRC])
def test_cdf_is_a_distribution(combiner):
    link = LinkSpec(2, 2.5)
    grid = np.linspace(0.0, 100.0, 101)
    values = [gain_cdf(link, 3, combiner, x) for x in grid]
    assert values[0] == 0.0
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert values[-1] == pytest.approx(1.0, abs=1e-12)


def test_selection_cdf_decreases_with_antennas():
    link = LinkSpec(2, 1.0)
    for x in (0.1, 0.5, 1.0, 3.0):
        values = [gain_cdf(link, n, SC, x) for n in (1, 2, 3, 4)]
        assert all(b <= a for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("combiner", [SC, MRC])
@pytest.mark.parametrize("x", [1e-6, 0.3, 2.0, 30.0])
def test_ccdf_complements_cdf(combiner, x):
    link = LinkSpec(2, 1.0)
    assert gain_ccdf(link, 2, combiner, x) == pytest.approx(1.0 - gain_cdf(link, 2, combiner, x), abs=1e-14)


def test_min_pair_ccdf_examples():
    assert min_pair_ccdf(UNIT, 1, 1.0, UNIT, 1, 1.0, SC, 1.0) == pytest.approx(math.exp(-2), rel=1e-12)
    assert min_pair_ccdf(LinkSpec(3, 2.0), 2, 0.2, UNIT, 3, 1.0, MRC, 0.0) == 1.0


def test_min_pair_ccdf_against_expansion():
    sr, rd = LinkSpec(2, 10.0), LinkSpec(2, 2.5)
    value = min_pair_ccdf(sr, 2, 0.1, rd, 2, 1.0, MRC, 0.5)
    expected = float(special.gammaincc(4, 2 * 5 / 10) * special.gammaincc(4, 2 * 0.5 / 2.5))
    assert value == pytest.approx(expected, rel=1e-12)
    terms = product_terms(erlang_terms(sr, 2, 0.1), erlang_terms(rd, 2))
    assert ccdf_from_terms(terms, 0.5) == pytest.approx(value, rel=1e-12)


@pytest.mark.parametrize("combiner", [SC, MRC])
def test_min_pair_ccdf_factorizes(combiner):
    a, b = LinkSpec(2, 10.0), LinkSpec(3, 2.5)
    for x in (0.05, 0.4, 2.0):
        expected = (1 - gain_cdf(a, 2, combiner, x / 0.2)) * (1 - gain_cdf(b, 1, combiner, x))
        assert min_pair_ccdf(a, 2, 0.2, b, 1, 1.0, combiner, x) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("combiner", [SC, MRC])
def test_pdf_integrates_to_one(combiner):
    link = LinkSpec(2, 1.5)
    total, _ = integrate.quad(lambda x: gain_pdf(link, 3, combiner, x), 0.0, np.inf, limit=200)
    assert total == pytest.approx(1.0, abs=1e-8)


def test_gain_mean():
    assert gain_mean(UNIT, 2, SC) == pytest.approx(1.5, rel=1e-9)
    assert gain_mean(LinkSpec(2, 10.0), 2, MRC) == 20.0
    assert gain_mean(LinkSpec(3, 4.0), 1, SC) == 4.0


def test_sample_mean_of_exponential():
    draws = sample_gains(UNIT, 1, SC, np.random.default_rng(11), 1_000_000)
    assert draws.mean() == pytest.approx(1.0, abs=0.004)


def test_sample_mean_of_mrc_sum():
    draws = sample_gains(LinkSpec(2, 10.0), 2, MRC, np.random.default_rng(12), 1_000_000)
    assert draws.mean() == pytest.approx(20.0, abs=0.05)


def test_selection_samples_follow_analytic_cdf():
    link = LinkSpec(2, 1.0)
    draws = sample_gains(link, 2, SC, np.random.default_rng(13), 100_000)
    statistic = stats.kstest(draws, lambda x: special.gammainc(2, 2 * np.asarray(x)) ** 2).statistic
    # 0.1% critical value for 1e5 draws
    assert statistic < 0.0062


def test_selection_sample_mean_within_five_standard_errors():
    link = LinkSpec(2, 1.0)
    draws = sample_gains(link, 3, SC, np.random.default_rng(14), 200_000)
    stderr = draws.std(ddof=1) / math.sqrt(draws.size)
    assert abs(draws.mean() - gain_mean(link, 3, SC)) < 5 * stderr


def test_sample_gain_is_positive_scalar():
    value = sample_gain(LinkSpec(2, 1.0), 2, MRC, np.random.default_rng(1))
    assert isinstance(value, float) and value > 0


@pytest.mark.parametrize("m, omega", [(0, 1.0), (1.5, 1.0), (True, 1.0), (1, 0.0), (1, -2.0), (1, math.inf)])
def test_link_spec_validation(m, omega):
    with pytest.raises(ConfigurationError):
        LinkSpec(m, omega)


def test_link_spec_accepts_integral_float():
    assert LinkSpec(2.0, 3).m == 2


@pytest.mark.parametrize("a2", [0.0, 0.5, 0.7, -0.1])
def test_system_config_rejects_power_split(a2):
    with pytest.raises(ConfigurationError):
        SystemConfig.uniform(m=1, n=1, a2=a2)


def test_system_config_properties():
    cfg = SystemConfig.uniform(m=2, n=2, combiner='mrc', a2=0.1)
    assert cfg.combiner is MRC
    assert cfg.a1 == pytest.approx(0.9)
    assert cfg.theta == 3.0
    assert (cfg.sd.omega, cfg.sr.omega, cfg.rd.omega) == (1.0, 10.0, 2.5)
    assert cfg.with_a2(0.2).a2 == 0.2 and cfg.a2 == 0.1


def test_system_config_rejects_unknown_combiner():
    with pytest.raises(ConfigurationError):
        SystemConfig.uniform(m=1, n=1, combiner='egc')


def test_weak_relay_link_only_warns(caplog):
    with caplog.at_level(logging.WARNING):
        cfg = SystemConfig.uniform(m=1, n=1, omega_sd=7.25, omega_sr=5.5)
    assert cfg.sd.omega == 7.25
    assert any('Omega_sd=7.25' in record.getMessage() for record in caplog.records)


def test_db_to_linear():
    assert db_to_linear(10.0) == pytest.approx(10.0)
    assert db_to_linear(0.0) == 1.0
