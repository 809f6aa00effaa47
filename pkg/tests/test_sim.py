import math
from collections import Counter
from fractions import Fraction as F

import numpy as np
import pytest

from conftest import FAIR, MARKOV_H14, ONE_THIRD, REDUCIBLE, TWO_THIRDS
from oracles import h2
from exactrng.analysis import stopping_profile
from exactrng.process import IID, NamedBernoulli
from exactrng.sim import (
    BitStream,
    ListBits,
    SimConfig,
    empirical_spectrum,
    run_trials,
    sample_index,
    sample_symbol,
)


def test_degenerate_pmf_uses_no_bits():
    b = ListBits([])
    assert sample_symbol(IID((F(1), F(0))), (), b) == 1
    assert b.used == 0


def test_fair_pmf_is_first_bit():
    for bit in (0, 1):
        b = ListBits([bit])
        assert sample_symbol(FAIR, (), b) == bit + 1 and b.used == 1


def test_two_thirds_resolves_finitely():
    b = ListBits([1, 0] + [0] * 10)
    assert sample_symbol(TWO_THIRDS, (), b) in (1, 2) and b.used <= 4


def test_two_thirds_frequency():
    b = BitStream(11)
    n = 100_000
    ones = sum(sample_symbol(TWO_THIRDS, (), b) == 1 for _ in range(n))
    sd = math.sqrt(n * 2 / 9)
    assert abs(ones - n * 2 / 3) <= 3 * sd


@pytest.mark.parametrize("pmf", [(F(1, 3),) * 3, (F(1, 10), F(2, 5), F(1, 2)), (F(7, 8), F(0), F(1, 8))])
def test_chi_square_goodness_of_fit(pmf):
    scipy_stats = pytest.importorskip("scipy.stats")
    b = BitStream(3)
    n = 100_000
    c = Counter(sample_index(pmf, b) for _ in range(n))
    live = [k for k, p in enumerate(pmf) if p]
    assert set(c) <= set(live)
    obs = [c[k] for k in live]
    exp = [n * float(pmf[k]) for k in live]
    assert scipy_stats.chisquare(obs, exp).pvalue > 1e-3


@pytest.mark.parametrize("pmf", [(F(2, 3), F(1, 3)), (F(1, 10),) * 10, (F(999, 1000), F(1, 1000))])
def test_expected_bits_within_entropy_plus_two(pmf):
    b = BitStream(5)
    n = 20_000
    for _ in range(n):
        sample_index(pmf, b)
    H = -sum(float(p) * math.log2(p) for p in pmf if p)
    # mean of n draws; allow 4 standard errors of slack (per-draw sd < 3 bits)
    assert b.used / n <= H + 2 + 4 * 3 / math.sqrt(n)


def test_dyadic_sampling_frequency():
    coin = NamedBernoulli("harmonic")
    b = BitStream(8)
    n = 50_000
    p = 2 ** -0.5
    ones = sum(sample_symbol(coin, (1,), b) == 1 for _ in range(n))
    assert abs(ones - n * p) <= 4 * math.sqrt(n * p * (1 - p))


def test_substreams_are_independent_of_order():
    a = [BitStream(5, i).bit() for i in range(20)]
    b = [BitStream(5, i).bit() for i in reversed(range(20))][::-1]
    assert a == b
    assert [BitStream(5, 0).bit() for _ in range(3)] == [BitStream(5, 0).bit()] * 3


def test_determinism_and_worker_invariance():
    cfg = SimConfig(42, 2000, 2)
    a = run_trials(MARKOV_H14, ONE_THIRD, cfg)
    b = run_trials(MARKOV_H14, ONE_THIRD, cfg)
    c = run_trials(MARKOV_H14, ONE_THIRD, SimConfig(42, 2000, 2, workers=3))
    assert a.to_dict() == b.to_dict() == c.to_dict()
    assert run_trials(MARKOV_H14, ONE_THIRD, SimConfig(43, 2000, 2)).to_dict() != a.to_dict()


def test_counts_consistent_and_truncation():
    r = run_trials(FAIR, TWO_THIRDS, SimConfig(1, 5000, 1, m_cap=3))
    assert sum(r.empirical_law.values()) == r.trials - r.truncated_trials
    assert sum(r.t_counts.values()) == r.completed
    assert r.truncated_trials > 0 and r.truncation_flag
    assert max(r.t_counts) <= 3


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(1, 0, 1)
    with pytest.raises(ValueError):
        SimConfig(1, 1, 1, m_cap=0)
    assert SimConfig(1, 1, 3).cap == 3 * 10**6


def test_mean_T_fair_two_thirds():
    r = run_trials(FAIR, TWO_THIRDS, SimConfig(9, 100_000, 1))
    # T is geometric(1/2) on {1,2,...}: variance 2
    assert abs(r.mean_T - 2) <= 3 * math.sqrt(2 / r.trials)


@pytest.mark.parametrize("coin, target, n", [(FAIR, TWO_THIRDS, 1), (MARKOV_H14, ONE_THIRD, 3), (FAIR, REDUCIBLE, 2)])
def test_overflow_within_binomial_bands(coin, target, n):
    trials = 20_000
    r = run_trials(coin, target, SimConfig(17, trials, n))
    exact = stopping_profile(coin, target, n, 60).overflow
    m99 = next(m for m, v in enumerate(exact) if v <= F(1, 100))
    for m in range(m99 + 1):
        p = float(exact[m])
        sd = math.sqrt(max(p * (1 - p), 1e-12) / trials)
        assert abs(r.overflow_freq(m) - p) <= 4 * sd + 1e-12


def test_tail_decay_monotone_for_markov_coin():
    r = run_trials(MARKOV_H14, ONE_THIRD, SimConfig(5, 5000, 4))
    o = r.overflow_counts
    assert all(x >= y for x, y in zip(o, o[1:]))
    assert o[-1] == 0


def test_named_coins_run():
    r = run_trials(NamedBernoulli("harmonic"), TWO_THIRDS, SimConfig(3, 300, 2))
    assert r.truncated_trials == 0 and r.mean_T > 0
    r = run_trials(NamedBernoulli("quadratic"), TWO_THIRDS, SimConfig(3, 200, 1, m_cap=200))
    # the all-ones prefix keeps mass above 0.319 alive forever
    assert r.truncated_trials / r.trials > 0.2


def test_empirical_spectrum_fair_point_mass():
    es = empirical_spectrum(FAIR, 17, 200, 1)
    assert np.all(np.abs(es.values - 1.0) < 1e-12)


@pytest.mark.slow
def test_empirical_spectrum_markov_cluster():
    es = empirical_spectrum(MARKOV_H14, 512, 300, 4)
    assert abs(float(np.mean(es.values)) - h2(0.25)) < 0.05


def test_empirical_spectrum_reducible_two_clusters():
    es = empirical_spectrum(REDUCIBLE, 64, 2000, 2)
    low = es.fraction_below(0.5)
    assert abs(low - 0.5) <= 3 * math.sqrt(0.25 / 2000)
    # the first symbol costs 2 bits (class 1) or 1 bit (class 2), then 1 or 0 per symbol
    assert np.all((np.abs(es.values - 1 / 64) < 1e-12) | (np.abs(es.values - 65 / 64) < 1e-12))
