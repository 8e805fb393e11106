import math
from collections import Counter

import numpy as np
import pytest
from scipy.stats import binom, chisquare

from mgonal import exact, mc
from mgonal.mc import SamplerConfig
from mgonal.seqcore import decompose, term


def test_config_validation():
    with pytest.raises(ValueError):
        SamplerConfig(3, 10, 0)
    with pytest.raises(ValueError):
        SamplerConfig(3, 10, 5, interval="half")
    with pytest.raises(ValueError):
        SamplerConfig(3, 10, 5, chunks=0)
    with pytest.raises(ValueError):
        SamplerConfig(3, 10, 5, seed=-1)
    with pytest.raises(ValueError):
        SamplerConfig(3, 0, 5, interval="bracket")


def test_chunk_sizes():
    assert mc.chunk_sizes(10, 3) == [4, 3, 3]
    assert sum(mc.chunk_sizes(100_001, 7)) == 100_001


def test_same_seed_same_report():
    cfg = SamplerConfig(3, 50, 5000, seed=7, chunks=2)
    a, b = mc.run_summand_experiment(cfg), mc.run_summand_experiment(cfg)
    assert a.to_dict() == b.to_dict()
    c = mc.run_summand_experiment(SamplerConfig(3, 50, 5000, seed=8, chunks=2))
    assert c.histogram != a.histogram


def test_chunks_are_independent_streams():
    one = mc.sample_values(SamplerConfig(2, 10, 100, seed=3, chunks=1))
    two = mc.sample_values(SamplerConfig(2, 10, 100, seed=3, chunks=2))
    assert len(two) == 100
    assert one != two
    assert two == mc.sample_values(SamplerConfig(2, 10, 100, seed=3, chunks=2))


def test_full_interval_is_uniform():
    m, n = 2, 3
    size = exact.interval_size(m, n)
    values = mc.sample_values(SamplerConfig(m, n, 54_000, seed=11))
    assert min(values) >= 0 and max(values) < size
    counts = np.bincount(values, minlength=size)
    assert chisquare(counts).pvalue > 0.01


def test_sample_uniform_matches_values():
    cfg = SamplerConfig(3, 6, 300, seed=5)
    values = mc.sample_values(cfg)
    decomps = list(mc.sample_uniform(cfg))
    assert [d.indices for d in decomps] == [decompose(3, v).indices for v in values]
    assert all(d.value == -1 for d in decomps)


def test_binary_case_is_binomial():
    rep = mc.run_summand_experiment(SamplerConfig(1, 8, 100_000, seed=2))
    for k in range(10):
        assert abs(rep.histogram.get(k, 0) / 1e5 - binom.pmf(k, 9, 0.5)) < 0.006


def test_tiny_distribution():
    rep = mc.run_summand_experiment(SamplerConfig(1, 1, 40_000, seed=4))
    assert set(rep.histogram) == {0, 1, 2}
    for k, p in {0: 0.25, 1: 0.5, 2: 0.25}.items():
        assert abs(rep.histogram[k] / 40_000 - p) < 0.01


def test_summand_moments_and_ks_shrink():
    ks = []
    for n in (50, 600):
        rep = mc.run_summand_experiment(SamplerConfig(3, n, 50_000, seed=9))
        sd = math.sqrt(rep.predicted_variance)
        assert abs(rep.sample_mean - rep.predicted_mean) < 5 * sd / math.sqrt(50_000)
        assert abs(rep.sample_variance / rep.predicted_variance - 1) < 0.05
        ks.append(rep.ks_statistic)
    assert ks[0] > ks[1]


def test_normal_ks_point_mass():
    # all mass at the mean: half the normal lies beyond k + 1/2
    assert mc.normal_ks({5: 10}, 5.0, 1.0) == pytest.approx(1 - 0.6914624612740131)


def test_gap_experiment_near_limit():
    rep = mc.run_gap_experiment(SamplerConfig(3, 200, 20_000, seed=6))
    table = rep.extras["table"]
    assert sum(r["empirical"] for r in table) == pytest.approx(1.0)
    assert sum(rep.histogram.values()) == rep.extras["total_gaps"]
    for r in table[:9]:
        assert abs(r["empirical"] - r["limit"]) < 0.01
        assert abs(r["finite"] - r["limit"]) < 0.01
    assert rep.predicted_mean == 4.0
    assert rep.ks_statistic < 0.01


def test_gap_experiment_without_gaps():
    rep = mc.run_gap_experiment(SamplerConfig(2, 0, 100, seed=1))
    assert rep.extras["total_gaps"] == 0
    assert rep.ks_statistic is None


def test_individual_ks():
    gaps = np.array([[0, 0, 0], [0, 1, 0], [0, 1, 2]])
    ks, dropped = mc.individual_ks(gaps, 1)
    assert dropped == 1
    # one gap of length 1: CDF jumps to 1 where the limit is 1/2
    assert ks[0] == pytest.approx(0.5)
    # gaps (1, 2): CDF 1 at g=2 where the limit is 3/4
    assert ks[1] == pytest.approx(0.25)
    rep = mc.run_individual_gap_experiment(SamplerConfig(3, 100, 2000, seed=3))
    assert ((rep.ks_distances >= 0) & (rep.ks_distances <= 1)).all()
    assert rep.ks_distances.size + rep.skipped == 2000
    assert 0 < rep.median <= rep.p90


def test_bracket_layout():
    lo, width, ndig = mc.bracket_layout(3, 7)
    assert (lo, width) == (term(3, 7), term(3, 8) - term(3, 7))
    assert ndig == 3


@pytest.mark.parametrize("m, n", [(3, 7), (1, 20), (6, 600)])
def test_bracket_samples_in_range(m, n):
    cfg = SamplerConfig(m, n, 200, seed=1, interval="bracket")
    lo, hi = term(m, n), term(m, n + 1)
    decomps = list(mc.sample_uniform(cfg))
    for d in decomps:
        assert lo <= d.value < hi
        assert d.indices == decompose(m, d.value).indices
        assert max(d.indices) == n


def test_bracket_is_uniform():
    m, n = 2, 7
    lo, hi = term(m, n), term(m, n + 1)
    values = mc.sample_values(SamplerConfig(m, n, 40_000, seed=12, interval="bracket"))
    counts = Counter(v - lo for v in values)
    assert chisquare([counts.get(i, 0) for i in range(hi - lo)]).pvalue > 0.01


def test_longest_gap_experiment():
    with pytest.raises(ValueError):
        mc.run_longest_gap_experiment(SamplerConfig(1, 64, 10))
    rep = mc.run_longest_gap_experiment(SamplerConfig(1, 64, 20_000, seed=1, interval="bracket"))
    assert rep.extras["main_term"] == pytest.approx(5.0)
    assert abs(rep.sample_mean - rep.extras["schilling_refined"]) < 1.0
    assert rep.extras["offset"] == pytest.approx(rep.sample_mean - 5.0)
