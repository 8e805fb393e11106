import math
from fractions import Fraction

import pytest

from mgonal import exact
from mgonal.exact import (
    exact_moments,
    gap_limit_normalization,
    gap_prob_finite,
    gap_prob_limit,
    gen_poly_row,
    joint_gap_limit_product,
    longest_gap_prediction,
    pnk_closed,
    pnk_row_closed,
    pnk_row_recursive,
    schilling_prediction,
)
from mgonal.seqcore import term


def brute_pnk(m, n):
    """Count summands for every z in I_n by peeling off base-(m+1) digits."""
    counts = [0] * (n + 2)
    for z in range(2 * (m + 1) ** n):
        k = z & 1
        w = z >> 1
        while w:
            w, d = divmod(w, m + 1)
            k += d != 0
        counts[k] += 1
    return counts


def test_interval_size():
    for m in range(1, 6):
        for n in range(8):
            assert exact.interval_size(m, n) == term(m, m * n + 1)


@pytest.mark.parametrize(
    "m, n, k, expected",
    [(3, 1, 1, 4), (3, 5, 0, 1), (1, 5, 0, 1), (2, 2, 3, 4), (2, 2, 4, 0), (2, 2, 2, 8), (2, 2, 9, 0)],
)
def test_pnk_closed_examples(m, n, k, expected):
    assert pnk_closed(m, n, k) == expected


@pytest.mark.parametrize("m, n, expected", [(3, 1, [1, 4, 3]), (1, 2, [1, 3, 3, 1]), (2, 0, [1, 1])])
def test_pnk_row_recursive_examples(m, n, expected):
    assert list(pnk_row_recursive(m, n).counts) == expected


@pytest.mark.parametrize("m", range(1, 5))
def test_pnk_against_brute_force(m):
    for n in range(6):
        assert list(pnk_row_closed(m, n).counts) == brute_pnk(m, n)


@pytest.mark.parametrize("m", range(1, 7))
def test_rows_agree_and_partition_interval(m):
    for n in range(61):
        closed = pnk_row_closed(m, n)
        assert closed == pnk_row_recursive(m, n)
        assert closed.total == 2 * (m + 1) ** n
        if n <= 40:
            assert gen_poly_row(m, n).coefficients == closed.counts


def test_gen_poly_examples():
    assert gen_poly_row(3, 1).coefficients == (1, 4, 3)
    assert gen_poly_row(5, 0).coefficients == (1, 1)
    assert gen_poly_row(2, 2)(1) == 18


@pytest.mark.parametrize(
    "m, n, mean, variance",
    [
        (3, 600, Fraction(901, 2), Fraction(451, 4)),
        (6, 600, Fraction(3600, 7) + Fraction(1, 2), Fraction(3600, 49) + Fraction(1, 4)),
        (1, 0, Fraction(1, 2), Fraction(1, 4)),
    ],
)
def test_exact_moments_examples(m, n, mean, variance):
    mom = exact_moments(m, n)
    assert (mom.mean, mom.variance) == (mean, variance)


def test_table_predicted_columns():
    expected = {3: (450.50, 112.75), 4: (480.50, 96.25), 5: (500.50, 83.58), 6: (514.79, 73.72)}
    for m, (mean, var) in expected.items():
        mom = exact_moments(m, 600)
        assert round(float(mom.mean), 2) == mean
        assert round(float(mom.variance), 2) == var


@pytest.mark.parametrize("m", range(1, 7))
def test_moments_from_distribution(m):
    for n in range(0, 61, 7):
        ref = exact_moments(m, n)
        dist = pnk_row_closed(m, n)
        assert (dist.mean(), dist.variance()) == (ref.mean, ref.variance)
        assert gen_poly_row(m, n).moments() == ref


def test_gap_finite_examples():
    assert gap_prob_finite(3, 5, 1) == Fraction(3, 26)
    assert gap_prob_finite(3, 5, 3) == Fraction(7, 26)
    # m=2, n=1: I_1 = [0, 6) holds 3 = a_1 + a_0 and 5 = a_2 + a_0
    assert exact.gap_count_finite(2, 1, 1) == 1
    assert exact.gap_count_finite(2, 1, 2) == 1
    assert exact.total_gaps(2, 1) == 2
    assert gap_prob_finite(2, 1, 1, "observed") == Fraction(1, 2)
    assert gap_prob_finite(2, 1, 1) == 1  # signed denominator is 1 here


def test_gap_finite_rejects_bad_input():
    with pytest.raises(ValueError):
        gap_prob_finite(3, 5, 0)
    with pytest.raises(ValueError):
        gap_prob_finite(3, 0, 1)
    with pytest.raises(ValueError):
        gap_prob_finite(1, 1, 1)  # 2mn - m - 1 = 0
    assert gap_prob_finite(1, 1, 1, "observed") == 1
    with pytest.raises(ValueError):
        gap_prob_finite(3, 5, 1, "nonsense")


def test_gap_finite_beyond_range_is_zero():
    assert gap_prob_finite(3, 2, 7) == 0


@pytest.mark.parametrize("m", range(1, 6))
def test_gap_finite_sums(m):
    for n in range(1, 30):
        observed = sum(gap_prob_finite(m, n, g, "observed") for g in range(1, m * n + 1))
        assert observed == 1
        if exact.finite_formula_valid(m, n):
            total = exact.total_gaps(m, n)
            signed = sum(gap_prob_finite(m, n, g) for g in range(1, m * n + 1))
            assert signed == Fraction(total, total - 1)


@pytest.mark.parametrize("m", range(1, 6))
def test_gap_count_matches_published_formula(m):
    for n in range(1, 25):
        if not exact.finite_formula_valid(m, n):
            continue
        for g in range(1, m * n + 1):
            assert gap_prob_finite(m, n, g) == exact.gap_prob_finite_formula(m, n, g)


@pytest.mark.parametrize("m, g, expected", [(3, 1, Fraction(1, 12)), (3, 3, Fraction(1, 4)), (4, 6, Fraction(3, 25))])
def test_gap_limit_examples(m, g, expected):
    assert gap_prob_limit(m, g) == expected


def test_gap_limit_binary_is_geometric():
    for g in range(1, 20):
        assert gap_prob_limit(1, g) == Fraction(1, 2**g)


def test_gap_limit_rejects_nonpositive():
    with pytest.raises(ValueError):
        gap_prob_limit(3, 0)


@pytest.mark.parametrize("m", range(1, 9))
@pytest.mark.parametrize("alpha_max", [1, 3, 10])
def test_normalization(m, alpha_max):
    assert gap_limit_normalization(m, alpha_max) == 1


def test_normalization_tail_against_long_sum():
    # the tail beyond alpha_max agrees with a long direct partial sum
    m, a = 3, 2
    direct = sum(gap_prob_limit(m, g) for g in range(m * (a + 1), m * 60))
    assert abs(exact.gap_limit_tail(m, a) - direct) < Fraction(1, 10**30)


@pytest.mark.parametrize("m", range(1, 6))
def test_finite_gap_approaches_limit(m):
    for g in range(1, 3 * m + 1):
        errs = [abs(gap_prob_finite(m, n, g) - gap_prob_limit(m, g)) for n in (10, 100, 1000)]
        # for m=1, g=2 the finite value already equals the limit
        assert errs[0] > errs[1] > errs[2] or errs == [0, 0, 0]


def test_gap_limit_moments_against_truncated_sum():
    for m in (1, 3, 6):
        mean, var = exact.gap_limit_moments(m)
        ps = [(g, gap_prob_limit(m, g)) for g in range(1, 60 * m)]
        s1 = sum(g * p for g, p in ps)
        s2 = sum(g * g * p for g, p in ps)
        assert abs(float(mean) - float(s1)) < 1e-12
        assert abs(float(var) - float(s2 - s1 * s1)) < 1e-10
        assert mean == m + 1


@pytest.mark.parametrize(
    "m, g1, g2, expected",
    [(3, 3, 3, Fraction(1, 16)), (3, 1, 3, Fraction(1, 48)), (1, 1, 1, Fraction(1, 4))],
)
def test_joint_limit_product(m, g1, g2, expected):
    assert joint_gap_limit_product(m, g1, g2) == expected


def test_schilling_examples():
    p200 = schilling_prediction(Fraction(1, 2), 200)
    p400 = schilling_prediction(0.5, 400)
    assert round(p200.mean, 2) == 6.98
    assert round(p200.variance, 2) == 3.51
    assert round(p400.mean, 2) == 7.98
    assert p400.mean - p200.mean == pytest.approx(1.0, abs=1e-12)
    assert p200.variance == p400.variance
    assert p200.model_error == 1e-4
    with pytest.raises(ValueError):
        schilling_prediction(1, 10)
    with pytest.raises(ValueError):
        schilling_prediction(0, 10)


def longest_run_moments(p, n):
    """Exact mean and variance of the longest run of heads via a run-length DP."""
    q = 1 - p
    tail = []  # P(longest >= L) for L = 1..n
    for L in range(1, n + 1):
        # state = current run length (< L); absorbed mass is P(longest >= L)
        state = [1.0] + [0.0] * (L - 1)
        for _ in range(n):
            nxt = [0.0] * L
            nxt[0] = q * sum(state)
            for r in range(L - 1):
                nxt[r + 1] = p * state[r]
            state = nxt
        tail.append(1 - sum(state))
        if tail[-1] < 1e-18:
            break
    mean = sum(tail)
    second = sum((2 * L - 1) * t for L, t in enumerate(tail, start=1))
    return mean, second - mean**2


@pytest.mark.parametrize("p, n", [(0.5, 200), (0.5, 400), (0.25, 300)])
def test_schilling_against_exact_run_distribution(p, n):
    mean, var = longest_run_moments(p, n)
    pred = schilling_prediction(p, n)
    assert abs(mean - pred.mean) < 0.01
    # the dropped vanishing terms are still visible in the variance at this n
    assert abs(var - pred.variance) < 0.2


def test_schilling_variance_error_shrinks():
    errs = [abs(longest_run_moments(0.5, n)[1] - schilling_prediction(0.5, n).variance) for n in (50, 200, 800)]
    assert errs[0] > errs[1] > errs[2]


@pytest.mark.parametrize(
    "m, n, main",
    [(3, 600, 3 * math.log2(100)), (1, 1024, 9.0), (6, 600, 6 * math.log2(50))],
)
def test_longest_gap_main_term(m, n, main):
    pred = longest_gap_prediction(m, n)
    assert pred.main_term == pytest.approx(main, abs=1e-12)
    assert pred.refined == pytest.approx(m * schilling_prediction(0.5, n // m).mean)


def test_longest_gap_examples_rounded():
    assert round(longest_gap_prediction(3, 600).main_term, 2) == 19.93
    assert round(longest_gap_prediction(6, 600).main_term, 2) == 33.86
    with pytest.raises(ValueError):
        longest_gap_prediction(3, 5)
