"""Exact summand-count and gap statistics for m-gonal decompositions.

Everything here is big-integer or :class:`fractions.Fraction` arithmetic,
except the longest-run predictors which involve logarithms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

EULER_GAMMA = 0.57721566490153286061

# Bound on the periodic correction terms the longest-run formula drops
LONGEST_RUN_MODEL_ERROR = 1e-4


def _check_m(m: int) -> None:
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")


def _check_n(n: int) -> None:
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")


@dataclass(frozen=True)
class IntervalSpec:
    """The interval ``I_n = [0, a_{mn+1})``."""

    m: int
    n: int

    @property
    def size(self) -> int:
        return 2 * (self.m + 1) ** self.n


def interval_size(m: int, n: int) -> int:
    _check_m(m)
    _check_n(n)
    return IntervalSpec(m, n).size


@dataclass(frozen=True)
class SummandDistribution:
    """Row ``p_{n,0..n+1}``: how many ``z`` in ``I_n`` have ``k`` summands."""

    m: int
    n: int
    counts: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.counts)

    def mean(self) -> Fraction:
        return Fraction(sum(k * c for k, c in enumerate(self.counts)), self.total)

    def variance(self) -> Fraction:
        second = Fraction(sum(k * k * c for k, c in enumerate(self.counts)), self.total)
        return second - self.mean() ** 2


def pnk_closed(m: int, n: int, k: int) -> int:
    _check_m(m)
    _check_n(n)
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    if k == 0:
        return 1
    if k > n + 1:
        return 0
    return m**k * math.comb(n, k) + m ** (k - 1) * math.comb(n, k - 1)


def pnk_row_closed(m: int, n: int) -> SummandDistribution:
    return SummandDistribution(m, n, tuple(pnk_closed(m, n, k) for k in range(n + 2)))


def pnk_row_recursive(m: int, n: int) -> SummandDistribution:
    """Build the row from ``p_{n,k} = m p_{n-1,k-1} + p_{n-1,k}``, base ``[1, 1]``."""
    _check_m(m)
    _check_n(n)
    row = [1, 1]
    for _ in range(n):
        row = [1] + [m * row[k - 1] + (row[k] if k < len(row) else 0) for k in range(1, len(row) + 1)]
    return SummandDistribution(m, n, tuple(row))


@dataclass(frozen=True)
class GenPolyRow:
    """Coefficients of ``g_n(y) = (1 + y)(m y + 1)^n``, lowest degree first."""

    m: int
    n: int
    coefficients: tuple[int, ...]

    def __call__(self, y):
        acc = 0
        for c in reversed(self.coefficients):
            acc = acc * y + c
        return acc

    def derivative(self) -> "GenPolyRow":
        return GenPolyRow(self.m, self.n, tuple(k * c for k, c in enumerate(self.coefficients))[1:])

    def moments(self) -> "ExactMoments":
        """Mean ``g'(1)/g(1)`` and variance ``(y g'(y))'|_1 / g(1) - mean^2``."""
        g1 = self(1)
        d = self.derivative()
        mean = Fraction(d(1), g1)
        # (y g'(y))' = g'(y) + y g''(y)
        second = Fraction(d(1) + d.derivative()(1), g1)
        return ExactMoments(mean, second - mean**2)


def _poly_mul(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def gen_poly_row(m: int, n: int) -> GenPolyRow:
    _check_m(m)
    _check_n(n)
    poly = [1, 1]
    for _ in range(n):
        poly = _poly_mul(poly, [1, m])
    return GenPolyRow(m, n, tuple(poly))


@dataclass(frozen=True)
class ExactMoments:
    mean: Fraction
    variance: Fraction


def exact_moments(m: int, n: int) -> ExactMoments:
    _check_m(m)
    _check_n(n)
    return ExactMoments(
        Fraction(m * n, m + 1) + Fraction(1, 2),
        Fraction(m * n, (m + 1) ** 2) + Fraction(1, 4),
    )


# ---------------------------------------------------------------------------
# gaps


def split_gap(m: int, g: int) -> tuple[int, int]:
    """``g = m*alpha + beta`` with ``0 <= beta < m``."""
    if g < 1:
        raise ValueError(f"gap length must be >= 1, got {g}")
    return divmod(g, m)


def gap_count_finite(m: int, n: int, g: int) -> int:
    """Number of gap occurrences of length ``g`` over all decompositions in ``I_n``."""
    _check_m(m)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    alpha, beta = split_gap(m, g)
    if g > m * n:
        return 0
    q = m + 1
    if alpha == 0:
        # first summand a_0, or a_i among the top beta entries of a bin
        inner = 2 * beta * (n - 1) * q ** (n - 2) if n >= 2 else 0
        return inner + q ** (n - 1)
    if beta == 0:
        inner = 2 * (n - alpha) * m * q ** (n - alpha - 1) if alpha < n else 0
        return inner + q ** (n - alpha)
    total = 2 * (n - alpha) * (m - beta) * q ** (n - alpha - 1) + q ** (n - alpha - 1)
    if n - alpha - 1 > 0:
        total += 2 * beta * (n - alpha - 1) * q ** (n - alpha - 2)
    return total


def total_gaps(m: int, n: int) -> int:
    """Gaps actually present across all of ``I_n`` (``z = 0`` contributes none)."""
    return gap_denominator(m, n) + 1


def gap_denominator(m: int, n: int) -> int:
    """``(mu_n - 1) * |I_n| = (m+1)^(n-1) (2mn - m - 1)``.

    This is ``sum over z in I_n of (k(z) - 1)`` with the empty decomposition
    counted as ``-1``, one less than :func:`total_gaps`.
    """
    _check_m(m)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    value = (exact_moments(m, n).mean - 1) * interval_size(m, n)
    assert value.denominator == 1
    return int(value)


CONVENTIONS = ("signed", "observed")


def finite_formula_valid(m: int, n: int) -> bool:
    """The closed-form finite-n probabilities need a nonzero denominator;
    only ``m = 1, n = 1`` fails."""
    return n >= 1 and gap_denominator(m, n) > 0


def gap_prob_finite(m: int, n: int, g: int, convention: str = "signed") -> Fraction:
    """Exact fraction of gaps of length ``g`` among decompositions in ``I_n``.

    ``convention="signed"`` divides by ``(mu_n - 1)|I_n|`` as in the closed
    forms; ``"observed"`` divides by the number of gaps actually present,
    which is one more.  Both share the same exact numerator.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    count = gap_count_finite(m, n, g)
    if convention == "observed":
        return Fraction(count, total_gaps(m, n))
    denom = gap_denominator(m, n)
    if denom == 0:
        raise ValueError(f"closed form undefined at m={m}, n={n}; use convention='observed'")
    return Fraction(count, denom)


def gap_prob_finite_formula(m: int, n: int, g: int) -> Fraction:
    """The three published case formulas, evaluated literally.

    Kept separate from :func:`gap_prob_finite` so the two can be checked
    against each other.
    """
    alpha, beta = split_gap(m, g)
    d = 2 * m * n - m - 1
    q = m + 1
    if d == 0:
        raise ValueError(f"closed form undefined at m={m}, n={n}")
    if alpha == 0:
        return Fraction(2 * beta * (n - 1), q * d) + Fraction(1, d)
    if beta == 0:
        return Fraction(2 * (n - alpha) * m, q**alpha * d) + Fraction(1, q ** (alpha - 1) * d)
    return (
        Fraction(2 * (n - alpha) * (m - beta), q**alpha * d)
        + Fraction(2 * beta * (n - alpha - 1), q ** (alpha + 1) * d)
        + Fraction(1, q**alpha * d)
    )


def gap_prob_limit(m: int, g: int) -> Fraction:
    _check_m(m)
    alpha, beta = split_gap(m, g)
    if alpha == 0:
        return Fraction(beta, m * (m + 1))
    return Fraction(m + 1 - beta, (m + 1) ** (alpha + 1))


def gap_limit_tail(m: int, alpha_max: int) -> Fraction:
    """``sum of P(g)`` over all ``g`` with ``alpha > alpha_max`` (closed form)."""
    _check_m(m)
    # sum_beta (m+1-beta) = m(m+3)/2 ; sum_{alpha>A} (m+1)^-(alpha+1) = 1/(m (m+1)^(A+1))
    return Fraction(m + 3, 2 * (m + 1) ** (alpha_max + 1))


def gap_limit_normalization(m: int, alpha_max: int) -> Fraction:
    if alpha_max < 1:
        raise ValueError(f"alpha_max must be >= 1, got {alpha_max}")
    head = sum(gap_prob_limit(m, g) for g in range(1, m * (alpha_max + 1)))
    return head + gap_limit_tail(m, alpha_max)


def gap_limit_cdf(m: int, gmax: int) -> list[Fraction]:
    """``[F(0), F(1), ..., F(gmax)]`` for the limiting gap distribution."""
    out = [Fraction(0)]
    for g in range(1, gmax + 1):
        out.append(out[-1] + gap_prob_limit(m, g))
    return out


def gap_limit_moments(m: int) -> tuple[Fraction, Fraction]:
    """Mean and variance of the limiting gap distribution, exactly.

    Uses ``sum_a a x^a`` and ``sum_a a^2 x^a`` in closed form per residue.
    """
    _check_m(m)
    q = Fraction(m + 1)
    x = 1 / q
    s0 = x / (1 - x)  # sum_{a>=1} x^a
    s1 = x / (1 - x) ** 2  # sum a x^a
    s2 = x * (1 + x) / (1 - x) ** 3  # sum a^2 x^a
    mean = Fraction(0)
    second = Fraction(0)
    for beta in range(m):
        w = Fraction(m + 1 - beta) / q  # P(m a + beta) = w x^a for a >= 1
        if beta:
            p0 = Fraction(beta, m * (m + 1))
            mean += beta * p0
            second += beta * beta * p0
        mean += w * (m * s1 + beta * s0)
        second += w * (m * m * s2 + 2 * m * beta * s1 + beta * beta * s0)
    return mean, second - mean**2


@dataclass(frozen=True)
class GapTable:
    m: int
    kind: str  # "finite" or "limit"
    entries: dict[int, Fraction]
    n: int | None = None
    convention: str | None = None

    def rows(self):
        for g in sorted(self.entries):
            alpha, beta = split_gap(self.m, g)
            yield g, alpha, beta, self.entries[g]


def gap_table_limit(m: int, gmax: int) -> GapTable:
    return GapTable(m, "limit", {g: gap_prob_limit(m, g) for g in range(1, gmax + 1)})


def gap_table_finite(m: int, n: int, gmax: int, convention: str = "signed") -> GapTable:
    """Finite-n table; falls back to the observed convention where the
    closed form's denominator vanishes (recorded in ``convention``)."""
    if convention == "signed" and not finite_formula_valid(m, n):
        convention = "observed"
    entries = {g: gap_prob_finite(m, n, g, convention) for g in range(1, gmax + 1)}
    return GapTable(m, "finite", entries, n=n, convention=convention)


def joint_gap_limit_product(m: int, g1: int, g2: int) -> Fraction:
    return gap_prob_limit(m, g1) * gap_prob_limit(m, g2)


# ---------------------------------------------------------------------------
# longest runs


@dataclass(frozen=True)
class LongestRunPrediction:
    p: float
    n_flips: float
    mean: float
    variance: float
    model_error: float = LONGEST_RUN_MODEL_ERROR


def schilling_prediction(p, n_flips) -> LongestRunPrediction:
    """Mean and variance of the longest run of heads in ``n_flips`` tosses of
    a coin with heads probability ``p``, dropping the small periodic terms."""
    p_ = float(p)
    if not 0 < p_ < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if n_flips < 1:
        raise ValueError(f"n_flips must be >= 1, got {n_flips}")
    q = 1 - p_
    log_p = math.log(p_)
    mean = math.log(n_flips * q) / -log_p - EULER_GAMMA / log_p - 0.5
    variance = math.pi**2 / (6 * log_p**2) + 1 / 12
    return LongestRunPrediction(p_, n_flips, mean, variance)


@dataclass(frozen=True)
class LongestGapPrediction:
    """Predictions for the longest gap of ``z`` drawn from ``[a_n, a_{n+1})``.

    ``main_term`` is ``m log2(n / 2m)``; ``refined`` and ``variance`` scale the
    fair-coin longest-run formula by ``m``.  ``empty_bin_estimate`` instead
    uses the actual chance ``1/(m+1)`` that a bin is unused, plus the one bin
    a gap always spans.
    """

    m: int
    n: int
    main_term: float
    refined: float
    variance: float
    empty_bin_estimate: float
    empty_bin_variance: float = field(default=0.0)


def longest_gap_prediction(m: int, n: int) -> LongestGapPrediction:
    _check_m(m)
    if n < 2 * m:
        raise ValueError(f"need n >= 2m, got m={m}, n={n}")
    bins = n // m
    coin = schilling_prediction(0.5, bins)
    empty = schilling_prediction(1 / (m + 1), bins)
    return LongestGapPrediction(
        m=m,
        n=n,
        main_term=m * math.log2(n / (2 * m)),
        refined=m * coin.mean,
        variance=m * m * coin.variance,
        empty_bin_estimate=m * (empty.mean + 1),
        empty_bin_variance=m * m * empty.variance,
    )
