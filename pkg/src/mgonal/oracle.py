"""Brute-force ground truth by exhaustive enumeration.

Every legal decomposition over bins ``b_0..b_n`` is one choice vector: bin
``b_0`` contributes ``a_0`` or nothing, every other bin one of its ``m``
terms or nothing.  Iterating the choice vectors directly means an illegal
decomposition can never be produced.  Apart from :func:`term`, nothing here
goes through the digit decoder or the closed forms.
"""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .seqcore import term

MAX_DECOMPOSITIONS = 10**8


class InstanceTooLargeError(ValueError):
    pass


class UniquenessViolation(AssertionError):
    """Two choice vectors produced the same value, or a value fell outside
    the expected interval."""


@dataclass
class EnumerationCensus:
    m: int
    n: int
    size: int
    # row v holds the choice vector whose sum is v; column 0 is b_0
    choices: np.ndarray
    pnk_counts: list[int]
    gap_counts: dict[int, int]
    n_gaps_total: int
    # (start index i, g) -> sum over z of X_{i,g}(z)
    gap_start_counts: dict[tuple[int, int], int]
    _gaps: np.ndarray | None = field(default=None, repr=False)
    _indices: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_gaps_signed(self) -> int:
        """``sum over z in I_n of (k(z) - 1)``, the empty decomposition counting -1."""
        return sum((k - 1) * c for k, c in enumerate(self.pnk_counts))

    @property
    def mean_summands(self) -> Fraction:
        return Fraction(sum(k * c for k, c in enumerate(self.pnk_counts)), self.size)

    def indicator_totals(self) -> dict[int, int]:
        out: Counter = Counter()
        for (_, g), c in self.gap_start_counts.items():
            out[g] += c
        return dict(out)

    def indices(self) -> np.ndarray:
        """Index matrix (``-1`` for unused bins), row ``v`` for value ``v``."""
        if self._indices is None:
            self._indices = _choice_indices(self.m, self.choices)
        return self._indices

    def gaps(self) -> np.ndarray:
        if self._gaps is None:
            self._gaps = _row_gaps(self.indices())
        return self._gaps

    def decomposition(self, value: int) -> tuple[int, ...]:
        row = self.indices()[value]
        return tuple(int(i) for i in row if i >= 0)


def _choice_indices(m: int, choices: np.ndarray) -> np.ndarray:
    idx = np.full(choices.shape, -1, dtype=np.int64)
    idx[:, 0] = np.where(choices[:, 0] > 0, 0, -1)
    for b in range(1, choices.shape[1]):
        c = choices[:, b].astype(np.int64)
        idx[:, b] = np.where(c > 0, m * (b - 1) + c, -1)
    return idx


def _row_gaps(idx: np.ndarray) -> np.ndarray:
    out = np.zeros(idx.shape, dtype=np.int64)
    prev = np.full(idx.shape[0], -1, dtype=np.int64)
    for b in range(idx.shape[1]):
        cur = idx[:, b]
        has = cur >= 0
        out[:, b] = np.where(has & (prev >= 0), cur - prev, 0)
        prev = np.where(has, cur, prev)
    return out


def _value_tables(m: int, n: int) -> list[np.ndarray]:
    tables = [np.array([0, 1], dtype=np.int64)]
    for b in range(1, n + 1):
        tables.append(np.array([0] + [term(m, m * (b - 1) + c) for c in range(1, m + 1)], dtype=np.int64))
    return tables


def _enumerate_top(m: int, n: int, top: int, tables):
    """All choice vectors whose top bin ``b_n`` takes choice ``top``."""
    dims = [2] + [m + 1] * (n - 1) if n >= 1 else []
    lower = np.indices(dims, dtype=np.int8).reshape(len(dims), -1).T if dims else np.zeros((1, 0), np.int8)
    choices = np.empty((lower.shape[0], n + 1), dtype=np.int8)
    choices[:, :n] = lower
    choices[:, n] = top
    values = np.zeros(choices.shape[0], dtype=np.int64)
    for b in range(n + 1):
        values += tables[b][choices[:, b]]
    return choices, values


def enumerate_all(m: int, n: int, max_size: int = MAX_DECOMPOSITIONS, workers: int = 1) -> EnumerationCensus:
    """Enumerate every legal decomposition over bins ``b_0..b_n``.

    Raises :class:`UniquenessViolation` if any value is hit twice or lies
    outside ``[0, 2(m+1)^n)``.  The work is split by the choice made in the
    top bin, so ``workers > 1`` runs the parts on a thread pool.
    """
    if m < 1 or n < 0:
        raise ValueError(f"need m >= 1 and n >= 0, got m={m}, n={n}")
    size = 2 * (m + 1) ** n
    if size > max_size:
        raise InstanceTooLargeError(f"{size} decompositions exceeds the limit of {max_size}")
    if size > np.iinfo(np.int64).max:
        raise InstanceTooLargeError("values do not fit in 64 bits")
    tables = _value_tables(m, n)
    tops = range(m + 1) if n >= 1 else [None]

    def part(top):
        if top is None:
            choices = np.array([[0], [1]], dtype=np.int8)
            return choices, choices[:, 0].astype(np.int64)
        return _enumerate_top(m, n, top, tables)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(part, tops))
    else:
        parts = [part(t) for t in tops]

    seen = np.zeros(size, dtype=bool)
    ordered = np.empty((size, n + 1), dtype=np.int8)
    for choices, values in parts:
        if values.min() < 0 or values.max() >= size:
            bad = values[(values < 0) | (values >= size)][0]
            raise UniquenessViolation(f"value {bad} outside [0, {size})")
        uniq, counts = np.unique(values, return_counts=True)
        repeated = np.concatenate([uniq[counts > 1], uniq[seen[uniq]]])
        if repeated.size:
            raise UniquenessViolation(f"value {int(repeated[0])} decomposed more than once")
        seen[values] = True
        ordered[values] = choices
    if not seen.all():
        raise UniquenessViolation(f"value {int(np.argmin(seen))} has no decomposition")

    idx = _choice_indices(m, ordered)
    gaps = _row_gaps(idx)
    k = (ordered > 0).sum(axis=1)
    pnk = np.bincount(k, minlength=n + 2).tolist()
    present = gaps > 0
    gvals = gaps[present]
    gap_counts = {int(g): int(c) for g, c in zip(*np.unique(gvals, return_counts=True))}
    starts = (idx - gaps)[present]
    key = starts * (m * n + 2) + gvals
    ukeys, kcounts = np.unique(key, return_counts=True)
    start_counts = {
        (int(u // (m * n + 2)), int(u % (m * n + 2))): int(c) for u, c in zip(ukeys, kcounts)
    }
    return EnumerationCensus(
        m=m,
        n=n,
        size=size,
        choices=ordered,
        pnk_counts=[int(c) for c in pnk],
        gap_counts=gap_counts,
        n_gaps_total=int(gvals.size),
        gap_start_counts=start_counts,
        _gaps=gaps,
        _indices=idx,
    )


CONVENTIONS = ("observed", "signed")


def census_gap_probability(census: EnumerationCensus, g: int, convention: str = "observed") -> Fraction:
    """Fraction of gaps of length ``g``.

    ``"observed"`` divides by the gaps actually seen; ``"signed"`` by
    ``sum over z of (k(z) - 1)`` including ``-1`` for ``z = 0``.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    denom = census.n_gaps_total if convention == "observed" else census.n_gaps_signed
    count = census.gap_counts.get(g, 0)
    if denom == 0:
        if count:
            raise ZeroDivisionError(f"{convention} denominator vanishes at m={census.m}, n={census.n}")
        return Fraction(0)
    return Fraction(count, denom)


def joint_counts(census: EnumerationCensus, g1: int, g2: int) -> Counter:
    """``(j1, j2) -> X_{j1, j1+g1, j2, j2+g2}(n)`` for ``j1 < j2``."""
    gaps = census.gaps()
    idx = census.indices()
    out: Counter = Counter()
    cols = gaps.shape[1]
    for c1 in range(cols):
        first = gaps[:, c1] == g1
        if not first.any():
            continue
        for c2 in range(c1 + 1, cols):
            hit = first & (gaps[:, c2] == g2)
            if not hit.any():
                continue
            j1 = idx[hit, c1] - g1
            j2 = idx[hit, c2] - g2
            pairs, counts = np.unique(np.stack([j1, j2], axis=1), axis=0, return_counts=True)
            for (a, b), c in zip(pairs.tolist(), counts.tolist()):
                out[(a, b)] += c
    return out


@dataclass(frozen=True)
class JointBreakdown:
    total: int
    main: int  # j1 != 0 and j1 + g1 < j2
    adjacent: int  # j1 + g1 == j2
    origin: int  # j1 == 0 and j1 + g1 < j2


def joint_breakdown(census: EnumerationCensus, g1: int, g2: int) -> JointBreakdown:
    counts = joint_counts(census, g1, g2)
    main = adjacent = origin = 0
    for (j1, j2), c in counts.items():
        if j1 + g1 == j2:
            adjacent += c
        elif j1 == 0:
            origin += c
        else:
            main += c
    return JointBreakdown(main + adjacent + origin, main, adjacent, origin)


def census_joint_statistic(census: EnumerationCensus, g1: int, g2: int) -> Fraction:
    """``2 / (|I_n| mu_n^2) * sum_{j1<j2} X_{j1,j1+g1,j2,j2+g2}(n)``."""
    total = sum(joint_counts(census, g1, g2).values())
    return Fraction(2 * total, 1) / (census.size * census.mean_summands**2)


def gap_pair_total(census: EnumerationCensus) -> int:
    """Ordered pairs of gaps within one decomposition, summed over ``I_n``."""
    return sum(c * (k - 1) * (k - 2) // 2 for k, c in enumerate(census.pnk_counts) if k >= 3)


def construct_sequence(m: int, count: int) -> list[int]:
    """Build the sequence by always adjoining the smallest integer that the
    current terms cannot legally represent.

    The representable set is tracked as a union of closed intervals, the
    Minkowski sum over complete bins of ``{0} + bin``.
    """
    if m < 1 or count < 1:
        raise ValueError("need m >= 1 and count >= 1")
    seq = [1]
    complete = [(0, 1)]  # after bin b_0
    partial: list[int] = []
    while len(seq) < count:
        candidates = _add_choices(complete, partial)
        nxt = _smallest_missing(candidates)
        seq.append(nxt)
        partial.append(nxt)
        if len(partial) == m:
            complete = _add_choices(complete, partial)
            partial = []
    return seq


def _add_choices(intervals, options):
    shifted = list(intervals)
    for t in options:
        shifted.extend((a + t, b + t) for a, b in intervals)
    shifted.sort()
    merged = [shifted[0]]
    for a, b in shifted[1:]:
        la, lb = merged[-1]
        if a <= lb + 1:
            merged[-1] = (la, max(lb, b))
        else:
            merged.append((a, b))
    return merged


def _smallest_missing(intervals) -> int:
    if intervals[0][0] > 0:
        return 0
    return intervals[0][1] + 1
