"""Seeded Monte Carlo experiments on m-gonal decompositions.

Random numbers come from numpy's PCG64.  A run with seed ``s`` and ``c``
chunks gives chunk ``i`` the stream ``SeedSequence(s).spawn(c)[i]``; each
chunk accumulates privately and the partial results are merged in chunk
order.  Reports are therefore reproducible for a fixed ``(seed, chunks)``.

Two sampling modes:

* ``"full"``: ``z`` uniform on ``I_n = [0, 2(m+1)^n)``.  A uniform parity bit
  and ``n`` uniform base-(m+1) digits are exactly a uniform ``z``, so no big
  integer is ever formed.
* ``"bracket"``: ``z`` uniform on ``[a_n, a_{n+1})``.  The offset is drawn as
  a big integer (64 spare random bits reduced modulo the width, bias below
  ``2**-64``) and decoded by the digit decoder.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterator

import numpy as np
from scipy.stats import norm

from . import exact
from .seqcore import (
    Decomposition,
    as_params,
    digits_of_many,
    gap_matrix,
    index_matrix,
    split_index,
    term,
)

INTERVALS = ("full", "bracket")
BATCH = 10_000


@dataclass(frozen=True)
class SamplerConfig:
    m: int
    n: int
    sample_count: int
    seed: int = 0
    interval: str = "full"
    chunks: int = 1

    def __post_init__(self):
        as_params(self.m)
        if self.interval not in INTERVALS:
            raise ValueError(f"interval must be one of {INTERVALS}, got {self.interval!r}")
        if self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")
        if self.chunks < 1:
            raise ValueError("chunks must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.interval == "full" and self.n < 0:
            raise ValueError("n must be >= 0")
        if self.interval == "bracket" and self.n < 1:
            raise ValueError("bracket sampling needs n >= 1")


def chunk_sizes(total: int, chunks: int) -> list[int]:
    base, extra = divmod(total, chunks)
    return [base + (i < extra) for i in range(chunks)]


def _streams(config: SamplerConfig) -> list[np.random.Generator]:
    seqs = np.random.SeedSequence(config.seed).spawn(config.chunks)
    return [np.random.Generator(np.random.PCG64(s)) for s in seqs]


def bracket_layout(m: int, n: int) -> tuple[int, int, int]:
    """For ``[a_n, a_{n+1})`` return ``(a_n, width, digit_count)``.

    Every ``z`` there has exactly ``k + 1`` base-(m+1) digits in ``z // 2``
    where ``n = m k + r``.
    """
    k, _ = split_index(m, n)
    lo = term(m, n)
    width = term(m, n + 1) - lo
    return lo, width, k + 1


def _uniform_below(rng: np.random.Generator, width: int, count: int) -> list[int]:
    words = (width.bit_length() + 63) // 64 + 1
    raw = rng.integers(0, 2**64, size=(count, words), dtype=np.uint64, endpoint=False)
    data = raw.tobytes()
    size = 8 * words
    return [int.from_bytes(data[i * size : (i + 1) * size], "little") % width for i in range(count)]


def _sample_batches(config: SamplerConfig, rng: np.random.Generator, count: int):
    """Yield ``(parity, digits)`` batches for ``count`` samples."""
    m, n = config.m, config.n
    if config.interval == "bracket":
        lo, width, ndig = bracket_layout(m, n)
    for start in range(0, count, BATCH):
        b = min(BATCH, count - start)
        if config.interval == "full":
            parity = rng.integers(0, 2, size=b, dtype=np.int64)
            digits = rng.integers(0, m + 1, size=(b, n), dtype=np.int64)
        else:
            values = [lo + off for off in _uniform_below(rng, width, b)]
            parity, digits = digits_of_many(m, values, ndig)
        yield parity, digits


def _map_chunks(config: SamplerConfig, fn):
    """Run ``fn(batches)`` per chunk and return the per-chunk results in order."""
    rngs = _streams(config)
    sizes = chunk_sizes(config.sample_count, config.chunks)

    def run(i):
        return fn(_sample_batches(config, rngs[i], sizes[i]))

    if config.chunks == 1:
        return [run(0)]
    with ThreadPoolExecutor(config.chunks) as pool:
        return list(pool.map(run, range(config.chunks)))


def sample_uniform(config: SamplerConfig) -> Iterator[Decomposition]:
    """Stream of decompositions, chunk by chunk in chunk order.

    ``value`` is filled in only for bracket sampling; the full-interval path
    never builds the integer (it is reported as -1).
    """
    rngs = _streams(config)
    sizes = chunk_sizes(config.sample_count, config.chunks)
    m = config.m
    radix = m + 1
    for rng, size in zip(rngs, sizes):
        for parity, digits in _sample_batches(config, rng, size):
            idx = index_matrix(m, parity, digits)
            for p, drow, irow in zip(parity, digits, idx):
                indices = tuple(int(i) for i in irow if i >= 0)
                value = -1
                if config.interval == "bracket":
                    w = 0
                    for d in reversed(drow.tolist()):
                        w = w * radix + d
                    value = int(p) + 2 * w
                yield Decomposition(m, indices, value)


def sample_values(config: SamplerConfig) -> list[int]:
    """The sampled integers themselves (builds big integers; small runs only)."""
    radix = config.m + 1
    out = []
    for rng, size in zip(_streams(config), chunk_sizes(config.sample_count, config.chunks)):
        for parity, digits in _sample_batches(config, rng, size):
            for p, drow in zip(parity.tolist(), digits.tolist()):
                w = 0
                for d in reversed(drow):
                    w = w * radix + d
                out.append(p + 2 * w)
    return out


# ---------------------------------------------------------------------------
# reports


@dataclass
class ExperimentReport:
    kind: str
    m: int
    n: int
    interval: str
    sample_count: int
    seed: int
    chunks: int
    histogram: dict[int, int]
    sample_mean: float
    sample_variance: float
    skewness: float
    excess_kurtosis: float
    ks_statistic: float | None
    predicted_mean: float | None
    predicted_variance: float | None
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["histogram"] = {str(k): v for k, v in sorted(self.histogram.items())}
        return d


def _histogram_moments(hist: dict[int, int]) -> tuple[float, float, float, float]:
    """Mean, sample variance (ddof=1), skewness, excess kurtosis."""
    total = sum(hist.values())
    if total == 0:
        return math.nan, math.nan, math.nan, math.nan
    xs = np.array(sorted(hist), dtype=float)
    ws = np.array([hist[x] for x in sorted(hist)], dtype=float)
    mean = float((xs * ws).sum() / total)
    dev = xs - mean
    m2 = float((ws * dev**2).sum() / total)
    m3 = float((ws * dev**3).sum() / total)
    m4 = float((ws * dev**4).sum() / total)
    var = m2 * total / (total - 1) if total > 1 else 0.0
    skew = m3 / m2**1.5 if m2 > 0 else 0.0
    kurt = m4 / m2**2 - 3 if m2 > 0 else 0.0
    return mean, var, skew, kurt


def _merge(hists) -> dict[int, int]:
    out: Counter = Counter()
    for h in hists:
        out.update(h)
    return dict(sorted(out.items()))


def normal_ks(hist: dict[int, int], mean: float, sd: float) -> float:
    """KS distance between an integer-valued sample and ``N(mean, sd^2)``.

    The empirical CDF at ``k`` is compared with the normal CDF at ``k + 1/2``
    (continuity correction), over every ``k`` between the extremes.
    """
    lo, hi = min(hist), max(hist)
    ks = np.arange(lo - 1, hi + 1)
    counts = np.array([hist.get(int(k), 0) for k in ks], dtype=float)
    ecdf = np.cumsum(counts) / counts.sum()
    ref = norm.cdf((ks + 0.5 - mean) / sd)
    return float(max(np.abs(ecdf - ref).max(), ref[0], 1 - ref[-1]))


def _report(kind, config, hist, ks, pmean, pvar, extras=None) -> ExperimentReport:
    mean, var, skew, kurt = _histogram_moments(hist)
    return ExperimentReport(
        kind=kind,
        m=config.m,
        n=config.n,
        interval=config.interval,
        sample_count=config.sample_count,
        seed=config.seed,
        chunks=config.chunks,
        histogram=hist,
        sample_mean=mean,
        sample_variance=var,
        skewness=skew,
        excess_kurtosis=kurt,
        ks_statistic=ks,
        predicted_mean=pmean,
        predicted_variance=pvar,
        extras=extras or {},
    )


def run_summand_experiment(config: SamplerConfig) -> ExperimentReport:
    """Number of summands per sampled ``z``, against the exact mean/variance."""

    def chunk(batches):
        h: Counter = Counter()
        for parity, digits in batches:
            k = parity + np.count_nonzero(digits, axis=1)
            h.update(dict(zip(*(a.tolist() for a in np.unique(k, return_counts=True)))))
        return h

    hist = _merge(_map_chunks(config, chunk))
    if config.interval == "full":
        mom = exact.exact_moments(config.m, config.n)
        pmean, pvar = float(mom.mean), float(mom.variance)
        ks = normal_ks(hist, pmean, math.sqrt(pvar))
    else:
        pmean = pvar = None
        mean, var, _, _ = _histogram_moments(hist)
        ks = normal_ks(hist, mean, math.sqrt(var)) if var > 0 else None
    return _report("summands", config, hist, ks, pmean, pvar)


def _gap_batches(config, batches):
    for parity, digits in batches:
        yield gap_matrix(index_matrix(config.m, parity, digits))


def gap_ks(hist: dict[int, int], m: int) -> float:
    """KS distance between a gap histogram and the limiting gap law."""
    total = sum(hist.values())
    gmax = max(hist)
    cdf = np.array([float(x) for x in exact.gap_limit_cdf(m, gmax)])
    counts = np.zeros(gmax + 1)
    for g, c in hist.items():
        counts[g] = c
    return float(np.abs(np.cumsum(counts) / total - cdf).max())


def run_gap_experiment(config: SamplerConfig) -> ExperimentReport:
    """Pool every gap from every sampled decomposition."""

    def chunk(batches):
        h: Counter = Counter()
        for gaps in _gap_batches(config, batches):
            vals = gaps[gaps > 0]
            h.update(dict(zip(*(a.tolist() for a in np.unique(vals, return_counts=True)))))
        return h

    hist = _merge(_map_chunks(config, chunk))
    total = sum(hist.values())
    m = config.m
    lim_mean, lim_var = exact.gap_limit_moments(m)
    extras: dict = {"total_gaps": total}
    rows = []
    for g in range(1, (max(hist) if hist else 0) + 1):
        row = {
            "g": g,
            "count": hist.get(g, 0),
            "empirical": hist.get(g, 0) / total,
            "limit": float(exact.gap_prob_limit(m, g)),
        }
        if config.interval == "full" and exact.finite_formula_valid(m, config.n):
            row["finite"] = float(exact.gap_prob_finite(m, config.n, g))
        rows.append(row)
    extras["table"] = rows
    if not hist:
        return _report("gaps", config, {0: 0}, None, float(lim_mean), float(lim_var), extras)
    return _report("gaps", config, hist, gap_ks(hist, m), float(lim_mean), float(lim_var), extras)


@dataclass
class IndividualGapReport:
    m: int
    n: int
    sample_count: int
    seed: int
    chunks: int
    ks_distances: np.ndarray
    skipped: int
    median: float
    p90: float

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "sample_count": self.sample_count,
            "seed": self.seed,
            "chunks": self.chunks,
            "evaluated": int(self.ks_distances.size),
            "skipped": self.skipped,
            "median": self.median,
            "p90": self.p90,
        }


def individual_ks(gaps: np.ndarray, m: int) -> tuple[np.ndarray, int]:
    """KS distance of each row's spacing gap measure to the limiting law.

    Rows with fewer than one gap are dropped; returns ``(distances, dropped)``.
    """
    n_gaps = (gaps > 0).sum(axis=1)
    keep = n_gaps > 0
    gaps = gaps[keep]
    n_gaps = n_gaps[keep]
    if gaps.shape[0] == 0:
        return np.zeros(0), int((~keep).sum())
    gmax = int(gaps.max())
    rows = np.repeat(np.arange(gaps.shape[0]), gaps.shape[1])
    flat = gaps.ravel()
    sel = flat > 0
    hist = np.bincount(rows[sel] * (gmax + 1) + flat[sel], minlength=gaps.shape[0] * (gmax + 1))
    hist = hist.reshape(gaps.shape[0], gmax + 1)
    ecdf = np.cumsum(hist, axis=1) / n_gaps[:, None]
    ref = np.array([float(x) for x in exact.gap_limit_cdf(m, gmax)])
    # beyond gmax the empirical CDF is 1 and the reference only gets closer to it
    return np.abs(ecdf - ref[None, :]).max(axis=1), int((~keep).sum())


def run_individual_gap_experiment(config: SamplerConfig) -> IndividualGapReport:
    def chunk(batches):
        out, skipped = [], 0
        for gaps in _gap_batches(config, batches):
            ks, s = individual_ks(gaps, config.m)
            out.append(ks)
            skipped += s
        return np.concatenate(out), skipped

    parts = _map_chunks(config, chunk)
    ks = np.concatenate([p[0] for p in parts])
    skipped = sum(p[1] for p in parts)
    return IndividualGapReport(
        m=config.m,
        n=config.n,
        sample_count=config.sample_count,
        seed=config.seed,
        chunks=config.chunks,
        ks_distances=ks,
        skipped=skipped,
        median=float(np.median(ks)) if ks.size else math.nan,
        p90=float(np.quantile(ks, 0.9)) if ks.size else math.nan,
    )


def run_longest_gap_experiment(config: SamplerConfig) -> ExperimentReport:
    """Longest gap of ``z`` uniform on ``[a_n, a_{n+1})``; 0 when ``z`` has
    fewer than two summands."""
    if config.interval != "bracket":
        raise ValueError("longest-gap experiments sample the bracket [a_n, a_{n+1})")
    pred = exact.longest_gap_prediction(config.m, config.n)

    def chunk(batches):
        h: Counter = Counter()
        for gaps in _gap_batches(config, batches):
            longest = gaps.max(axis=1)
            h.update(dict(zip(*(a.tolist() for a in np.unique(longest, return_counts=True)))))
        return h

    hist = _merge(_map_chunks(config, chunk))
    mean, _, _, _ = _histogram_moments(hist)
    extras = {
        "main_term": pred.main_term,
        "schilling_refined": pred.refined,
        "empty_bin_estimate": pred.empty_bin_estimate,
        "empty_bin_variance": pred.empty_bin_variance,
        "offset": mean - pred.main_term,
    }
    return _report("longest", config, hist, None, pred.main_term, pred.variance, extras)
