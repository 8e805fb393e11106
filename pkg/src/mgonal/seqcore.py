"""Numeration kernel for m-gonal sequences.

The m-gonal sequence is ``a_0 = 1`` followed by bins of ``m`` terms each;
bin ``b_{k+1}`` holds ``2r(m+1)^k`` for ``r = 1..m``.  A legal decomposition
takes at most one term from each bin.  Because of the closed form, a legal
decomposition of ``z`` is the same thing as the parity bit of ``z`` plus the
base-(m+1) digits of ``z // 2``: digit ``d_k`` selects the ``d_k``-th term of
bin ``b_{k+1}`` (or nothing when ``d_k = 0``).
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Iterable, Sequence

import gmpy2
import numpy as np

# gmpy2.digits handles bases 2..62
_GMPY_MAX_BASE = 62


class IllegalDecompositionError(ValueError):
    """Index list is not a legal m-gonal decomposition."""


@dataclass(frozen=True)
class MGonParams:
    m: int

    def __post_init__(self):
        if isinstance(self.m, bool) or not isinstance(self.m, (int, np.integer)):
            raise TypeError(f"m must be an integer, got {type(self.m).__name__}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        object.__setattr__(self, "m", int(self.m))

    @property
    def radix(self) -> int:
        return self.m + 1


def as_params(m: MGonParams | int) -> MGonParams:
    return m if isinstance(m, MGonParams) else MGonParams(m)


def split_index(params: MGonParams | int, n: int) -> tuple[int, int]:
    """Return ``(k, r)`` with ``n = m*k + r`` and ``1 <= r <= m``.

    Note ``r`` runs up to ``m`` rather than ``m - 1``; the term ``a_n`` is the
    ``r``-th entry of bin ``b_{k+1}``.  Index 0 (the singleton bin) has no
    such split.
    """
    m = as_params(params).m
    if n < 1:
        raise ValueError(f"index {n} has no (k, r) split; need n >= 1")
    k, r = divmod(n - 1, m)
    return k, r + 1


def term(params: MGonParams | int, n: int) -> int:
    if n < 0:
        raise ValueError(f"sequence index must be >= 0, got {n}")
    p = as_params(params)
    if n == 0:
        return 1
    k, r = split_index(p, n)
    return 2 * r * p.radix**k


def sequence_prefix(params: MGonParams | int, count: int) -> list[int]:
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    p = as_params(params)
    out = [1]
    power = 1
    for n in range(1, count):
        k, r = split_index(p, n)
        if r == 1 and k > 0:
            power *= p.radix
        out.append(2 * r * power)
    return out


def bin_of(params: MGonParams | int, n: int) -> int:
    if n < 0:
        raise ValueError(f"sequence index must be >= 0, got {n}")
    if n == 0:
        return 0
    return -(-n // as_params(params).m)


def omega(params: MGonParams | int, n: int) -> int:
    """Largest integer decomposable with bins ``b_0..b_n``: the sum of the
    top term of each bin."""
    p = as_params(params)
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    return sum(term(p, p.m * i) for i in range(n + 1))


@dataclass(frozen=True)
class Decomposition:
    """A legal decomposition: strictly increasing indices and the value."""

    m: int
    indices: tuple[int, ...]
    value: int

    @property
    def summand_count(self) -> int:
        return len(self.indices)

    def summands(self) -> list[int]:
        """Term values, largest first."""
        return [term(self.m, i) for i in reversed(self.indices)]

    def bins(self) -> list[int]:
        return [bin_of(self.m, i) for i in self.indices]


@dataclass(frozen=True)
class DigitVector:
    parity_bit: int
    digits: tuple[int, ...]

    def value(self, params: MGonParams | int) -> int:
        radix = as_params(params).radix
        w = 0
        for d in reversed(self.digits):
            w = w * radix + d
        return self.parity_bit + 2 * w

    def indices(self, params: MGonParams | int) -> tuple[int, ...]:
        m = as_params(params).m
        out = [0] if self.parity_bit else []
        out.extend(m * k + d for k, d in enumerate(self.digits) if d)
        return tuple(out)


def _digits_loop(w: int, radix: int) -> list[int]:
    out = []
    while w:
        w, d = divmod(w, radix)
        out.append(d)
    return out


_DIGIT_TABLES: dict[int, np.ndarray] = {}


def _digit_table(radix: int) -> np.ndarray:
    table = _DIGIT_TABLES.get(radix)
    if table is None:
        table = np.full(256, 255, dtype=np.uint8)
        for d in range(radix):
            table[ord(gmpy2.digits(d, radix))] = d
        _DIGIT_TABLES[radix] = table
    return table


def base_digits(w: int, radix: int) -> list[int]:
    """Little-endian base-``radix`` digits of ``w >= 0`` (empty for 0)."""
    if w < 0:
        raise ValueError("w must be non-negative")
    if w == 0:
        return []
    if radix > _GMPY_MAX_BASE:
        return _digits_loop(w, radix)
    text = gmpy2.digits(w, radix).encode("ascii")
    return _digit_table(radix)[np.frombuffer(text, dtype=np.uint8)][::-1].tolist()


def to_digits(params: MGonParams | int, z: int) -> DigitVector:
    if z < 0:
        raise ValueError(f"z must be non-negative, got {z}")
    p = as_params(params)
    return DigitVector(z & 1, tuple(base_digits(z >> 1, p.radix)))


def decompose(params: MGonParams | int, z: int) -> Decomposition:
    """Unique legal decomposition of ``z`` via the parity bit and the
    base-(m+1) digits of ``z // 2``."""
    p = as_params(params)
    z = int(z)
    return Decomposition(p.m, to_digits(p, z).indices(p), z)


def decompose_greedy(params: MGonParams | int, z: int) -> Decomposition:
    """Repeatedly subtract the largest term not exceeding what is left."""
    p = as_params(params)
    z = int(z)
    if z < 0:
        raise ValueError(f"z must be non-negative, got {z}")
    terms = [1]
    while terms[-1] <= z:
        terms.append(term(p, len(terms)))
    picked = []
    rest = z
    while rest:
        i = bisect.bisect_right(terms, rest) - 1
        picked.append(i)
        rest -= terms[i]
    return Decomposition(p.m, tuple(reversed(picked)), z)


def is_legal(params: MGonParams | int, indices: Sequence[int]) -> bool:
    p = as_params(params)
    if any(i < 0 for i in indices):
        return False
    for a, b in zip(indices, indices[1:]):
        if a >= b or bin_of(p, a) == bin_of(p, b):
            return False
    return True


def recompose(params: MGonParams | int, d: Decomposition | Iterable[int]) -> int:
    p = as_params(params)
    indices = list(d.indices if isinstance(d, Decomposition) else d)
    if not is_legal(p, indices):
        raise IllegalDecompositionError(f"illegal decomposition for m={p.m}: {indices}")
    return sum(term(p, i) for i in indices)


def gaps_of(d: Decomposition | Sequence[int]) -> tuple[int, ...]:
    """Successive index differences; the leading ``l_1 - 0`` is not a gap."""
    idx = d.indices if isinstance(d, Decomposition) else tuple(d)
    return tuple(b - a for a, b in zip(idx, idx[1:]))


# ---------------------------------------------------------------------------
# batch forms used by the oracle, the samplers and the acceptance sweeps


def digits_array(params: MGonParams | int, z: np.ndarray, width: int | None = None):
    """Vectorized :func:`to_digits` for non-negative int64 arrays.

    Returns ``(parity, digits)`` where ``digits`` has shape ``(len(z), width)``.
    """
    p = as_params(params)
    z = np.asarray(z, dtype=np.int64)
    if z.size and z.min() < 0:
        raise ValueError("z must be non-negative")
    w = z >> 1
    if width is None:
        top = int(w.max()) if w.size else 0
        width = len(_digits_loop(top, p.radix))
    digits = np.empty((z.size, width), dtype=np.int64)
    for k in range(width):
        w, digits[:, k] = np.divmod(w, p.radix)
    if np.any(w):
        raise ValueError(f"width {width} too small for the given values")
    return (z & 1), digits


def digits_of_many(params: MGonParams | int, values: Sequence[int], width: int):
    """Digit matrix for arbitrary-precision integers.

    Same output as :func:`digits_array` but accepts Python ints of any size.
    """
    p = as_params(params)
    n = len(values)
    parity = np.fromiter((v & 1 for v in values), dtype=np.int64, count=n)
    if p.radix > _GMPY_MAX_BASE:
        digits = np.zeros((n, width), dtype=np.int64)
        for row, v in enumerate(values):
            ds = _digits_loop(v >> 1, p.radix)
            if len(ds) > width:
                raise ValueError(f"width {width} too small for the given values")
            digits[row, : len(ds)] = ds
        return parity, digits
    zero = gmpy2.digits(0, p.radix)
    texts = []
    for v in values:
        s = gmpy2.digits(v >> 1, p.radix)
        if len(s) > width:
            raise ValueError(f"width {width} too small for the given values")
        texts.append(s.rjust(width, zero))
    raw = np.frombuffer("".join(texts).encode("ascii"), dtype=np.uint8)
    digits = _digit_table(p.radix)[raw].reshape(n, width)[:, ::-1]
    return parity, digits.astype(np.int64)


def recompose_array(params: MGonParams | int, parity: np.ndarray, digits: np.ndarray) -> np.ndarray:
    """Inverse of :func:`digits_array` (int64 range only)."""
    p = as_params(params)
    w = np.zeros(digits.shape[0], dtype=np.int64)
    for k in range(digits.shape[1] - 1, -1, -1):
        w = w * p.radix + digits[:, k]
    return parity + 2 * w


def index_matrix(params: MGonParams | int, parity: np.ndarray, digits: np.ndarray) -> np.ndarray:
    """Summand indices per row, one column per bin, ``-1`` where a bin is unused.

    Column 0 is bin ``b_0``; column ``k + 1`` is bin ``b_{k+1}``.
    """
    m = as_params(params).m
    parity = np.asarray(parity)
    digits = np.asarray(digits)
    out = np.empty((digits.shape[0], digits.shape[1] + 1), dtype=np.int64)
    out[:, 0] = np.where(parity == 1, 0, -1)
    base = m * np.arange(digits.shape[1], dtype=np.int64)
    out[:, 1:] = np.where(digits > 0, base[None, :] + digits, -1)
    return out


def gap_matrix(indices: np.ndarray) -> np.ndarray:
    """Gap ending at each column (0 if that bin is unused or opens the row)."""
    indices = np.asarray(indices)
    gaps = np.zeros(indices.shape, dtype=np.int64)
    last = np.full(indices.shape[0], -1, dtype=np.int64)
    for c in range(indices.shape[1]):
        col = indices[:, c]
        used = col >= 0
        gaps[:, c] = np.where(used & (last >= 0), col - last, 0)
        last = np.where(used, col, last)
    return gaps


def greedy_array(params: MGonParams | int, z: np.ndarray) -> np.ndarray:
    """Vectorized greedy decoder; returns an index matrix like :func:`index_matrix`.

    Indices are placed by their bin, which the greedy itself never consults.
    """
    p = as_params(params)
    z = np.asarray(z, dtype=np.int64)
    top = int(z.max()) if z.size else 0
    terms = [1]
    while terms[-1] <= top:
        terms.append(term(p, len(terms)))
    table = np.array(terms, dtype=np.int64)
    n_bins = bin_of(p, len(terms) - 1) + 1
    out = np.full((z.size, n_bins), -1, dtype=np.int64)
    rows = np.arange(z.size)
    rest = z.copy()
    while True:
        active = rest > 0
        if not active.any():
            break
        pick = np.searchsorted(table, rest[active], side="right") - 1
        bins = np.where(pick == 0, 0, (pick + p.m - 1) // p.m)
        r = rows[active]
        if np.any(out[r, bins] >= 0):
            raise IllegalDecompositionError("greedy reused a bin")
        out[r, bins] = pick
        rest[active] -= table[pick]
    return out
