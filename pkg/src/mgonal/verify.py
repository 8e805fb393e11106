"""Cross-checks of the decoder and closed forms against exhaustive enumeration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import exact, oracle, seqcore


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _check(name, fn) -> CheckResult:
    try:
        ok, detail = fn()
    except Exception as exc:  # a crashing check is a failed check
        return CheckResult(name, False, f"{type(exc).__name__}: {exc}")
    return CheckResult(name, bool(ok), detail)


def run_verification(m: int, bins: int, deep: bool = False, max_size: int = oracle.MAX_DECOMPOSITIONS):
    """Enumerate bins ``b_0..b_bins`` and run every cross-check.

    Raises :class:`oracle.InstanceTooLargeError` before doing any work if the
    enumeration would exceed ``max_size``.
    """
    n = bins
    size = exact.interval_size(m, n)
    if size > max_size:
        raise oracle.InstanceTooLargeError(f"{size} decompositions exceeds the limit of {max_size}")
    results: list[CheckResult] = []
    state: dict = {}

    def uniqueness():
        state["census"] = oracle.enumerate_all(m, n, max_size=max_size)
        return True, f"{size} values, each decomposed exactly once"

    results.append(_check("uniqueness_completeness", uniqueness))
    census = state.get("census")
    if census is None:
        return results

    values = np.arange(size, dtype=np.int64)

    def digit_vs_oracle():
        parity, digits = seqcore.digits_array(m, values, width=n)
        ours = seqcore.index_matrix(m, parity, digits)
        bad = np.flatnonzero((ours != census.indices()).any(axis=1))
        if bad.size:
            return False, f"first mismatch at z={int(bad[0])}"
        spot = [0, size - 1, size // 2, size // 3]
        for z in spot:
            if seqcore.decompose(m, z).indices != census.decomposition(z):
                return False, f"scalar decompose mismatch at z={z}"
        return True, f"{size} values"

    results.append(_check("decompose_matches_oracle", digit_vs_oracle))

    def greedy():
        g = seqcore.greedy_array(m, values)
        ref = census.indices()
        width = min(g.shape[1], ref.shape[1])
        same = (g[:, :width] == ref[:, :width]).all() and (g[:, width:] < 0).all()
        return same, f"{size} values"

    results.append(_check("greedy_matches_digit", greedy))

    def omega():
        bad = [k for k in range(n + 1) if seqcore.omega(m, k) != seqcore.term(m, m * k + 1) - 1]
        return not bad, "omega_k = a_{mk+1} - 1" if not bad else f"fails at k={bad}"

    results.append(_check("omega_identity", omega))

    def pnk():
        closed = exact.pnk_row_closed(m, n).counts
        rec = exact.pnk_row_recursive(m, n).counts
        poly = exact.gen_poly_row(m, n).coefficients
        ok = list(closed) == census.pnk_counts == list(rec) == list(poly)
        return ok, f"row {list(closed)}" if n <= 8 else "row matches"

    results.append(_check("pnk_rows", pnk))

    def moments():
        got = exact.pnk_row_closed(m, n)
        ref = exact.exact_moments(m, n)
        ok = (census.mean_summands, got.variance()) == (ref.mean, ref.variance) and got.mean() == ref.mean
        return ok, f"mean {ref.mean}, variance {ref.variance}"

    results.append(_check("moments", moments))

    def gap_total():
        ok = census.n_gaps_total == exact.total_gaps(m, n)
        ok = ok and census.n_gaps_signed == exact.gap_denominator(m, n)
        return ok, f"{census.n_gaps_total} gaps observed; (mu_n - 1)|I_n| = {census.n_gaps_signed}"

    results.append(_check("gap_totals", gap_total))

    def gap_census():
        if n < 1:
            return True, "no gaps"
        bad = []
        for g in range(1, m * n + 1):
            if census.gap_counts.get(g, 0) != exact.gap_count_finite(m, n, g):
                bad.append(g)
            elif exact.finite_formula_valid(m, n) and (
                oracle.census_gap_probability(census, g, "signed") != exact.gap_prob_finite_formula(m, n, g)
            ):
                bad.append(g)
        note = "" if exact.finite_formula_valid(m, n) else " (closed form undefined here; counts only)"
        return not bad, (f"mismatch at g={bad}" if bad else f"g=1..{m * n}{note}")

    results.append(_check("gap_census", gap_census))

    def joint_pairs():
        pairs = 0
        gmax = m * n
        for g1 in range(1, gmax + 1):
            for g2 in range(1, gmax + 1):
                pairs += sum(oracle.joint_counts(census, g1, g2).values())
        expected = oracle.gap_pair_total(census)
        return pairs == expected, f"{pairs} ordered gap pairs"

    if n <= 6 or deep:
        results.append(_check("joint_gap_pairs", joint_pairs))

    if deep and n >= 3:

        def joint_trend():
            small = oracle.enumerate_all(m, n - 2, max_size=max_size)
            g = m
            target = exact.joint_gap_limit_product(m, g, g)
            e_small = abs(oracle.census_joint_statistic(small, g, g) - target)
            e_big = abs(oracle.census_joint_statistic(census, g, g) - target)
            return e_big < e_small, f"|error| {float(e_small):.5f} -> {float(e_big):.5f} at g1=g2={g}"

        results.append(_check("joint_gap_trend", joint_trend))

        def construction():
            count = m * n + 1
            seq = oracle.construct_sequence(m, count)
            return seq == seqcore.sequence_prefix(m, count), f"{count} terms"

        results.append(_check("greedy_construction", construction))

    return results
