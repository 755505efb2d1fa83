"""Rank-based significance tests for comparing bias scores.

Both tests handle ties through midranks and switch between an exact null
distribution and a normal approximation by sample size:

* Wilcoxon signed-rank (paired): exact when at most ``EXACT_SIGNED_LIMIT``
  non-zero differences remain, else a normal approximation with the
  tie-adjusted variance ``sum(r_i^2)/4`` and a 0.5 continuity correction.
* Rank-sum / Mann-Whitney (independent groups): exact when the combined
  sample size is at most ``EXACT_RANKSUM_LIMIT``, else a normal
  approximation with the standard tie correction.

Exact p-values are computed by dynamic programming over doubled ranks
(midranks are half-integers, so doubling makes every rank an integer and
the distribution a table of exact integer counts).  The DP is equivalent to
enumerating all sign assignments (or group assignments) without the
exponential walk; the test suite checks it against literal enumeration on
small inputs.  All exact arithmetic runs in integers and fractions and is
converted to float only at the end.

Two-sided p-values are twice the smaller one-sided tail, capped at 1.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, TextIO

from .errors import ConfoundQuantError

EXACT_SIGNED_LIMIT = 25
EXACT_RANKSUM_LIMIT = 20


class StatsError(ConfoundQuantError):
    pass


@dataclass(frozen=True)
class PairedSample:
    x: tuple[float, ...]
    y: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.x) != len(self.y):
            raise StatsError(
                f"paired sample lengths differ: {len(self.x)} vs {len(self.y)}"
            )
        if not self.x:
            raise StatsError("paired sample is empty")

    @property
    def differences(self) -> tuple[float, ...]:
        return tuple(a - b for a, b in zip(self.x, self.y))


@dataclass(frozen=True)
class WilcoxonResult:
    n_total: int
    n_used: int
    n_zero: int
    w_plus: float
    w_minus: float
    statistic: float
    p_value: float
    method: str

    def as_dict(self) -> dict:
        return {
            "n_total": self.n_total,
            "n_used": self.n_used,
            "n_zero": self.n_zero,
            "w_plus": self.w_plus,
            "w_minus": self.w_minus,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "method": self.method,
        }


@dataclass(frozen=True)
class RankSumResult:
    n_a: int
    n_b: int
    u_a: float
    u_b: float
    statistic: float
    p_value: float
    method: str

    def as_dict(self) -> dict:
        return {
            "n_a": self.n_a,
            "n_b": self.n_b,
            "u_a": self.u_a,
            "u_b": self.u_b,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "method": self.method,
        }


def _doubled_midranks(values: Sequence[float]) -> list[int]:
    """Twice the midrank of each value, as exact integers.

    A tie group occupying 1-based positions lo..hi has midrank (lo+hi)/2,
    so its doubled rank is lo+hi.
    """
    order = sorted(range(len(values)), key=lambda i: values[i])
    doubled = [0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        for k in range(i, j + 1):
            doubled[order[k]] = (i + 1) + (j + 1)
        i = j + 1
    return doubled


def _signed_rank_counts(doubled: Sequence[int]) -> list[int]:
    """counts[s] = number of sign vectors whose doubled positive-rank sum is s."""
    total = sum(doubled)
    counts = [0] * (total + 1)
    counts[0] = 1
    for r in doubled:
        nxt = counts.copy()
        for s in range(total - r + 1):
            if counts[s]:
                nxt[s + r] += counts[s]
        counts = nxt
    return counts


def _two_sided_p(counts: Sequence[int], observed: int, denominator: int) -> float:
    lower = sum(counts[: observed + 1])
    upper = sum(counts[observed:])
    p = 2 * Fraction(min(lower, upper), denominator)
    return float(min(p, Fraction(1)))


def _normal_two_sided(stat: float, mean: float, sigma: float) -> float:
    if sigma == 0.0:
        return 1.0
    # 0.5 continuity correction toward the mean
    if stat > mean:
        z = (stat - mean - 0.5) / sigma
    elif stat < mean:
        z = (stat - mean + 0.5) / sigma
    else:
        return 1.0
    return min(1.0, math.erfc(abs(z) / math.sqrt(2.0)))


def wilcoxon_signed_rank(
    x: Sequence[float],
    y: Sequence[float] | None = None,
    *,
    exact_limit: int = EXACT_SIGNED_LIMIT,
) -> WilcoxonResult:
    """Two-sided Wilcoxon signed-rank test.

    With ``y`` given the test runs on the pairwise differences ``x - y``;
    without it, ``x`` is taken to be the differences directly.  Zero
    differences are dropped before ranking.
    """
    if y is not None:
        diffs = PairedSample(tuple(x), tuple(y)).differences
    else:
        diffs = tuple(float(v) for v in x)
        if not diffs:
            raise StatsError("no differences given")
    nonzero = [d for d in diffs if d != 0.0]
    n_zero = len(diffs) - len(nonzero)
    if not nonzero:
        raise StatsError("all differences are zero")

    doubled = _doubled_midranks([abs(d) for d in nonzero])
    w2_plus = sum(r for d, r in zip(nonzero, doubled) if d > 0)
    w2_minus = sum(r for d, r in zip(nonzero, doubled) if d < 0)
    n = len(nonzero)
    assert w2_plus + w2_minus == n * (n + 1)
    w_plus = w2_plus / 2.0
    w_minus = w2_minus / 2.0

    if n <= exact_limit:
        counts = _signed_rank_counts(doubled)
        p = _two_sided_p(counts, w2_plus, 2 ** n)
        method = "exact"
    else:
        mean = n * (n + 1) / 4.0
        sigma = math.sqrt(sum((r / 2.0) ** 2 for r in doubled) / 4.0)
        p = _normal_two_sided(w_plus, mean, sigma)
        method = "normal-approximation"
    return WilcoxonResult(
        n_total=len(diffs),
        n_used=n,
        n_zero=n_zero,
        w_plus=w_plus,
        w_minus=w_minus,
        statistic=min(w_plus, w_minus),
        p_value=p,
        method=method,
    )


def _ranksum_counts(doubled: Sequence[int], k: int) -> list[int]:
    """counts[s] = number of k-subsets of the doubled ranks summing to s."""
    total = sum(doubled)
    table = [[0] * (total + 1) for _ in range(k + 1)]
    table[0][0] = 1
    for r in doubled:
        for kk in range(min(k, len(doubled)), 0, -1):
            row = table[kk]
            prev = table[kk - 1]
            for s in range(total - r, -1, -1):
                if prev[s]:
                    row[s + r] += prev[s]
    return table[k]


def rank_sum_test(
    a: Sequence[float],
    b: Sequence[float],
    *,
    exact_limit: int = EXACT_RANKSUM_LIMIT,
) -> RankSumResult:
    """Two-sided rank-sum (Mann-Whitney) test for two independent groups."""
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    if not a or not b:
        raise StatsError("both groups must be non-empty")
    n_a, n_b = len(a), len(b)
    n = n_a + n_b
    doubled = _doubled_midranks(a + b)
    r2_a = sum(doubled[:n_a])
    u_a = r2_a / 2.0 - n_a * (n_a + 1) / 2.0
    u_b = n_a * n_b - u_a

    if n <= exact_limit:
        counts = _ranksum_counts(doubled, n_a)
        p = _two_sided_p(counts, r2_a, math.comb(n, n_a))
        method = "exact"
    else:
        mean = n_a * n_b / 2.0
        tie_term = 0.0
        seen: dict[int, int] = {}
        for r in doubled:
            seen[r] = seen.get(r, 0) + 1
        for t in seen.values():
            tie_term += t ** 3 - t
        sigma_sq = n_a * n_b / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
        sigma = math.sqrt(max(sigma_sq, 0.0))
        p = _normal_two_sided(u_a, mean, sigma)
        method = "normal-approximation"
    return RankSumResult(
        n_a=n_a,
        n_b=n_b,
        u_a=u_a,
        u_b=u_b,
        statistic=min(u_a, u_b),
        p_value=p,
        method=method,
    )


@dataclass(frozen=True)
class GroupComparison:
    """Bias scores of single-movement artists vs multi-movement artists."""

    n_single: int
    n_multi: int
    mean_single: float
    mean_multi: float
    difference: float
    test: RankSumResult
    alpha: float
    significant: bool

    def as_dict(self) -> dict:
        return {
            "n_single": self.n_single,
            "n_multi": self.n_multi,
            "mean_single": self.mean_single,
            "mean_multi": self.mean_multi,
            "difference": self.difference,
            "test": self.test.as_dict(),
            "alpha": self.alpha,
            "significant": self.significant,
        }


def compare_movement_groups(
    single_scores: Sequence[float],
    multi_scores: Sequence[float],
    *,
    alpha: float = 0.05,
) -> GroupComparison:
    """Rank-sum comparison of the two groups' bias scores."""
    if not 0.0 < alpha < 1.0:
        raise StatsError(f"alpha must be in (0, 1), got {alpha}")
    test = rank_sum_test(single_scores, multi_scores)
    mean_single = sum(single_scores) / len(single_scores)
    mean_multi = sum(multi_scores) / len(multi_scores)
    return GroupComparison(
        n_single=len(single_scores),
        n_multi=len(multi_scores),
        mean_single=mean_single,
        mean_multi=mean_multi,
        difference=mean_multi - mean_single,
        test=test,
        alpha=alpha,
        significant=test.p_value < alpha,
    )


# ---------------------------------------------------------------------------
# CSV input
# ---------------------------------------------------------------------------


def _parse_float(token: str, where: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise StatsError(f"{where}: not a number: {token!r}") from None


def read_paired_csv(source: TextIO | Iterable[str]) -> PairedSample:
    """Two numeric columns per row; a non-numeric first row is a header."""
    xs: list[float] = []
    ys: list[float] = []
    for lineno, row in enumerate(csv.reader(source), start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) < 2:
            raise StatsError(f"line {lineno}: expected two columns")
        if lineno == 1 and not xs:
            try:
                float(row[0]), float(row[1])
            except ValueError:
                continue  # header row
        xs.append(_parse_float(row[0], f"line {lineno}"))
        ys.append(_parse_float(row[1], f"line {lineno}"))
    if not xs:
        raise StatsError("no data rows")
    return PairedSample(tuple(xs), tuple(ys))


def read_grouped_csv(source: TextIO | Iterable[str]) -> dict[str, list[float]]:
    """Rows of ``label,value``; a non-numeric-value first row is a header."""
    groups: dict[str, list[float]] = {}
    saw_data = False
    for lineno, row in enumerate(csv.reader(source), start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) < 2:
            raise StatsError(f"line {lineno}: expected label and value columns")
        if lineno == 1 and not saw_data:
            try:
                float(row[1])
            except ValueError:
                continue  # header row
        label = row[0].strip()
        if not label:
            raise StatsError(f"line {lineno}: empty group label")
        groups.setdefault(label, []).append(_parse_float(row[1], f"line {lineno}"))
        saw_data = True
    if not groups:
        raise StatsError("no data rows")
    return groups
