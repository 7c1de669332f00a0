"""Inferential procedures: exact binomial asymmetry tests with Clopper-Pearson
intervals and BH-FDR adjustment, plus contingency analysis (Pearson chi-square,
Cramér's V, adjusted standardized residuals, pairwise subtable batteries).

Everything here is implemented from first principles on purpose: the numbers
these functions emit are the product's headline results, and the test suite
checks them against independent references. No statistics library is imported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from trdsent.errors import (
    DegenerateMargin,
    EmptyGroup,
    EmptyNonNeutral,
    InvalidP,
)

# --- exact binomial test ---------------------------------------------------------


def binomial_p_exact(x: int, n: int) -> float:
    """Two-sided exact p under Binomial(n, 1/2), minimum-likelihood convention.

    Sums P(k) over every k whose likelihood does not exceed P(x). With p0=0.5
    the pmf ratio reduces to integer binomial coefficients, so the comparison
    and the sum are exact. For p0=0.5 this equals doubling the smaller tail,
    capped at 1.
    """
    if n < 0 or not 0 <= x <= n:
        raise ValueError(f"need 0 <= x <= n, got x={x}, n={n}")
    threshold = math.comb(n, x)
    total = 0
    for k in range(n + 1):
        c = math.comb(n, k)
        if c <= threshold:
            total += c
    return float(Fraction(total, 1 << n))


def _log_pmf_terms(n: int) -> list[float]:
    lg_n1 = math.lgamma(n + 1)
    return [lg_n1 - math.lgamma(k + 1) - math.lgamma(n - k + 1) for k in range(n + 1)]


def _tail_ge(log_binom: list[float], n: int, x: int, p: float) -> float:
    """P(X >= x | n, p), stable log-space summation."""
    if p <= 0.0:
        return 1.0 if x <= 0 else 0.0
    if p >= 1.0:
        return 1.0
    lp, lq = math.log(p), math.log1p(-p)
    logs = [log_binom[k] + k * lp + (n - k) * lq for k in range(x, n + 1)]
    m = max(logs)
    return math.exp(m) * sum(math.exp(v - m) for v in logs) if m > -math.inf else 0.0


def _tail_le(log_binom: list[float], n: int, x: int, p: float) -> float:
    """P(X <= x | n, p)."""
    if p <= 0.0:
        return 1.0
    if p >= 1.0:
        return 1.0 if x >= n else 0.0
    lp, lq = math.log(p), math.log1p(-p)
    logs = [log_binom[k] + k * lp + (n - k) * lq for k in range(0, x + 1)]
    m = max(logs)
    return math.exp(m) * sum(math.exp(v - m) for v in logs)


def clopper_pearson(x: int, n: int, level: float = 0.95) -> tuple[float, float]:
    """Exact binomial confidence interval by tail inversion (bisection).

    Endpoint cases are closed-form: x=0 pins the lower bound at 0, x=n pins
    the upper bound at 1.
    """
    if not (0 <= x <= n) or n < 1:
        raise ValueError(f"need 0 <= x <= n with n >= 1, got x={x}, n={n}")
    if not (0.0 < level < 1.0):
        raise ValueError(f"level must be in (0,1), got {level}")
    alpha2 = (1.0 - level) / 2.0
    log_binom = _log_pmf_terms(n)

    if x == 0:
        lower = 0.0
    else:
        lo, hi = 0.0, 1.0
        # P(X >= x | p) increases in p; find p with tail = alpha2
        while hi - lo > 1e-12:
            mid = (lo + hi) / 2.0
            if _tail_ge(log_binom, n, x, mid) < alpha2:
                lo = mid
            else:
                hi = mid
        lower = (lo + hi) / 2.0

    if x == n:
        upper = 1.0
    else:
        lo, hi = 0.0, 1.0
        # P(X <= x | p) decreases in p
        while hi - lo > 1e-12:
            mid = (lo + hi) / 2.0
            if _tail_le(log_binom, n, x, mid) > alpha2:
                lo = mid
            else:
                hi = mid
        upper = (lo + hi) / 2.0

    return lower, upper


@dataclass(frozen=True)
class BinomialTestResult:
    entity: str
    x: int  # positive count
    y: int  # negative count
    n: int
    p_hat: float
    ci: tuple[float, float]
    p_raw: float
    p_fdr: Optional[float] = None  # filled by the battery


def binomial_test(x: int, y: int, entity: str = "", level: float = 0.95) -> BinomialTestResult:
    """Exact two-sided test of H0: P(positive | non-neutral) = 0.5."""
    if x < 0 or y < 0:
        raise ValueError(f"counts must be nonnegative, got ({x}, {y})")
    n = x + y
    if n == 0:
        raise EmptyNonNeutral()
    return BinomialTestResult(
        entity=entity,
        x=x,
        y=y,
        n=n,
        p_hat=x / n,
        ci=clopper_pearson(x, n, level),
        p_raw=binomial_p_exact(x, n),
    )


# --- multiple testing ---------------------------------------------------------------


def bh_fdr(p_values: Sequence[float]) -> list[float]:
    """Benjamini-Hochberg step-up adjusted p-values, returned in input order.

    adjusted_i = min over j >= i (sorted order) of p_j * m / (j+1), capped at 1.
    """
    m = len(p_values)
    for p in p_values:
        if not isinstance(p, (int, float)) or isinstance(p, bool) or not (0.0 <= p <= 1.0) or math.isnan(p):
            raise InvalidP(p)
    if m == 0:
        return []
    order = sorted(range(m), key=lambda i: p_values[i])
    adjusted_sorted = [0.0] * m
    running = 1.0
    for j in range(m - 1, -1, -1):
        value = p_values[order[j]] * m / (j + 1)
        running = min(running, value)
        # p * m / m can round one ulp below p; the exact-arithmetic invariant
        # adjusted >= raw is part of the contract, so pin it explicitly.
        adjusted_sorted[j] = min(max(running, p_values[order[j]]), 1.0)
    out = [0.0] * m
    for j, idx in enumerate(order):
        out[idx] = adjusted_sorted[j]
    return out


@dataclass(frozen=True)
class AsymmetryBattery:
    results: tuple[BinomialTestResult, ...]  # sorted by (p_fdr, entity)
    ineligible: tuple[str, ...]  # entities with zero non-neutral mentions


def battery_from_counts(counts: Mapping[str, tuple[int, int]], level: float = 0.95) -> AsymmetryBattery:
    """One exact test per entity with x+y >= 1; single FDR family per call."""
    eligible = sorted(name for name, (x, y) in counts.items() if x + y >= 1)
    ineligible = tuple(sorted(name for name, (x, y) in counts.items() if x + y == 0))
    tests = [binomial_test(counts[name][0], counts[name][1], entity=name, level=level) for name in eligible]
    adjusted = bh_fdr([t.p_raw for t in tests])
    results = [replace(t, p_fdr=adj) for t, adj in zip(tests, adjusted)]
    results.sort(key=lambda r: (r.p_fdr, r.entity))
    return AsymmetryBattery(results=tuple(results), ineligible=ineligible)


def run_asymmetry_battery(
    entity_of_mention: Mapping[str, str],  # mention_id -> generic_name
    labels: Mapping[str, str],  # mention_id -> label value
    level: float = 0.95,
) -> AsymmetryBattery:
    """Counts (positive, negative) per entity from labeled mentions, then tests."""
    counts: dict[str, list[int]] = {}
    for mention_id, entity in entity_of_mention.items():
        counts.setdefault(entity, [0, 0])
        label = labels.get(mention_id)
        if label == "Positive":
            counts[entity][0] += 1
        elif label == "Negative":
            counts[entity][1] += 1
    return battery_from_counts({k: (v[0], v[1]) for k, v in counts.items()}, level=level)


# --- regularized incomplete gamma (for chi-square tails) ------------------------------

_GAMMA_EPS = 1e-16
_GAMMA_MAX_ITER = 10000


def _gamma_p_series(s: float, x: float) -> float:
    """Lower regularized P(s,x) by power series; good for x < s+1."""
    term = 1.0 / s
    total = term
    k = s
    for _ in range(_GAMMA_MAX_ITER):
        k += 1.0
        term *= x / k
        total += term
        if abs(term) < abs(total) * _GAMMA_EPS:
            break
    return total * math.exp(-x + s * math.log(x) - math.lgamma(s))


def _gamma_q_contfrac(s: float, x: float) -> float:
    """Upper regularized Q(s,x) by Lentz continued fraction; good for x >= s+1."""
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_MAX_ITER + 1):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_EPS:
            break
    return h * math.exp(-x + s * math.log(x) - math.lgamma(s))


def regularized_gamma_q(s: float, x: float) -> float:
    """Upper regularized incomplete gamma Q(s, x) = Γ(s,x)/Γ(s)."""
    if s <= 0.0:
        raise ValueError(f"shape must be positive, got {s}")
    if x < 0.0:
        raise ValueError(f"x must be nonnegative, got {x}")
    if x == 0.0:
        return 1.0
    if x < s + 1.0:
        return 1.0 - _gamma_p_series(s, x)
    return _gamma_q_contfrac(s, x)


def chi2_sf(chi2: float, df: int) -> float:
    """Chi-square upper-tail probability."""
    if df < 1:
        raise ValueError(f"df must be >= 1, got {df}")
    if chi2 <= 0.0:
        return 1.0
    return regularized_gamma_q(df / 2.0, chi2 / 2.0)


# --- contingency analysis ---------------------------------------------------------------

Table = Sequence[Sequence[int]]


def _check_table(table: Table) -> tuple[list[list[float]], list[float], list[float], float]:
    r = len(table)
    if r < 2:
        raise ValueError("table needs at least 2 rows")
    c = len(table[0])
    if c < 2:
        raise ValueError("table needs at least 2 columns")
    cells = []
    for row in table:
        if len(row) != c:
            raise ValueError("ragged table")
        for v in row:
            if v < 0:
                raise ValueError(f"negative cell {v}")
        cells.append([float(v) for v in row])
    row_sums = [sum(row) for row in cells]
    col_sums = [sum(cells[i][j] for i in range(r)) for j in range(c)]
    for i, rs in enumerate(row_sums):
        if rs == 0:
            raise DegenerateMargin("row", i)
    for j, cs in enumerate(col_sums):
        if cs == 0:
            raise DegenerateMargin("col", j)
    return cells, row_sums, col_sums, sum(row_sums)


@dataclass(frozen=True)
class ContingencyResult:
    table: tuple[tuple[int, ...], ...]
    chi2: float
    df: int
    p: float
    cramers_v: Optional[float] = None
    residuals: Optional[tuple[tuple[float, ...], ...]] = None


def chi_square(table: Table) -> ContingencyResult:
    """Pearson chi-square test of independence on an r x c count table."""
    cells, row_sums, col_sums, n = _check_table(table)
    r, c = len(cells), len(cells[0])
    chi2 = 0.0
    for i in range(r):
        for j in range(c):
            expected = row_sums[i] * col_sums[j] / n
            diff = cells[i][j] - expected
            chi2 += diff * diff / expected
    df = (r - 1) * (c - 1)
    return ContingencyResult(
        table=tuple(tuple(int(v) for v in row) for row in table),
        chi2=chi2,
        df=df,
        p=chi2_sf(chi2, df),
    )


def cramers_v(chi2: float, n: int, r: int, c: int) -> float:
    """V = sqrt(chi2 / (n * (min(r,c) - 1)))."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if min(r, c) < 2:
        raise ValueError("need at least a 2x2 table shape")
    if chi2 < 0:
        raise ValueError(f"chi2 must be nonnegative, got {chi2}")
    bound = n * (min(r, c) - 1)
    v = math.sqrt(chi2 / bound)
    if v > 1.0 + 1e-9:
        raise ValueError(f"chi2={chi2} exceeds n*(min(r,c)-1)={bound}; inconsistent inputs")
    return min(v, 1.0)


def standardized_residuals(table: Table) -> tuple[tuple[float, ...], ...]:
    """Adjusted standardized residuals (O-E)/sqrt(E(1-row/n)(1-col/n)).

    Approximately N(0,1) under independence, so |r| > 2 localizes the cells
    driving a significant chi-square.
    """
    cells, row_sums, col_sums, n = _check_table(table)
    r, c = len(cells), len(cells[0])
    out = []
    for i in range(r):
        row = []
        for j in range(c):
            expected = row_sums[i] * col_sums[j] / n
            denom = math.sqrt(expected * (1.0 - row_sums[i] / n) * (1.0 - col_sums[j] / n))
            row.append((cells[i][j] - expected) / denom)
        out.append(tuple(row))
    return tuple(out)


def analyze_contingency(table: Table) -> ContingencyResult:
    """chi-square + effect size + residuals in one result."""
    base = chi_square(table)
    n = sum(sum(row) for row in table)
    r, c = len(table), len(table[0])
    return replace(
        base,
        cramers_v=cramers_v(base.chi2, n, r, c),
        residuals=standardized_residuals(table),
    )


@dataclass(frozen=True)
class PairwiseResult:
    class_a: str
    class_b: str
    chi2: Optional[float]
    df: int
    p_raw: Optional[float]
    p_fdr: Optional[float]
    tested: bool


def pairwise_class_tests(table: Table, class_names: Sequence[str]) -> list[PairwiseResult]:
    """Chi-square on every 2 x c class-pair subtable, one FDR family for all pairs.

    Pairs whose subtable has an all-zero margin are reported untested and
    stay outside the FDR family.
    """
    k = len(table)
    if k < 2:
        raise ValueError("need at least 2 classes")
    if len(class_names) != k:
        raise ValueError("class_names must match table rows")
    results: list[dict] = []
    for i in range(k):
        for j in range(i + 1, k):
            sub = [list(table[i]), list(table[j])]
            try:
                res = chi_square(sub)
                results.append(
                    {"a": class_names[i], "b": class_names[j], "chi2": res.chi2, "df": res.df, "p": res.p}
                )
            except DegenerateMargin:
                results.append({"a": class_names[i], "b": class_names[j], "chi2": None, "df": 0, "p": None})
    tested_idx = [t for t, row in enumerate(results) if row["p"] is not None]
    adjusted = bh_fdr([results[t]["p"] for t in tested_idx])
    fdr_of = dict(zip(tested_idx, adjusted))
    return [
        PairwiseResult(
            class_a=row["a"],
            class_b=row["b"],
            chi2=row["chi2"],
            df=row["df"],
            p_raw=row["p"],
            p_fdr=fdr_of.get(t),
            tested=row["p"] is not None,
        )
        for t, row in enumerate(results)
    ]


# --- descriptive profiles --------------------------------------------------------------


@dataclass(frozen=True)
class SentimentProfile:
    counts: Mapping[str, int]  # label value -> count, canonical key order
    proportions: Mapping[str, float]  # sums to 1.0

    @property
    def total(self) -> int:
        return sum(self.counts.values())


_LABEL_VALUES = ("Negative", "Neutral", "Positive")


def sentiment_profile(rows: Sequence[tuple[str, str]]) -> dict[str, SentimentProfile]:
    """Per-group label counts and proportions from (group, label) pairs."""
    if not rows:
        raise EmptyGroup("no labeled mentions supplied")
    grouped: dict[str, dict[str, int]] = {}
    for group, label in rows:
        if label not in _LABEL_VALUES:
            raise ValueError(f"unknown label {label!r}")
        grouped.setdefault(group, {v: 0 for v in _LABEL_VALUES})[label] += 1
    out: dict[str, SentimentProfile] = {}
    for group in sorted(grouped):
        counts = grouped[group]
        total = sum(counts.values())
        out[group] = SentimentProfile(
            counts=dict(counts),
            proportions={v: counts[v] / total for v in _LABEL_VALUES},
        )
    return out
