"""Rank correlation, binary association, confidence intervals and ROC-AUC.

Everything here is exact at desk scale: AUC is computed by pairwise
Mann-Whitney counting (via the rank-sum identity, O(n log n)), Spearman is
Pearson on average ranks, and phi comes straight from the 2x2 contingency
table. The functions are pure and safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

ARTIFACT_NAMES = (
    "dark_corner",
    "hair",
    "gel_border",
    "gel_bubble",
    "ruler",
    "ink",
    "patch",
)

CORRELOGRAM_VARIABLES = ARTIFACT_NAMES + ("diagnosis",)


class UndefinedCorrelationError(ValueError):
    """A correlation was requested for a constant (zero-variance) vector."""


class DegenerateMarginError(ValueError):
    """A 2x2 contingency table has an empty row or column."""


class DegenerateCIError(ValueError):
    """The Fisher-z confidence interval is undefined (|rho| = 1 or n < 4)."""


def _average_ranks(x: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties replaced by the mean rank of the tied block."""
    order = np.argsort(x, kind="stable")
    ranks = np.empty(len(x), dtype=np.float64)
    sorted_x = x[order]
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and sorted_x[j + 1] == sorted_x[i]:
            j += 1
        # positions i..j share the value; average of ranks i+1..j+1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> float:
    """Spearman rho: Pearson correlation of average-ranked data."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    if len(x) < 3:
        raise ValueError("spearman needs at least 3 observations")
    rx = _average_ranks(x)
    ry = _average_ranks(y)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    vx = float(dx @ dx)
    vy = float(dy @ dy)
    if vx == 0.0 or vy == 0.0:
        raise UndefinedCorrelationError("constant vector has no rank correlation")
    return float(dx @ dy) / math.sqrt(vx * vy)


def contingency_2x2(x, y) -> tuple[int, int, int, int]:
    """Counts (a, b, c, d) = (x=1,y=1), (x=1,y=0), (x=0,y=1), (x=0,y=0)."""
    x = np.asarray(x).astype(bool)
    y = np.asarray(y).astype(bool)
    if x.shape != y.shape:
        raise ValueError("length mismatch")
    a = int(np.sum(x & y))
    b = int(np.sum(x & ~y))
    c = int(np.sum(~x & y))
    d = int(np.sum(~x & ~y))
    return a, b, c, d


def phi(x, y) -> float:
    """Phi coefficient (ad - bc) / sqrt of the margin product.

    Equals spearman() on the same binary inputs.
    """
    a, b, c, d = contingency_2x2(x, y)
    return phi_from_table(a, b, c, d)


def phi_from_table(a: int, b: int, c: int, d: int) -> float:
    denom = (a + b) * (c + d) * (a + c) * (b + d)
    if denom == 0:
        raise DegenerateMarginError(
            f"degenerate margin in table a={a} b={b} c={c} d={d}"
        )
    return (a * d - b * c) / math.sqrt(denom)


def spearman_ci(rho: float, n: int, z_crit: float = 1.96) -> tuple[float, float]:
    """95% CI for rho via the Fisher z-transform, half-width z/sqrt(n-3)."""
    if n < 4:
        raise DegenerateCIError(f"need n >= 4, got {n}")
    if abs(rho) >= 1.0:
        raise DegenerateCIError("CI undefined at |rho| = 1")
    z = math.atanh(rho)
    half = z_crit / math.sqrt(n - 3)
    return math.tanh(z - half), math.tanh(z + half)


@dataclass
class AucResult:
    value: float
    n_pos: int
    n_neg: int


def auc(scores, labels) -> AucResult:
    """Mann-Whitney AUC: P(score_pos > score_neg), ties counted one half.

    Computed through the rank-sum identity, which is exact: rank sums are
    multiples of 1/2 and therefore representable, so the result is identical
    to brute-force pair counting.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(bool)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be equal-length vectors")
    n_pos = int(labels.sum())
    n_neg = int(len(labels) - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise ValueError("auc needs both classes present")
    ranks = _average_ranks(scores)
    # U = sum of positive ranks - n_pos(n_pos+1)/2 = #(pos>neg) + 0.5 #ties
    u = float(ranks[labels].sum()) - n_pos * (n_pos + 1) / 2.0
    return AucResult(value=u / (n_pos * n_neg), n_pos=n_pos, n_neg=n_neg)


@dataclass
class Correlogram:
    """Pairwise association of the 7 artifact flags and the diagnosis label."""

    variables: tuple[str, ...]
    rho: np.ndarray  # 8x8, symmetric, unit diagonal
    ci_low: np.ndarray
    ci_high: np.ndarray
    ci_omitted: np.ndarray  # bool: CI contains zero or is degenerate
    joint: np.ndarray  # 8x8x4 contingency counts (a, b, c, d)
    n: int = 0
    notes: list = field(default_factory=list)


def correlogram(dataset) -> Correlogram:
    """Assemble the full pairwise correlation matrix over a dataset.

    ``dataset`` is a sequence of objects with ``artifacts`` (7 bools) and
    ``diagnosis`` attributes (see synthgen.Sample).
    """
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    k = len(CORRELOGRAM_VARIABLES)
    cols = np.zeros((k, len(dataset)), dtype=bool)
    for j, s in enumerate(dataset):
        for i in range(7):
            cols[i, j] = bool(s.artifacts[i])
        cols[7, j] = s.diagnosis == "malignant" or s.diagnosis == 1
    n = len(dataset)

    rho = np.eye(k)
    ci_low = np.eye(k)
    ci_high = np.eye(k)
    omitted = np.zeros((k, k), dtype=bool)
    joint = np.zeros((k, k, 4), dtype=np.int64)
    notes: list = []

    for i in range(k):
        for j in range(i + 1, k):
            joint[i, j] = joint[j, i] = contingency_2x2(cols[i], cols[j])
            try:
                r = phi(cols[i], cols[j])
            except DegenerateMarginError:
                rho[i, j] = rho[j, i] = np.nan
                omitted[i, j] = omitted[j, i] = True
                notes.append(f"degenerate pair {CORRELOGRAM_VARIABLES[i]}"
                             f"/{CORRELOGRAM_VARIABLES[j]}")
                continue
            rho[i, j] = rho[j, i] = r
            try:
                lo, hi = spearman_ci(r, n)
            except DegenerateCIError:
                lo = hi = r
                omitted[i, j] = omitted[j, i] = True
            if lo <= 0.0 <= hi:
                omitted[i, j] = omitted[j, i] = True
            ci_low[i, j] = ci_low[j, i] = lo
            ci_high[i, j] = ci_high[j, i] = hi

    return Correlogram(
        variables=CORRELOGRAM_VARIABLES,
        rho=rho,
        ci_low=ci_low,
        ci_high=ci_high,
        ci_omitted=omitted,
        joint=joint,
        n=n,
        notes=notes,
    )


def correlogram_to_text(corr: Correlogram) -> str:
    """Plain-text matrix dump: variables header + rho / ci blocks."""
    lines = ["variables: " + " ".join(corr.variables), f"n: {corr.n}"]
    for name, mat in (
        ("rho", corr.rho),
        ("ci_low", corr.ci_low),
        ("ci_high", corr.ci_high),
    ):
        lines.append(f"[{name}]")
        for row in mat:
            lines.append(" ".join(f"{v: .6f}" for v in row))
    lines.append("[ci_omitted]")
    for row in corr.ci_omitted:
        lines.append(" ".join("1" if v else "0" for v in row))
    return "\n".join(lines) + "\n"
