"""Stage 3: grouped benefit scoring, entropy weights, TOPSIS, shortlists.

All raw metric columns are cost-type (lower is better).  Group 1 captures
peak-hour dispersion and congestion, group 2 off-peak side effects, group 3
all-hour impacts.  Rankings are always by TOPSIS closeness; the fixed-weight
triad and uniform weights are diagnostics only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import spearmanr

from .market.metrics import MetricRecord

EPS = 1e-10
FIXED_WEIGHTS = (0.70, 0.20, 0.10)
UNIFORM_WEIGHTS = (1 / 3, 1 / 3, 1 / 3)
DEFAULT_TOP_K = 20
DEGENERATE_RANGE = 1e-12

# (metric, window) raw columns per group
GROUPS: tuple[tuple[tuple[str, str], ...], ...] = (
    (("p95_p5", "on_peak"), ("congestion_rent", "on_peak"),
     ("binding_hours", "on_peak"), ("lmp_std", "on_peak")),
    (("mean_lmp", "off_peak"), ("binding_hours", "off_peak"),
     ("lmp_std", "off_peak")),
    (("mean_lmp", "all"), ("congestion_rent", "all"), ("lmp_std", "all")),
)
GROUP_NAMES = ("peak_stress", "offpeak_side_effects", "allhour_impact")


@dataclass
class DecisionMatrix:
    """Raw cost columns for one envelope's qualified alternatives."""

    envelope: str
    buses: list[int]
    groups: list[np.ndarray]        # each (R, n_columns_in_group)

    @property
    def n_alternatives(self) -> int:
        return len(self.buses)


def build_decision_matrix(records: list[MetricRecord],
                          envelope: str) -> DecisionMatrix:
    by_key = {(r.bus, r.window): r for r in records if r.envelope == envelope}
    buses = sorted({r.bus for r in records if r.envelope == envelope})
    groups = []
    for cols in GROUPS:
        X = np.empty((len(buses), len(cols)))
        for bi, bus in enumerate(buses):
            for ci, (metric, window) in enumerate(cols):
                X[bi, ci] = by_key[(bus, window)].value(metric)
        if not np.all(np.isfinite(X)):
            raise ValueError(f"non-finite metric in envelope {envelope!r}")
        groups.append(X)
    return DecisionMatrix(envelope=envelope, buses=buses, groups=groups)


def scale_invert(column: np.ndarray) -> np.ndarray:
    """Inverted min-max scaling: the cheapest alternative scores ~1."""
    col = np.asarray(column, dtype=float)
    hi = col.max()
    lo = col.min()
    return (hi - col) / (hi - lo + EPS)


def entropy_weights(benefits: np.ndarray, strict: bool = False
                    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-column (weights, entropies, dispersions) for one group.

    A constant raw column scores benefit 0 everywhere yet the literal
    formulas hand it maximal dispersion; unless `strict`, such
    zero-information columns get weight 0 and are excluded from the
    normalization.
    """
    R, J = benefits.shape
    if R < 2:
        raise ValueError("entropy weights need at least 2 alternatives")
    p = benefits / (benefits.sum(axis=0, keepdims=True) + EPS)
    e = -(1.0 / np.log(R)) * np.sum(p * np.log(p + EPS), axis=0)
    d = 1.0 - e
    include = np.ones(J, dtype=bool)
    if not strict:
        ranges = benefits.max(axis=0) - benefits.min(axis=0)
        include = ranges >= DEGENERATE_RANGE
    d_used = np.where(include, d, 0.0)
    total = d_used.sum()
    if total <= EPS:
        w = np.full(J, 1.0 / J)     # no informative column: fall back to equal
    else:
        w = d_used / total
    return w, e, d


@dataclass
class GroupScores:
    envelope: str
    buses: list[int]
    scores: np.ndarray              # (R, 3) in [0, 1]
    normalized: np.ndarray          # (R, 3), columnwise Euclidean-normalized
    weights: list[np.ndarray]       # per group
    entropies: list[np.ndarray]
    dispersions: list[np.ndarray]


def group_aggregate(matrix: DecisionMatrix,
                    strict_entropy: bool = False) -> GroupScores:
    R = matrix.n_alternatives
    scores = np.zeros((R, len(matrix.groups)))
    weights, entropies, dispersions = [], [], []
    for gi, X in enumerate(matrix.groups):
        benefits = np.column_stack([scale_invert(X[:, j])
                                    for j in range(X.shape[1])])
        if R == 1:
            # singleton universe: no cross-alternative information
            w = np.full(X.shape[1], 1.0 / X.shape[1])
            e = np.ones(X.shape[1])
            d = np.zeros(X.shape[1])
        else:
            w, e, d = entropy_weights(benefits, strict=strict_entropy)
        scores[:, gi] = benefits @ w
        weights.append(w)
        entropies.append(e)
        dispersions.append(d)
    norms = np.sqrt((scores ** 2).sum(axis=0) + EPS)
    return GroupScores(
        envelope=matrix.envelope, buses=list(matrix.buses), scores=scores,
        normalized=scores / norms, weights=weights, entropies=entropies,
        dispersions=dispersions,
    )


def topsis(normalized: np.ndarray) -> np.ndarray:
    """Closeness coefficients over the normalized group-score matrix."""
    g = np.asarray(normalized, dtype=float)
    v_best = g.max(axis=0)
    v_worst = g.min(axis=0)
    s_plus = np.sqrt(((g - v_best) ** 2).sum(axis=1))
    s_minus = np.sqrt(((g - v_worst) ** 2).sum(axis=1))
    denom = s_plus + s_minus
    cc = np.full(len(g), 0.5)       # all-identical convention
    ok = denom > 0
    cc[ok] = s_minus[ok] / denom[ok]
    return cc


def fixed_weight_score(normalized: np.ndarray,
                       weights: tuple[float, ...] = FIXED_WEIGHTS) -> np.ndarray:
    return np.asarray(normalized, dtype=float) @ np.asarray(weights)


@dataclass
class RankingResult:
    envelope: str
    buses: list[int]                    # sorted by rank (best first)
    cc: np.ndarray                      # aligned with buses
    rank: dict[int, int]                # bus -> 1-based rank
    group_scores: dict[int, np.ndarray]
    normalized: dict[int, np.ndarray]
    s_fix: dict[int, float]
    s_uniform: dict[int, float]
    weights: list[np.ndarray]
    shortlist: list[int]                # top-k buses
    diagnostics: dict[str, float] = field(default_factory=dict)


def rank_envelope(matrix: DecisionMatrix, k: int = DEFAULT_TOP_K,
                  strict_entropy: bool = False) -> RankingResult:
    """CC ranking within one envelope plus fixed-weight diagnostics."""
    gs = group_aggregate(matrix, strict_entropy=strict_entropy)
    cc = topsis(gs.normalized)
    sfix = fixed_weight_score(gs.normalized, FIXED_WEIGHTS)
    suni = fixed_weight_score(gs.normalized, UNIFORM_WEIGHTS)

    # order: CC desc, then group-1 score desc, then bus id asc
    order = sorted(range(len(matrix.buses)),
                   key=lambda i: (-cc[i], -gs.scores[i, 0], matrix.buses[i]))
    buses = [matrix.buses[i] for i in order]
    k_eff = min(k, len(buses))
    diagnostics: dict[str, float] = {}
    if len(buses) >= 2:
        rho_fix = spearmanr(cc, sfix).statistic
        rho_uni = spearmanr(cc, suni).statistic
        top_cc = set(buses[:k_eff])
        top_fix = {matrix.buses[i] for i in
                   sorted(range(len(buses)),
                          key=lambda i: (-sfix[i], matrix.buses[i]))[:k_eff]}
        top_uni = {matrix.buses[i] for i in
                   sorted(range(len(buses)),
                          key=lambda i: (-suni[i], matrix.buses[i]))[:k_eff]}
        diagnostics = {
            "spearman_cc_vs_fixed": float(rho_fix),
            "spearman_cc_vs_uniform": float(rho_uni),
            "topk_overlap_cc_fixed": float(len(top_cc & top_fix)),
            "topk_overlap_cc_uniform": float(len(top_cc & top_uni)),
        }

    return RankingResult(
        envelope=matrix.envelope,
        buses=buses,
        cc=cc[order],
        rank={bus: r + 1 for r, bus in enumerate(buses)},
        group_scores={matrix.buses[i]: gs.scores[i] for i in range(len(buses))},
        normalized={matrix.buses[i]: gs.normalized[i] for i in range(len(buses))},
        s_fix={matrix.buses[i]: float(sfix[i]) for i in range(len(buses))},
        s_uniform={matrix.buses[i]: float(suni[i]) for i in range(len(buses))},
        weights=gs.weights,
        shortlist=buses[:k_eff],
        diagnostics=diagnostics,
    )


def shortlist_overlaps(rankings: dict[str, RankingResult]) -> dict[tuple[str, str], int]:
    """Pairwise top-k overlap counts between envelopes."""
    names = sorted(rankings)
    out = {}
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            out[(a, b)] = len(set(rankings[a].shortlist)
                              & set(rankings[b].shortlist))
    return out


def pooled_robust_scores(rankings: dict[str, RankingResult]) -> dict[int, dict[str, float]]:
    """Cross-envelope robustness: min and mean CC per bus over envelopes."""
    per_bus: dict[int, list[float]] = {}
    for res in rankings.values():
        for bus, cc in zip(res.buses, res.cc):
            per_bus.setdefault(bus, []).append(float(cc))
    return {bus: {"min_cc": min(v), "mean_cc": sum(v) / len(v),
                  "n_envelopes": len(v)}
            for bus, v in sorted(per_bus.items())}
