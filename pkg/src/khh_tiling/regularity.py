"""Pair density, eps-regularity and (eps,d)-super-regularity checks.

A pair of vertex subsets (a, b) is eps-regular when every sub-pair (X, Y)
with |X| >= eps|a| and |Y| >= eps|b| has |d(a,b) - d(X,Y)| < eps (strict).
Super-regularity replaces the band with a strict density floor d(X,Y) > d on
the same sub-pairs and adds strict per-vertex degree floors deg(a) > d|b|,
deg(b) > d|a|.

The exact checker exhausts all qualifying sub-pairs, but never literally: for
a fixed X the extreme densities over Y of each size are reached by taking the
B-vertices with the largest (or smallest) edge counts into X, so one sort per
X subset decides all Y at once.  Subsets of A are enumerated as bitmasks with
a doubling table of per-column edge counts.  Side sizes are capped at 16;
beyond that only sampled refutation is offered, drawing X and Y uniformly at
the minimum qualifying sizes (where worst-case deviations live) - a
documented heuristic, never a completeness claim, so sampling can answer
"irregular" or "unknown" but not "regular".

Verdicts at the band boundary are exact: densities are ratios of integers and
the float parameters eps and d are honored as the exact binary rationals they
denote, so a deviation equal to eps is irregular with no rounding ambiguity.
The numpy scan only prefilters with a slack margin; every flagged candidate
is confirmed in integer arithmetic before it becomes a witness.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .graph import BipartiteGraph, VertexRef, bit_indices

__all__ = [
    "RegularityReport",
    "Witness",
    "density",
    "check_regular_exact",
    "refute_regular_sampled",
    "check_super_regular",
    "EXACT_SIDE_LIMIT",
]

EXACT_SIDE_LIMIT = 16

# float slack for the vectorized prefilter; candidates are confirmed exactly
_SLACK = 1e-9


@dataclass(frozen=True)
class Witness:
    """A qualifying sub-pair exhibiting a density violation."""

    x: tuple[int, ...]
    y: tuple[int, ...]
    density: float


@dataclass(frozen=True)
class RegularityReport:
    density: float
    verdict: str  # regular | irregular | unknown
    witness: Witness | None
    mode: str  # exact | sampled
    params: tuple  # (epsilon, d, trials)
    bad_vertex: VertexRef | None = None

    def to_json(self) -> dict:
        return {
            "density": self.density,
            "verdict": self.verdict,
            "witness": None
            if self.witness is None
            else {
                "x": list(self.witness.x),
                "y": list(self.witness.y),
                "density": self.witness.density,
            },
            "mode": self.mode,
            "params": {
                "epsilon": self.params[0],
                "d": self.params[1],
                "trials": self.params[2],
            },
            "bad_vertex": None
            if self.bad_vertex is None
            else {"side": self.bad_vertex.side, "index": self.bad_vertex.index},
        }


def _check_subsets(g: BipartiteGraph, a, b) -> tuple[list[int], list[int]]:
    a_list = sorted(set(a))
    b_list = sorted(set(b))
    if not a_list or not b_list:
        raise ValueError("subsets must be nonempty")
    if a_list[0] < 0 or a_list[-1] >= g.n_a:
        raise ValueError(f"A-subset out of range for side of size {g.n_a}")
    if b_list[0] < 0 or b_list[-1] >= g.n_b:
        raise ValueError(f"B-subset out of range for side of size {g.n_b}")
    return a_list, b_list


def _mask_of(indices) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def _edges_between(g: BipartiteGraph, a_list, b_mask: int) -> int:
    return sum((g.adj[a] & b_mask).bit_count() for a in a_list)


def density(g: BipartiteGraph, x, y) -> float:
    """d(x, y) = e(x, y) / (|x| |y|)."""
    x_list, y_list = _check_subsets(g, x, y)
    e = _edges_between(g, x_list, _mask_of(y_list))
    return e / (len(x_list) * len(y_list))


def _min_qualifying(eps: float, size: int) -> int:
    # smallest integer >= eps * size, at least 1 (density needs nonempty sets)
    return max(1, math.ceil(eps * size - 1e-12))


def _column_counts(g: BipartiteGraph, a_list, b_list) -> np.ndarray:
    """counts[X][j] = e(X, b_list[j]) for every bitmask-indexed X subset."""
    nb = len(b_list)
    counts = np.zeros((1, nb), dtype=np.int32)
    for av in a_list:
        row = np.fromiter(
            ((g.adj[av] >> bv) & 1 for bv in b_list), dtype=np.int32, count=nb
        )
        counts = np.vstack([counts, counts + row])
    return counts


def _scan_extremes(g, a_list, b_list, m_a, m_b, lo: Fraction | None, hi: Fraction | None):
    """Find a qualifying (X, Y) with density <= lo or >= hi (exact compares).

    A float pass over all (X, |Y|) shapes flags near-boundary candidates with
    slack; each candidate is then confirmed in integer arithmetic.  Returns a
    Witness or None.
    """
    na, nb = len(a_list), len(b_list)
    counts = _column_counts(g, a_list, b_list)
    sizes = np.zeros(1 << na, dtype=np.int32)
    for i in range(na):
        sizes[1 << i : 2 << i] = sizes[: 1 << i] + 1
    qual = np.nonzero(sizes >= m_a)[0]
    sub = np.sort(counts[qual], axis=1)
    pref = np.zeros((len(qual), nb + 1), dtype=np.int64)
    np.cumsum(sub, axis=1, out=pref[:, 1:])
    tot = pref[:, nb]
    sz = sizes[qual].astype(np.float64)
    lo_f = -math.inf if lo is None else float(lo) + _SLACK
    hi_f = math.inf if hi is None else float(hi) - _SLACK
    for k in range(m_b, nb + 1):
        denom = sz * k
        min_d = pref[:, k] / denom
        max_d = (tot - pref[:, nb - k]) / denom
        for ci in np.nonzero((min_d <= lo_f) | (max_d >= hi_f))[0]:
            xi = int(qual[ci])
            row = sorted(int(v) for v in counts[xi])
            sx = int(sizes[xi])
            e_min = sum(row[:k])
            e_max = sum(row[nb - k :])
            if lo is not None and Fraction(e_min, sx * k) <= lo:
                return _build_witness(a_list, b_list, counts[xi], xi, k, low=True)
            if hi is not None and Fraction(e_max, sx * k) >= hi:
                return _build_witness(a_list, b_list, counts[xi], xi, k, low=False)
    return None


def _build_witness(a_list, b_list, count_row, xi, k, low: bool) -> Witness:
    x = tuple(a_list[i] for i in bit_indices(xi))
    order = sorted(range(len(b_list)), key=lambda j: (int(count_row[j]), j))
    pick = order[:k] if low else order[-k:]
    e = sum(int(count_row[j]) for j in pick)
    y = tuple(sorted(b_list[j] for j in pick))
    return Witness(x, y, e / (len(x) * k))


def check_regular_exact(g: BipartiteGraph, a, b, epsilon: float) -> RegularityReport:
    """Exact eps-regularity verdict by exhausting all qualifying sub-pairs.

    Side sizes are limited to EXACT_SIDE_LIMIT; larger pairs must use
    refute_regular_sampled.
    """
    a_list, b_list = _check_subsets(g, a, b)
    if len(a_list) > EXACT_SIDE_LIMIT or len(b_list) > EXACT_SIDE_LIMIT:
        raise ValueError(
            f"exact mode handles at most {EXACT_SIDE_LIMIT} vertices per side; "
            "use refute_regular_sampled for larger pairs"
        )
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must be in (0, 1], got {epsilon}")
    e_all = _edges_between(g, a_list, _mask_of(b_list))
    d_frac = Fraction(e_all, len(a_list) * len(b_list))
    eps_frac = Fraction(epsilon)
    m_a = _min_qualifying(epsilon, len(a_list))
    m_b = _min_qualifying(epsilon, len(b_list))
    wit = _scan_extremes(
        g, a_list, b_list, m_a, m_b, d_frac - eps_frac, d_frac + eps_frac
    )
    verdict = "regular" if wit is None else "irregular"
    return RegularityReport(
        float(d_frac), verdict, wit, "exact", (epsilon, None, None)
    )


def refute_regular_sampled(
    g: BipartiteGraph, a, b, epsilon: float, trials: int, seed: int = 0
) -> RegularityReport:
    """Sampled refutation: irregular with a witness, or unknown; never regular."""
    a_list, b_list = _check_subsets(g, a, b)
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must be in (0, 1], got {epsilon}")
    e_all = _edges_between(g, a_list, _mask_of(b_list))
    d_frac = Fraction(e_all, len(a_list) * len(b_list))
    eps_frac = Fraction(epsilon)
    m_a = _min_qualifying(epsilon, len(a_list))
    m_b = _min_qualifying(epsilon, len(b_list))
    rng = random.Random(seed)
    params = (epsilon, None, trials)
    for _ in range(trials):
        x = rng.sample(a_list, m_a)
        y = rng.sample(b_list, m_b)
        e = _edges_between(g, x, _mask_of(y))
        d_xy = Fraction(e, m_a * m_b)
        if abs(d_frac - d_xy) >= eps_frac:
            wit = Witness(tuple(sorted(x)), tuple(sorted(y)), float(d_xy))
            return RegularityReport(
                float(d_frac), "irregular", wit, "sampled", params
            )
    return RegularityReport(float(d_frac), "unknown", None, "sampled", params)


def check_super_regular(
    g: BipartiteGraph,
    a,
    b,
    epsilon: float,
    d: float,
    mode: str = "exact",
    trials: int = 1000,
    seed: int = 0,
) -> RegularityReport:
    """(eps,d)-super-regularity: strict degree floors (always exact) plus the
    strict sub-density floor d(X,Y) > d (exact or sampled per mode)."""
    a_list, b_list = _check_subsets(g, a, b)
    if mode not in ("exact", "sampled"):
        raise ValueError(f"mode must be 'exact' or 'sampled', got {mode!r}")
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must be in (0, 1], got {epsilon}")
    if not 0.0 <= d <= 1.0:
        raise ValueError(f"d must be in [0, 1], got {d}")
    e_all = _edges_between(g, a_list, _mask_of(b_list))
    d_base = e_all / (len(a_list) * len(b_list))
    d_frac = Fraction(d)
    params = (epsilon, d, trials if mode == "sampled" else None)
    a_mask = _mask_of(a_list)
    b_mask = _mask_of(b_list)
    for av in a_list:
        if not (g.adj[av] & b_mask).bit_count() > d_frac * len(b_list):
            return RegularityReport(
                d_base, "irregular", None, mode, params, VertexRef("A", av)
            )
    for bv in b_list:
        if not (g.rev_adj[bv] & a_mask).bit_count() > d_frac * len(a_list):
            return RegularityReport(
                d_base, "irregular", None, mode, params, VertexRef("B", bv)
            )
    m_a = _min_qualifying(epsilon, len(a_list))
    m_b = _min_qualifying(epsilon, len(b_list))
    if mode == "exact":
        if len(a_list) > EXACT_SIDE_LIMIT or len(b_list) > EXACT_SIDE_LIMIT:
            raise ValueError(
                f"exact mode handles at most {EXACT_SIDE_LIMIT} vertices per side; "
                "use sampled mode for larger pairs"
            )
        wit = _scan_extremes(g, a_list, b_list, m_a, m_b, d_frac, None)
        verdict = "regular" if wit is None else "irregular"
        return RegularityReport(d_base, verdict, wit, "exact", params)
    rng = random.Random(seed)
    for _ in range(trials):
        x = rng.sample(a_list, m_a)
        y = rng.sample(b_list, m_b)
        e = _edges_between(g, x, _mask_of(y))
        if Fraction(e, m_a * m_b) <= d_frac:
            wit = Witness(tuple(sorted(x)), tuple(sorted(y)), e / (m_a * m_b))
            return RegularityReport(d_base, "irregular", wit, "sampled", params)
    return RegularityReport(d_base, "unknown", None, "sampled", params)
