"""K_{h,h} copy enumeration, exact perfect-tiling decision, partial-tiling
construction, Hall deficiency, and the small-subgraph counts used by
first-moment estimates.

Perfect tilings are decided exactly.  For h = 1 the problem is maximum
matching.  For h >= 2 the solver runs exact-cover backtracking over copies:
at each node it branches on the uncovered vertex with the fewest incident
usable copies (ties to the lowest index, A side first), places one copy,
and recurses.  Two sound prunes keep near-threshold negative instances
tractable:

* residual degree: an uncovered vertex whose residual degree is below h can
  never be covered;
* residual Hall condition: a perfect tiling induces, for every S inside A,
  at least |S|/h pairwise disjoint h-sets of B-vertices inside N(S), so
  |N(S)| >= |S| is necessary on every residual graph.  The check is one
  maximum-matching call per node.

Neither prune cuts a satisfiable branch, so the search stays exhaustive.
Budgets (node count, wall time) turn long searches into an explicit
"undecided" outcome, distinct from false.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from itertools import combinations

from .graph import BipartiteGraph, bit_indices
from .matching import _max_matching_masks, max_matching
from .matching import hall_deficiency as _hall_deficiency

__all__ = [
    "KhhCopy",
    "Tiling",
    "SolveOutcome",
    "Budget",
    "KhhEnumeration",
    "DivisibilityError",
    "VerificationResult",
    "enumerate_khh",
    "has_perfect_tiling",
    "max_partial_tiling",
    "hall_deficiency",
    "count_k22",
    "count_k1h",
    "verify_tiling",
    "tiling_part1_mechanism",
    "part1_contact_stats",
]

DEFAULT_COPY_CAP = 10_000_000
DEFAULT_EFFORT = 1_000_000


class DivisibilityError(ValueError):
    """Raised when a perfect tiling is requested with h not dividing n."""


@dataclass(frozen=True)
class KhhCopy:
    """One K_{h,h} copy: an h-subset of each side, stored sorted."""

    a_set: tuple[int, ...]
    b_set: tuple[int, ...]

    def masks(self) -> tuple[int, int]:
        am = 0
        for a in self.a_set:
            am |= 1 << a
        bm = 0
        for b in self.b_set:
            bm |= 1 << b
        return am, bm


@dataclass(frozen=True)
class Tiling:
    """Vertex-disjoint copies plus coverage bookkeeping."""

    copies: tuple[KhhCopy, ...]
    covered_a: frozenset[int]
    covered_b: frozenset[int]

    @classmethod
    def from_copies(cls, copies) -> "Tiling":
        copies = tuple(copies)
        cov_a: set[int] = set()
        cov_b: set[int] = set()
        for c in copies:
            if cov_a & set(c.a_set) or cov_b & set(c.b_set):
                raise ValueError("copies are not vertex-disjoint")
            cov_a.update(c.a_set)
            cov_b.update(c.b_set)
        return cls(copies, frozenset(cov_a), frozenset(cov_b))

    def coverage(self) -> int:
        """Total number of covered vertices, both sides."""
        return len(self.covered_a) + len(self.covered_b)


@dataclass
class SolveOutcome:
    """Result of a perfect-tiling decision.

    exists is True/False when decided, None when the budget ran out
    (undecided).  For h = 1 the Hall deficiency of the instance is recorded.
    """

    exists: bool | None
    tiling: Tiling | None
    nodes_explored: int
    elapsed: float
    deficiency: int | None = None

    @property
    def undecided(self) -> bool:
        return self.exists is None


@dataclass(frozen=True)
class Budget:
    """Node/time limits for the exact solver; None means unlimited."""

    max_nodes: int | None = None
    max_ms: float | None = None

    def __post_init__(self) -> None:
        if self.max_nodes is not None and self.max_nodes <= 0:
            raise ValueError(f"max_nodes must be positive, got {self.max_nodes}")
        if self.max_ms is not None and self.max_ms <= 0:
            raise ValueError(f"max_ms must be positive, got {self.max_ms}")


@dataclass
class KhhEnumeration:
    """Copy list plus a flag marking cap truncation."""

    copies: list[KhhCopy]
    truncated: bool

    def __iter__(self):
        return iter(self.copies)

    def __len__(self) -> int:
        return len(self.copies)

    def __getitem__(self, i):
        return self.copies[i]


def enumerate_khh(g: BipartiteGraph, h: int, cap: int | None = None) -> KhhEnumeration:
    """All K_{h,h} copies of g, each unordered pair of h-sets once.

    With cap, enumeration stops after cap copies and the result is flagged
    truncated.
    """
    if h < 1:
        raise ValueError(f"h must be >= 1, got {h}")
    copies: list[KhhCopy] = []
    if g.n_a < h or g.n_b < h:
        return KhhEnumeration(copies, False)
    adj = g.adj
    n_a = g.n_a
    truncated = False

    def rec(start: int, chosen: tuple[int, ...], common: int) -> bool:
        # returns False to abort everything (cap hit)
        if len(chosen) == h:
            bs = bit_indices(common)
            for b_sub in combinations(bs, h):
                if cap is not None and len(copies) >= cap:
                    return False
                copies.append(KhhCopy(chosen, b_sub))
            return True
        last = n_a - (h - len(chosen))
        for i in range(start, last + 1):
            c2 = common & adj[i]
            if c2.bit_count() >= h:
                if not rec(i + 1, chosen + (i,), c2):
                    return False
        return True

    full_b = (1 << g.n_b) - 1
    if not rec(0, (), full_b):
        truncated = True
    return KhhEnumeration(copies, truncated)


def hall_deficiency(g: BipartiteGraph) -> tuple[int, set[int]]:
    """max over S of |S| - |N(S)| with a witness set; see matching module."""
    return _hall_deficiency(g)


def count_k22(g: BipartiteGraph) -> int:
    """Exact number of unordered K_{2,2} copies: sum over A-pairs of C(codegree, 2)."""
    total = 0
    adj = g.adj
    for i in range(g.n_a):
        ai = adj[i]
        for j in range(i + 1, g.n_a):
            c = (ai & adj[j]).bit_count()
            total += c * (c - 1) // 2
    return total


def count_k1h(g: BipartiteGraph, h: int, center_side: str = "A") -> int:
    """Number of K_{1,h} copies with the center on the given side: sum of C(deg, h)."""
    if h < 1:
        raise ValueError(f"h must be >= 1, got {h}")
    if center_side not in ("A", "B"):
        raise ValueError(f"center_side must be 'A' or 'B', got {center_side!r}")
    rows = g.adj if center_side == "A" else g.rev_adj
    return sum(math.comb(m.bit_count(), h) for m in rows)


# ---------------------------------------------------------------------------
# certificate checking

class VerificationResult:
    """Boolean verdict carrying a reason code when false."""

    __slots__ = ("ok", "reason")

    def __init__(self, ok: bool, reason: str | None = None):
        self.ok = ok
        self.reason = reason

    def __bool__(self) -> bool:
        return self.ok

    def __repr__(self) -> str:
        return f"VerificationResult(ok={self.ok}, reason={self.reason!r})"


def verify_tiling(g: BipartiteGraph, t: Tiling, h: int) -> VerificationResult:
    """Check that t is a valid K_{h,h}-tiling of g, independent of its origin.

    Returns a false result with a reason code on any malformed input.
    """
    seen_a: set[int] = set()
    seen_b: set[int] = set()
    for k, c in enumerate(t.copies):
        if len(set(c.a_set)) != h or len(set(c.b_set)) != h:
            return VerificationResult(False, f"copy {k}: side sizes are not h={h}")
        for a in c.a_set:
            if not 0 <= a < g.n_a:
                return VerificationResult(False, f"copy {k}: A-index {a} out of range")
        for b in c.b_set:
            if not 0 <= b < g.n_b:
                return VerificationResult(False, f"copy {k}: B-index {b} out of range")
        if seen_a & set(c.a_set) or seen_b & set(c.b_set):
            return VerificationResult(False, f"copy {k}: overlaps an earlier copy")
        seen_a.update(c.a_set)
        seen_b.update(c.b_set)
        for a in c.a_set:
            for b in c.b_set:
                if not g.has_edge(a, b):
                    return VerificationResult(False, f"copy {k}: missing edge ({a}, {b})")
    if seen_a != set(t.covered_a) or seen_b != set(t.covered_b):
        return VerificationResult(False, "covered sets do not match the copy union")
    if len(t.covered_a) != h * len(t.copies) or len(t.covered_b) != h * len(t.copies):
        return VerificationResult(False, "covered set sizes are not h * |copies|")
    return VerificationResult(True)


# ---------------------------------------------------------------------------
# exact perfect-tiling decision

class _BudgetExceeded(Exception):
    pass


def has_perfect_tiling(
    g: BipartiteGraph,
    h: int,
    budget: Budget | None = None,
    copy_cap: int = DEFAULT_COPY_CAP,
) -> SolveOutcome:
    """Decide (exactly) whether g has a perfect K_{h,h}-tiling.

    Raises DivisibilityError when h does not divide n, ValueError when the
    sides differ.  A budget turns an over-long search into exists=None.
    """
    if g.n_a != g.n_b:
        raise ValueError(f"sides must match, got {g.n_a} and {g.n_b}")
    n = g.n_a
    if h < 1:
        raise ValueError(f"h must be >= 1, got {h}")
    if n % h != 0:
        raise DivisibilityError(f"h={h} does not divide n={n}")
    t0 = time.monotonic()
    if n == 0:
        return SolveOutcome(True, Tiling.from_copies(()), 0, 0.0)
    if h == 1:
        m = max_matching(g)
        deficiency = n - m.size
        tiling = None
        if deficiency == 0:
            tiling = Tiling.from_copies(KhhCopy((a,), (b,)) for a, b in m.pairs())
        return SolveOutcome(
            deficiency == 0, tiling, m.searches, time.monotonic() - t0, deficiency
        )
    searcher = _ExactCover(g, h, budget, copy_cap, t0)
    try:
        found = searcher.run()
    except _BudgetExceeded:
        return SolveOutcome(None, None, searcher.nodes, time.monotonic() - t0)
    tiling = Tiling.from_copies(searcher.solution) if found else None
    return SolveOutcome(found, tiling, searcher.nodes, time.monotonic() - t0)


class _ExactCover:
    """Backtracking exact-cover search for perfect K_{h,h}-tilings, h >= 2."""

    def __init__(self, g, h, budget, copy_cap, t0):
        self.g = g
        self.h = h
        self.n = g.n_a
        self.adj = g.adj
        self.rev = g.rev_adj
        self.budget = budget or Budget()
        self.t0 = t0
        self.nodes = 0
        self.solution: list[KhhCopy] = []
        enum = enumerate_khh(g, h, cap=copy_cap)
        if enum.truncated:
            self.copy_masks = None  # lazy per-vertex generation
        else:
            self.copy_masks = [c.masks() for c in enum.copies]
            self.copy_objs = enum.copies
            self.incident_a: list[list[int]] = [[] for _ in range(self.n)]
            self.incident_b: list[list[int]] = [[] for _ in range(self.n)]
            for k, (am, bm) in enumerate(self.copy_masks):
                for a in bit_indices(am):
                    self.incident_a[a].append(k)
                for b in bit_indices(bm):
                    self.incident_b[b].append(k)

    def run(self) -> bool:
        full = (1 << self.n) - 1
        return self._search(0, 0, full)

    def _tick(self) -> None:
        self.nodes += 1
        b = self.budget
        if b.max_nodes is not None and self.nodes > b.max_nodes:
            raise _BudgetExceeded
        if b.max_ms is not None and self.nodes % 64 == 0:
            if (time.monotonic() - self.t0) * 1000.0 > b.max_ms:
                raise _BudgetExceeded

    def _residual_ok(self, cov_a: int, cov_b: int, full: int) -> bool:
        # degree prune, then Hall via one matching on the residual graph
        unc_a = full ^ cov_a
        unc_b = full ^ cov_b
        rows = []
        m = unc_a
        while m:
            low = m & -m
            m ^= low
            row = self.adj[low.bit_length() - 1] & unc_b
            if row.bit_count() < self.h:
                return False
            rows.append(row)
        m = unc_b
        while m:
            low = m & -m
            m ^= low
            if (self.rev[low.bit_length() - 1] & unc_a).bit_count() < self.h:
                return False
        res = _max_matching_masks(rows, len(rows), self.n, free_mask=unc_b)
        return res.size == len(rows)

    def _search(self, cov_a: int, cov_b: int, full: int) -> bool:
        self._tick()
        if cov_a == full:
            return True
        if not self._residual_ok(cov_a, cov_b, full):
            return False
        if self.copy_masks is not None:
            branch = self._branch_materialized(cov_a, cov_b, full)
        else:
            branch = self._branch_lazy(cov_a, cov_b, full)
        if branch is None:
            return False
        for am, bm, copy in branch:
            if self._search(cov_a | am, cov_b | bm, full):
                self.solution.append(copy)
                return True
        return False

    def _branch_materialized(self, cov_a, cov_b, full):
        # uncovered vertex with the fewest usable copies; ties to lowest
        # index, A side first
        best_list: list[int] | None = None
        best_cnt = None
        for side_inc, cov_self in (
            (self.incident_a, cov_a),
            (self.incident_b, cov_b),
        ):
            unc = full ^ cov_self
            while unc:
                low = unc & -unc
                unc ^= low
                v = low.bit_length() - 1
                cnt = 0
                lst = []
                for k in side_inc[v]:
                    am, bm = self.copy_masks[k]
                    if am & cov_a == 0 and bm & cov_b == 0:
                        lst.append(k)
                        cnt += 1
                        if best_cnt is not None and cnt >= best_cnt:
                            break
                else:
                    if cnt == 0:
                        return None
                    if best_cnt is None or cnt < best_cnt:
                        best_cnt = cnt
                        best_list = lst
                        if best_cnt == 1:
                            return [
                                (*self.copy_masks[k], self.copy_objs[k])
                                for k in best_list
                            ]
        return [(*self.copy_masks[k], self.copy_objs[k]) for k in best_list]

    def _branch_lazy(self, cov_a, cov_b, full):
        # copy lists would not fit in memory; branch on the uncovered vertex
        # with minimum residual degree and generate its copies on the fly
        unc_b = full ^ cov_b
        unc_a = full ^ cov_a
        best = None  # (deg, side, v)
        for side, unc_self, rows, other_unc in (
            ("a", unc_a, self.adj, unc_b),
            ("b", unc_b, self.rev, unc_a),
        ):
            m = unc_self
            while m:
                low = m & -m
                m ^= low
                v = low.bit_length() - 1
                deg = (rows[v] & other_unc).bit_count()
                if best is None or deg < best[0]:
                    best = (deg, side, v)
        if best is None:
            return None
        _, side, v = best
        return self._copies_through(side, v, unc_a, unc_b)

    def _copies_through(self, side: str, v: int, unc_a: int, unc_b: int):
        """Yield (a_mask, b_mask, copy) for every residual copy containing v."""
        h = self.h
        if side == "a":
            rows, unc_self, unc_other = self.adj, unc_a, unc_b
        else:
            rows, unc_self, unc_other = self.rev, unc_b, unc_a
        partners = [u for u in bit_indices(unc_self) if u != v]
        base = rows[v] & unc_other

        def emit(a_tuple, common):
            for other_sub in combinations(bit_indices(common), h):
                am = 0
                for x in a_tuple:
                    am |= 1 << x
                bm = 0
                for y in other_sub:
                    bm |= 1 << y
                if side == "a":
                    yield am, bm, KhhCopy(a_tuple, other_sub)
                else:
                    yield bm, am, KhhCopy(other_sub, a_tuple)

        def rec(start, chosen, common):
            if len(chosen) == h:
                yield from emit(tuple(sorted(chosen)), common)
                return
            for idx in range(start, len(partners)):
                c2 = common & rows[partners[idx]]
                if c2.bit_count() >= h:
                    yield from rec(idx + 1, chosen + (partners[idx],), c2)

        if base.bit_count() >= h:
            yield from rec(0, (v,), base)


# ---------------------------------------------------------------------------
# partial tilings (heuristic)

_PARTIAL_ENUM_CAP = 500_000


def max_partial_tiling(g: BipartiteGraph, h: int, effort: int = DEFAULT_EFFORT) -> Tiling:
    """A valid, not necessarily maximum, K_{h,h}-tiling.

    Greedy seeding (scarcest copies first) followed by single-copy ejection
    swaps until no improvement or the effort budget is exhausted.  Effort
    counts size-increasing operations, so the result size is monotone
    non-decreasing in effort.  Deterministic.
    """
    if h < 1:
        raise ValueError(f"h must be >= 1, got {h}")
    if effort < 0:
        raise ValueError(f"effort must be >= 0, got {effort}")
    enum = enumerate_khh(g, h, cap=_PARTIAL_ENUM_CAP)
    if enum.truncated:
        chosen = _greedy_streaming(g, h, effort)
    else:
        chosen = _pack_materialized([c.masks() for c in enum.copies], effort)
        chosen = [enum.copies[k] for k in chosen]
    return Tiling.from_copies(chosen)


def _pack_materialized(masks: list[tuple[int, int]], effort: int) -> list[int]:
    m = len(masks)
    if m == 0 or effort == 0:
        return []
    # scarcity score: how contended a copy's vertices are
    cnt_a: dict[int, int] = {}
    cnt_b: dict[int, int] = {}
    for am, bm in masks:
        for i in bit_indices(am):
            cnt_a[i] = cnt_a.get(i, 0) + 1
        for j in bit_indices(bm):
            cnt_b[j] = cnt_b.get(j, 0) + 1

    def score(k: int) -> int:
        am, bm = masks[k]
        return sum(cnt_a[i] for i in bit_indices(am)) + sum(
            cnt_b[j] for j in bit_indices(bm)
        )

    order = sorted(range(m), key=lambda k: (score(k), k))
    ops = 0
    chosen: list[int] = []
    cov_a = cov_b = 0
    for k in order:
        am, bm = masks[k]
        if am & cov_a == 0 and bm & cov_b == 0:
            chosen.append(k)
            cov_a |= am
            cov_b |= bm
            ops += 1
            if ops >= effort:
                return chosen
    # ejection swaps: replace one copy by two that only conflicted with it
    improved = True
    while improved and ops < effort:
        improved = False
        for idx in range(len(chosen)):
            if ops >= effort:
                break
            k0 = chosen[idx]
            am0, bm0 = masks[k0]
            rest_a = cov_a ^ am0
            rest_b = cov_b ^ bm0
            cands = [
                k
                for k in range(m)
                if k != k0 and masks[k][0] & rest_a == 0 and masks[k][1] & rest_b == 0
            ]
            pair = None
            for x in range(len(cands)):
                ax, bx = masks[cands[x]]
                for y in range(x + 1, len(cands)):
                    ay, by = masks[cands[y]]
                    if ax & ay == 0 and bx & by == 0:
                        pair = (cands[x], cands[y])
                        break
                if pair:
                    break
            if pair:
                chosen[idx] = pair[0]
                chosen.append(pair[1])
                cov_a = rest_a | masks[pair[0]][0] | masks[pair[1]][0]
                cov_b = rest_b | masks[pair[0]][1] | masks[pair[1]][1]
                ops += 1
                improved = True
        # saturate: anything newly addable
        for k in range(m):
            if ops >= effort:
                break
            am, bm = masks[k]
            if am & cov_a == 0 and bm & cov_b == 0:
                chosen.append(k)
                cov_a |= am
                cov_b |= bm
                ops += 1
                improved = True
    return chosen


def _greedy_streaming(g: BipartiteGraph, h: int, effort: int) -> list[KhhCopy]:
    # dense regime: find one residual copy at a time, anchored on the
    # uncovered A-vertex of minimum residual degree
    n_a, n_b = g.n_a, g.n_b
    unc_a = (1 << n_a) - 1
    unc_b = (1 << n_b) - 1
    dead = 0
    chosen: list[KhhCopy] = []
    ops = 0
    while ops < effort:
        live = unc_a & ~dead
        if not live:
            break
        anchor = None
        best_deg = None
        m = live
        while m:
            low = m & -m
            m ^= low
            a = low.bit_length() - 1
            deg = (g.adj[a] & unc_b).bit_count()
            if deg >= h and (best_deg is None or deg < best_deg):
                best_deg = deg
                anchor = a
        if anchor is None:
            break
        copy = _find_copy_through(g, h, anchor, unc_a, unc_b)
        if copy is None:
            dead |= 1 << anchor
            continue
        am, bm = copy.masks()
        unc_a ^= am
        unc_b ^= bm
        chosen.append(copy)
        ops += 1
    return chosen


def _find_copy_through(g, h, anchor, unc_a, unc_b) -> KhhCopy | None:
    partners = [a for a in bit_indices(unc_a) if a != anchor]
    base = g.adj[anchor] & unc_b
    if base.bit_count() < h:
        return None

    def rec(start, chosen, common):
        if len(chosen) == h:
            return KhhCopy(tuple(sorted(chosen)), tuple(bit_indices(common)[:h]))
        for idx in range(start, len(partners)):
            c2 = common & g.adj[partners[idx]]
            if c2.bit_count() >= h:
                hit = rec(idx + 1, chosen + (partners[idx],), c2)
                if hit is not None:
                    return hit
        return None

    return rec(0, (anchor,), base)


# ---------------------------------------------------------------------------
# per-certificate structural checks for the perturbed extremal models

def tiling_part1_mechanism(
    t: Tiling, random_part: BipartiteGraph, a1_size: int, b1_size: int, h: int
) -> bool:
    """True iff some copy's random-edge trace inside (A1, B1) contains a
    K_{2,2}, or a K_{1,h} whose leaves all lie in one side's part 1."""
    return any(
        _copy_trace_mechanism(c, random_part, a1_size, b1_size, h) for c in t.copies
    )


def _copy_trace_mechanism(c, random_part, a1_size, b1_size, h) -> bool:
    a_hits = [a for a in c.a_set if a < a1_size]
    b_hits = [b for b in c.b_set if b < b1_size]
    if not a_hits or not b_hits:
        return False
    b_mask = 0
    for b in b_hits:
        b_mask |= 1 << b
    trace = {a: random_part.adj[a] & b_mask for a in a_hits}
    # K_{1,h}, center in A1 with h leaves in B1
    if any(m.bit_count() >= h for m in trace.values()):
        return True
    # K_{1,h}, center in B1 with h leaves in A1
    for b in b_hits:
        deg = sum(1 for a in a_hits if trace[a] >> b & 1)
        if deg >= h:
            return True
    # K_{2,2} inside the trace
    hits = list(trace.values())
    for i in range(len(hits)):
        for j in range(i + 1, len(hits)):
            if (hits[i] & hits[j]).bit_count() >= 2:
                return True
    return False


def part1_contact_stats(t: Tiling, a1_size: int, b1_size: int) -> tuple[int, int]:
    """(copies touching part 1, part-2 vertices covered by those copies)."""
    touching = 0
    part2_covered = 0
    for c in t.copies:
        in1 = sum(1 for a in c.a_set if a < a1_size) + sum(
            1 for b in c.b_set if b < b1_size
        )
        if in1 > 0:
            touching += 1
            part2_covered += len(c.a_set) + len(c.b_set) - in1
    return touching, part2_covered
