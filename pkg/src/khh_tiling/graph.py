"""Immutable bipartite graphs with bitset adjacency.

A :class:`BipartiteGraph` stores two disjoint vertex sides, A and B, with
dense integer labels ``0..n_a-1`` and ``0..n_b-1``.  Adjacency is kept as one
Python integer bitmask per A-vertex (bit ``j`` set means the edge ``(a, b_j)``
is present), which makes neighborhood intersection and codegree queries cheap.
A reverse index for B-side queries is derived lazily.

Graphs are immutable: perturbation is expressed as :func:`union` with a fresh
random graph, never as mutation, so values can be shared freely across
concurrent workers.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Literal, Sequence

__all__ = [
    "BipartiteGraph",
    "VertexRef",
    "new_graph",
    "union",
    "min_degree",
    "neighborhood",
    "bit_indices",
    "write_graph_text",
    "read_graph_text",
    "parse_graph_text",
]


def bit_indices(mask: int) -> list[int]:
    """Indices of set bits in ascending order."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


@dataclass(frozen=True)
class VertexRef:
    """A vertex named by side and 0-based index within that side."""

    side: Literal["A", "B"]
    index: int

    def __post_init__(self) -> None:
        if self.side not in ("A", "B"):
            raise ValueError(f"side must be 'A' or 'B', got {self.side!r}")
        if self.index < 0:
            raise ValueError(f"index must be non-negative, got {self.index}")


@dataclass(frozen=True)
class BipartiteGraph:
    """Two labeled vertex sides with bitset adjacency, A-side indexed."""

    n_a: int
    n_b: int
    adj: tuple[int, ...]
    edge_count: int

    @cached_property
    def rev_adj(self) -> tuple[int, ...]:
        """B-side adjacency masks over A, built on first use."""
        rev = [0] * self.n_b
        for a, mask in enumerate(self.adj):
            bit = 1 << a
            for b in bit_indices(mask):
                rev[b] |= bit
        return tuple(rev)

    def degree_a(self, a: int) -> int:
        return self.adj[a].bit_count()

    def degree_b(self, b: int) -> int:
        return self.rev_adj[b].bit_count()

    def has_edge(self, a: int, b: int) -> bool:
        return bool(self.adj[a] >> b & 1)

    def neighbors_a(self, a: int) -> list[int]:
        return bit_indices(self.adj[a])

    def neighbors_b(self, b: int) -> list[int]:
        return bit_indices(self.rev_adj[b])

    def edges(self) -> Iterator[tuple[int, int]]:
        for a, mask in enumerate(self.adj):
            for b in bit_indices(mask):
                yield (a, b)

    def __repr__(self) -> str:
        return f"BipartiteGraph(n_a={self.n_a}, n_b={self.n_b}, edges={self.edge_count})"


def _from_masks(n_a: int, n_b: int, masks: Sequence[int]) -> BipartiteGraph:
    # internal fast path; masks must already be in range
    edge_count = sum(m.bit_count() for m in masks)
    return BipartiteGraph(n_a, n_b, tuple(masks), edge_count)


def new_graph(n_a: int, n_b: int, edges: Iterable[tuple[int, int]]) -> BipartiteGraph:
    """Build a graph from an edge list; duplicate edges collapse.

    Raises ValueError naming the offending pair when an index is out of range.
    """
    if n_a < 0 or n_b < 0:
        raise ValueError("side sizes must be non-negative")
    masks = [0] * n_a
    for a, b in edges:
        if not (0 <= a < n_a and 0 <= b < n_b):
            raise ValueError(f"edge ({a}, {b}) out of range for sides {n_a}x{n_b}")
        masks[a] |= 1 << b
    return _from_masks(n_a, n_b, masks)


def union(g1: BipartiteGraph, g2: BipartiteGraph) -> BipartiteGraph:
    """Edge-set union of two graphs on identical sides."""
    if (g1.n_a, g1.n_b) != (g2.n_a, g2.n_b):
        raise ValueError(
            f"side size mismatch: {g1.n_a}x{g1.n_b} vs {g2.n_a}x{g2.n_b}"
        )
    masks = [m1 | m2 for m1, m2 in zip(g1.adj, g2.adj)]
    return _from_masks(g1.n_a, g1.n_b, masks)


def min_degree(g: BipartiteGraph) -> int:
    """Minimum degree over all vertices of both sides."""
    if g.n_a == 0 or g.n_b == 0:
        raise ValueError("min_degree undefined on an empty side")
    da = min(m.bit_count() for m in g.adj)
    db = min(m.bit_count() for m in g.rev_adj)
    return min(da, db)


def neighborhood(g: BipartiteGraph, s: Iterable[int]) -> set[int]:
    """N(S): union of the B-neighbor sets of the A-indices in s."""
    mask = 0
    for a in s:
        if not 0 <= a < g.n_a:
            raise ValueError(f"A-index {a} out of range for side of size {g.n_a}")
        mask |= g.adj[a]
    return set(bit_indices(mask))


# ---------------------------------------------------------------------------
# graph text format:  `p <n_a> <n_b>` header, `e <a> <b>` per edge,
# `#` comment lines ignored, 0-indexed, UTF-8 with LF line endings.

def format_graph_text(g: BipartiteGraph, meta: dict | None = None) -> str:
    """Render the text format; an optional meta dict is echoed as a comment."""
    lines = []
    if meta is not None:
        lines.append(f"# meta {json.dumps(meta, sort_keys=True)}")
    lines.append(f"p {g.n_a} {g.n_b}")
    lines.extend(f"e {a} {b}" for a, b in g.edges())
    return "\n".join(lines) + "\n"


def write_graph_text(g: BipartiteGraph, path: str, meta: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_graph_text(g, meta))


def parse_graph_text(text: str) -> tuple[BipartiteGraph, dict | None]:
    """Parse the text format; returns (graph, meta-dict-or-None)."""
    meta: dict | None = None
    sizes: tuple[int, int] | None = None
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("meta ") and meta is None:
                try:
                    meta = json.loads(body[5:])
                except json.JSONDecodeError:
                    pass  # plain comment that happened to start with 'meta'
            continue
        fields = line.split()
        if fields[0] == "p":
            if sizes is not None:
                raise ValueError(f"line {lineno}: duplicate 'p' header")
            if len(fields) != 3:
                raise ValueError(f"line {lineno}: malformed header {line!r}")
            sizes = (int(fields[1]), int(fields[2]))
        elif fields[0] == "e":
            if sizes is None:
                raise ValueError(f"line {lineno}: edge before 'p' header")
            if len(fields) != 3:
                raise ValueError(f"line {lineno}: malformed edge {line!r}")
            edges.append((int(fields[1]), int(fields[2])))
        else:
            raise ValueError(f"line {lineno}: unrecognized line {line!r}")
    if sizes is None:
        raise ValueError("missing 'p' header line")
    return new_graph(sizes[0], sizes[1], edges), meta


def read_graph_text(path: str) -> tuple[BipartiteGraph, dict | None]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_graph_text(fh.read())
