"""Graph generators: the G_{n,n,p} random model, two deterministic
extremal constructions, and their perturbed unions.

Randomness contract
-------------------
Edge sampling uses numpy's Philox counter-based generator keyed by the seed.
The uniform variate for cell (a, b) is draw number a*n + b of the stream, so
the decision for each cell is a fixed function of (n, seed, cell index),
independent of evaluation order and of p.  Two consequences relied on
elsewhere:

* identical (n, p, seed) gives a bit-identical edge set on any machine and
  worker layout;
* for fixed (n, seed) the edge set is monotone in p (shared-seed coupling):
  the graph at p1 <= p2 is a subgraph of the graph at p2.

Derived seeds use the splitmix64 finalizer (:func:`mix64`); per-trial seeds in
experiments are ``base_seed XOR mix64(trial_index)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import BipartiteGraph, _from_masks, union

__all__ = [
    "GenSpec",
    "ExtremalInstance",
    "PerturbedInstance",
    "gen_random",
    "gen_lower_extremal",
    "gen_half_extremal",
    "gen_perturbed",
    "generate",
    "mix64",
    "trial_seed",
    "MODELS",
]

MODELS = ("random", "lower_extremal", "half_extremal", "perturbed_lower", "perturbed_half")

_MASK64 = (1 << 64) - 1


def mix64(x: int) -> int:
    """splitmix64 finalizer; fixed mixing function for seed derivation."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def trial_seed(base_seed: int, trial_index: int) -> int:
    """Per-trial seed: base_seed XOR mix64(trial_index)."""
    return (base_seed ^ mix64(trial_index)) & _MASK64


@dataclass(frozen=True)
class GenSpec:
    """Parameters of one graph generation.

    alpha is consulted only by the lower_extremal models and must satisfy
    0 < alpha < 1/(2h) there; p only by the random/perturbed models.
    """

    model: str
    n: int
    h: int = 1
    alpha: float = 0.0
    p: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}, expected one of {MODELS}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.h < 1:
            raise ValueError("h must be >= 1")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must be in [0, 1], got {self.p}")
        if self.model in ("lower_extremal", "perturbed_lower"):
            if not 0.0 < self.alpha < 1.0 / (2 * self.h):
                raise ValueError(
                    f"alpha must be in (0, 1/(2h)) = (0, {1.0 / (2 * self.h)}), got {self.alpha}"
                )


@dataclass(frozen=True)
class ExtremalInstance:
    """A deterministic construction plus its part-1/part-2 boundary indices.

    A-indices < a1_size form A1, the rest A2; likewise b1_size for the B side.
    """

    graph: BipartiteGraph
    a1_size: int
    b1_size: int


@dataclass(frozen=True)
class PerturbedInstance:
    """Union of a deterministic base with a random graph, keeping the parts."""

    graph: BipartiteGraph
    base: ExtremalInstance | None
    random_part: BipartiteGraph


def gen_random(n: int, p: float, seed: int) -> BipartiteGraph:
    """G_{n,n,p}: each of the n^2 cells present independently with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if p == 0.0:
        return _from_masks(n, n, [0] * n)
    full = (1 << n) - 1
    if p == 1.0:
        return _from_masks(n, n, [full] * n)
    rng = np.random.Generator(np.random.Philox(key=seed & _MASK64))
    u = rng.random((n, n))
    rows = u < p
    masks = [
        int.from_bytes(np.packbits(rows[i], bitorder="little").tobytes(), "little")
        for i in range(n)
    ]
    return _from_masks(n, n, masks)


def gen_lower_extremal(n: int, alpha: float, h: int) -> ExtremalInstance:
    """Lower-bound extremal construction.

    Split each side into part 1 of size ceil(alpha*n) and part 2; all edges in
    (A1,B1), (A1,B2), (A2,B1) and none in (A2,B2).  Minimum degree is
    ceil(alpha*n) >= alpha*n.  Requiring alpha < 1/(2h) is enough: with
    beta = 1 - alpha the companion condition beta > (2h-1)*alpha follows
    automatically (1 - alpha > (2h-1)*alpha iff 1 > 2h*alpha).
    """
    if not 0.0 < alpha < 1.0 / (2 * h):
        raise ValueError(
            f"alpha must be in (0, 1/(2h)) = (0, {1.0 / (2 * h)}), got {alpha}"
        )
    if n < 1.0 / alpha:
        raise ValueError(f"n must be >= 1/alpha = {1.0 / alpha}, got {n}")
    k = math.ceil(alpha * n)
    full = (1 << n) - 1
    b1 = (1 << k) - 1
    masks = [full] * k + [b1] * (n - k)
    return ExtremalInstance(_from_masks(n, n, masks), k, k)


def gen_half_extremal(n: int) -> ExtremalInstance:
    """Half-n extremal construction.

    |A1| = |B1| = floor(n/2)+1, |A2| = |B2| = ceil(n/2)-1; all edges in
    (A1,B2) and (A2,B1), no other edges; minimum degree ceil(n/2)-1.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    k1 = n // 2 + 1
    b1_mask = (1 << k1) - 1
    b2_mask = ((1 << n) - 1) ^ b1_mask
    masks = [b2_mask] * k1 + [b1_mask] * (n - k1)
    return ExtremalInstance(_from_masks(n, n, masks), k1, k1)


def gen_perturbed(spec: GenSpec) -> PerturbedInstance:
    """Union of the named deterministic construction with a random graph.

    The random part uses the derived seed mix64(spec.seed), so the instance is
    a deterministic function of the spec.
    """
    if spec.model not in ("perturbed_lower", "perturbed_half"):
        raise ValueError(f"gen_perturbed requires a perturbed model, got {spec.model!r}")
    if spec.model == "perturbed_lower":
        base = gen_lower_extremal(spec.n, spec.alpha, spec.h)
    else:
        base = gen_half_extremal(spec.n)
    random_part = gen_random(spec.n, spec.p, mix64(spec.seed))
    return PerturbedInstance(union(base.graph, random_part), base, random_part)


def generate(spec: GenSpec) -> PerturbedInstance:
    """Dispatch on spec.model; always returns a PerturbedInstance wrapper."""
    if spec.model == "random":
        g = gen_random(spec.n, spec.p, spec.seed)
        return PerturbedInstance(g, None, g)
    empty = _from_masks(spec.n, spec.n, [0] * spec.n)
    if spec.model == "lower_extremal":
        base = gen_lower_extremal(spec.n, spec.alpha, spec.h)
        return PerturbedInstance(base.graph, base, empty)
    if spec.model == "half_extremal":
        base = gen_half_extremal(spec.n)
        return PerturbedInstance(base.graph, base, empty)
    return gen_perturbed(spec)
