import math

import pytest

from khh_tiling import (
    GenSpec,
    gen_half_extremal,
    gen_lower_extremal,
    gen_perturbed,
    gen_random,
    generate,
    min_degree,
    mix64,
    neighborhood,
    trial_seed,
    union,
)


class TestGenSpec:
    def test_unknown_model(self):
        with pytest.raises(ValueError, match="unknown model"):
            GenSpec(model="nope", n=4)

    def test_p_range(self):
        with pytest.raises(ValueError):
            GenSpec(model="random", n=4, p=1.5)

    def test_alpha_only_checked_for_lower(self):
        GenSpec(model="random", n=4, alpha=0.9)  # ignored, fine
        with pytest.raises(ValueError, match="alpha"):
            GenSpec(model="perturbed_lower", n=10, h=2, alpha=0.3)
        GenSpec(model="perturbed_lower", n=10, h=2, alpha=0.2)

    def test_n_h_positive(self):
        with pytest.raises(ValueError):
            GenSpec(model="random", n=0)
        with pytest.raises(ValueError):
            GenSpec(model="random", n=4, h=0)


class TestMix:
    def test_mix64_nonzero_and_spread(self):
        vals = {mix64(i) for i in range(1000)}
        assert len(vals) == 1000
        assert all(0 <= v < 1 << 64 for v in vals)

    def test_trial_seed_distinct(self):
        base = 987654321
        seeds = {trial_seed(base, t) for t in range(500)}
        assert len(seeds) == 500


class TestGenRandom:
    def test_p_zero_empty(self):
        assert gen_random(5, 0.0, seed=1).edge_count == 0

    def test_p_one_complete(self):
        g = gen_random(5, 1.0, seed=1)
        assert g.edge_count == 25

    def test_seed_determinism(self):
        a = gen_random(30, 0.37, seed=123)
        b = gen_random(30, 0.37, seed=123)
        c = gen_random(30, 0.37, seed=124)
        assert a.adj == b.adj
        assert a.adj != c.adj

    def test_p_out_of_range(self):
        with pytest.raises(ValueError):
            gen_random(5, -0.1, seed=0)

    def test_edge_count_concentration(self):
        # binomial concentration: 4 sigma band around 3000 out of 10000 cells
        n, p = 100, 0.3
        band = 4 * math.sqrt(n * n * p * (1 - p))
        for seed in range(300):
            e = gen_random(n, p, seed=seed).edge_count
            assert abs(e - n * n * p) <= band

    def test_cell_marginals(self):
        # per-cell indicator frequency within 5 sigma of p over many seeds
        n, p, reps = 10, 0.3, 10_000
        cells = [(0, 0), (3, 7), (9, 9)]
        hits = {c: 0 for c in cells}
        for seed in range(reps):
            g = gen_random(n, p, seed=seed)
            for a, b in cells:
                hits[(a, b)] += g.has_edge(a, b)
        sigma = math.sqrt(p * (1 - p) / reps)
        for c in cells:
            assert abs(hits[c] / reps - p) <= 5 * sigma

    def test_monotone_coupling(self):
        # same seed, larger p: the edge set can only grow
        for seed in range(20):
            g1 = gen_random(12, 0.2, seed=seed)
            g2 = gen_random(12, 0.5, seed=seed)
            for m1, m2 in zip(g1.adj, g2.adj):
                assert m1 & ~m2 == 0


class TestLowerExtremal:
    def test_sizes_and_counts(self):
        inst = gen_lower_extremal(10, 0.2, 2)
        g = inst.graph
        assert inst.a1_size == 2 and inst.b1_size == 2
        assert g.edge_count == 2 * 2 + 2 * 8 + 8 * 2  # 36
        assert min_degree(g) == 2

    def test_min_degree_ratio(self):
        inst = gen_lower_extremal(10, 0.2, 2)
        assert min_degree(inst.graph) / 10 >= 0.2

    def test_a2_neighborhood_is_exactly_b1(self):
        inst = gen_lower_extremal(10, 0.2, 2)
        k = inst.a1_size
        for a in range(k, 10):
            assert neighborhood(inst.graph, {a}) == set(range(k))

    def test_structure_certificate(self):
        # complete on (A1,B1),(A1,B2),(A2,B1); empty on (A2,B2)
        for n, alpha, h in [(10, 0.2, 2), (37, 0.13, 3), (24, 0.49, 1)]:
            inst = gen_lower_extremal(n, alpha, h)
            g, k = inst.graph, inst.a1_size
            assert k == math.ceil(alpha * n)
            for a in range(n):
                for b in range(n):
                    want = a < k or b < k
                    assert g.has_edge(a, b) == want
            assert min_degree(g) == k >= alpha * n

    def test_alpha_bounds(self):
        with pytest.raises(ValueError, match="alpha"):
            gen_lower_extremal(10, 0.25, 2)  # needs < 1/(2h) strictly
        with pytest.raises(ValueError, match="alpha"):
            gen_lower_extremal(10, 0.0, 2)

    def test_n_too_small(self):
        with pytest.raises(ValueError, match="1/alpha"):
            gen_lower_extremal(4, 0.2, 2)


class TestHalfExtremal:
    def test_sizes_n10(self):
        inst = gen_half_extremal(10)
        assert inst.a1_size == 6
        assert min_degree(inst.graph) == 4

    def test_part_sum_comparison(self):
        inst = gen_half_extremal(10)
        k1 = inst.a1_size
        assert k1 + inst.b1_size == 12 > 8 == (10 - k1) + (10 - inst.b1_size)

    def test_degenerate_n2(self):
        inst = gen_half_extremal(2)
        assert inst.a1_size == 2
        assert inst.graph.edge_count == 0

    def test_n1_rejected(self):
        with pytest.raises(ValueError):
            gen_half_extremal(1)

    def test_structure_certificate(self):
        # edges exactly (A1,B2) and (A2,B1)
        for n in (2, 3, 10, 11, 30):
            inst = gen_half_extremal(n)
            g, k1 = inst.graph, inst.a1_size
            assert k1 == n // 2 + 1
            for a in range(n):
                for b in range(n):
                    want = (a < k1) != (b < k1)
                    assert g.has_edge(a, b) == want
            assert min_degree(g) == math.ceil(n / 2) - 1


class TestPerturbed:
    def test_p_zero_is_base(self):
        spec = GenSpec(model="perturbed_lower", n=10, h=2, alpha=0.2, p=0.0, seed=5)
        inst = gen_perturbed(spec)
        assert inst.graph.adj == inst.base.graph.adj

    def test_p_one_complete(self):
        spec = GenSpec(model="perturbed_half", n=8, p=1.0, seed=5)
        inst = gen_perturbed(spec)
        assert inst.graph.edge_count == 64

    def test_min_degree_never_drops(self):
        spec = GenSpec(model="perturbed_lower", n=10, h=2, alpha=0.2, p=0.5, seed=3)
        inst = gen_perturbed(spec)
        assert min_degree(inst.graph) >= 2

    def test_union_decomposition(self):
        spec = GenSpec(model="perturbed_half", n=12, p=0.3, seed=11)
        inst = gen_perturbed(spec)
        assert inst.graph.adj == union(inst.base.graph, inst.random_part).adj

    def test_wrong_model_rejected(self):
        with pytest.raises(ValueError, match="perturbed"):
            gen_perturbed(GenSpec(model="random", n=4, p=0.5))


class TestGenerateDispatch:
    def test_random_has_no_base(self):
        inst = generate(GenSpec(model="random", n=6, p=0.5, seed=2))
        assert inst.base is None
        assert inst.random_part.adj == inst.graph.adj

    def test_deterministic_models_have_empty_random_part(self):
        inst = generate(GenSpec(model="lower_extremal", n=10, h=2, alpha=0.2))
        assert inst.random_part.edge_count == 0
        assert inst.base is not None

    def test_full_determinism(self):
        spec = GenSpec(model="perturbed_half", n=14, p=0.25, seed=99)
        assert generate(spec).graph.adj == generate(spec).graph.adj
