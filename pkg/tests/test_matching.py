import random

from khh_tiling import max_matching, new_graph
from khh_tiling.matching import hall_deficiency

from oracles import oracle_hall_deficiency


def random_graph(n_a, n_b, p, rng):
    edges = [(a, b) for a in range(n_a) for b in range(n_b) if rng.random() < p]
    return new_graph(n_a, n_b, edges)


def test_matching_pairs_are_valid_and_disjoint():
    rng = random.Random(0)
    for _ in range(100):
        g = random_graph(rng.randint(1, 10), rng.randint(1, 10), rng.random(), rng)
        m = max_matching(g)
        pairs = m.pairs()
        assert len(pairs) == m.size
        assert len({a for a, _ in pairs}) == m.size
        assert len({b for _, b in pairs}) == m.size
        for a, b in pairs:
            assert g.has_edge(a, b)


def test_size_against_koenig_dual():
    # max matching = n_a - max_S (|S| - |N(S)|)  (defect Hall)
    rng = random.Random(1)
    for _ in range(200):
        na, nb = rng.randint(1, 9), rng.randint(1, 9)
        g = random_graph(na, nb, rng.random(), rng)
        assert max_matching(g).size == na - oracle_hall_deficiency(g)


def test_deficiency_matches_oracle():
    rng = random.Random(2)
    for _ in range(200):
        na, nb = rng.randint(1, 9), rng.randint(1, 9)
        g = random_graph(na, nb, rng.random(), rng)
        d, witness = hall_deficiency(g)
        assert d == oracle_hall_deficiency(g)
        # witness actually achieves the deficiency
        nbrs = set()
        for a in witness:
            nbrs |= {b for b in range(nb) if g.has_edge(a, b)}
        assert len(witness) - len(nbrs) == d


def test_complete_graph_perfect():
    g = new_graph(6, 6, [(a, b) for a in range(6) for b in range(6)])
    assert max_matching(g).size == 6
    assert hall_deficiency(g) == (0, set())


def test_empty_graph():
    g = new_graph(3, 3, [])
    d, witness = hall_deficiency(g)
    assert d == 3 and witness == {0, 1, 2}


def test_two_to_one():
    g = new_graph(2, 2, [(0, 0), (1, 0)])
    d, witness = hall_deficiency(g)
    assert d == 1 and witness == {0, 1}
