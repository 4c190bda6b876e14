"""Matching solver tests: frozen instances, structure stress, differential."""

from fractions import Fraction

import numpy as np
import pytest

from anyonmem.matching import (
    WeightedGraph,
    brute_force_mwpm,
    matching_weight,
    min_weight_perfect_matching,
)


def random_graph(rng, n_max=12, density=None):
    n = int(rng.integers(2, n_max + 1))
    p = float(rng.uniform(0.15, 1.0)) if density is None else density
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                edges.append((u, v, int(rng.integers(0, 30))))
    return WeightedGraph(n, tuple(edges))


def assert_valid_perfect(g, pairs):
    covered = set()
    lookup = {}
    for u, v, w in g.edges:
        key = (u, v) if u < v else (v, u)
        lookup[key] = min(w, lookup.get(key, w))
    for u, v in pairs:
        assert (min(u, v), max(u, v)) in lookup
        covered.update((u, v))
    assert covered == set(range(g.n))
    assert len(pairs) * 2 == g.n


class TestKnownInstances:
    def test_single_edge(self):
        g = WeightedGraph(2, ((0, 1, 5),))
        m = min_weight_perfect_matching(g)
        assert m == ((0, 1),)
        assert matching_weight(g, m) == 5

    def test_four_node_forced_pairing(self):
        # brute force over the 3 perfect matchings gives cost 2
        g = WeightedGraph(
            4, ((0, 1, 1), (2, 3, 1), (0, 2, 2), (1, 3, 2), (0, 3, 2), (1, 2, 2))
        )
        m = min_weight_perfect_matching(g)
        assert set(m) == {(0, 1), (2, 3)}
        assert matching_weight(g, m) == 2
        assert matching_weight(g, brute_force_mwpm(g)) == 2

    def test_odd_count_is_none(self):
        g = WeightedGraph(3, ((0, 1, 1), (1, 2, 1), (0, 2, 1)))
        assert min_weight_perfect_matching(g) is None
        assert brute_force_mwpm(g) is None

    def test_empty_graph(self):
        assert min_weight_perfect_matching(WeightedGraph(0, ())) == ()
        assert brute_force_mwpm(WeightedGraph(0, ())) == ()

    def test_disconnected_odd_components(self):
        tri = lambda o: ((o, o + 1, 1), (o + 1, o + 2, 1), (o, o + 2, 1))
        g = WeightedGraph(6, tri(0) + tri(3))
        assert min_weight_perfect_matching(g) is None
        assert brute_force_mwpm(g) is None

    def test_no_edges_even_count(self):
        g = WeightedGraph(4, ())
        assert min_weight_perfect_matching(g) is None

    def test_path_forces_alternating_edges(self):
        g = WeightedGraph(4, ((0, 1, 9), (1, 2, 1), (2, 3, 9)))
        m = min_weight_perfect_matching(g)
        assert set(m) == {(0, 1), (2, 3)}

    def test_parallel_edges_use_cheapest(self):
        g = WeightedGraph(2, ((0, 1, 7), (1, 0, 3)))
        m = min_weight_perfect_matching(g)
        assert matching_weight(g, m) == 3

    def test_zero_weights_allowed(self):
        g = WeightedGraph(4, ((0, 1, 0), (2, 3, 0), (0, 2, 5), (1, 3, 5)))
        m = min_weight_perfect_matching(g)
        assert matching_weight(g, m) == 0


class TestValidation:
    def test_self_loop_rejected(self):
        with pytest.raises(ValueError, match="self-loop"):
            WeightedGraph(2, ((0, 0, 1),))

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError, match="out of range"):
            WeightedGraph(2, ((0, 2, 1),))

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError, match="negative"):
            WeightedGraph(2, ((0, 1, -1),))

    def test_non_integral_float_rejected(self):
        with pytest.raises(ValueError, match="Fraction"):
            WeightedGraph(2, ((0, 1, 0.5),))

    def test_brute_force_size_limit(self):
        g = WeightedGraph(16, tuple((u, u + 1, 1) for u in range(0, 16, 2)))
        with pytest.raises(ValueError, match="14"):
            brute_force_mwpm(g)


class TestRationalWeights:
    def test_fraction_weights_exact(self):
        # the two feasible pairings cost exactly 1/3 + 1/3 = 1/2 + 1/6;
        # scaling by the common denominator must preserve the tie
        g = WeightedGraph(
            4,
            (
                (0, 1, Fraction(1, 3)),
                (2, 3, Fraction(1, 3)),
                (0, 2, Fraction(1, 2)),
                (1, 3, Fraction(1, 6)),
            ),
        )
        m = min_weight_perfect_matching(g)
        assert_valid_perfect(g, m)
        assert matching_weight(g, m) == Fraction(2, 3)
        assert matching_weight(g, brute_force_mwpm(g)) == Fraction(2, 3)

    def test_mixed_int_and_fraction(self):
        g = WeightedGraph(2, ((0, 1, Fraction(3, 2)),))
        assert min_weight_perfect_matching(g) == ((0, 1),)


class TestStructureStress:
    def test_complete_equal_weights(self):
        n = 10
        g = WeightedGraph(
            n, tuple((u, v, 4) for u in range(n) for v in range(u + 1, n))
        )
        m = min_weight_perfect_matching(g)
        assert_valid_perfect(g, m)
        assert matching_weight(g, m) == 4 * n // 2

    def test_virtual_clique_shape(self):
        # half the nodes form a zero-weight clique, the decoder's
        # boundary trick; compare against the exhaustive oracle
        rng = np.random.default_rng(5)
        for _ in range(25):
            k = int(rng.integers(2, 6))
            edges = []
            for u in range(k):
                for v in range(u + 1, k):
                    edges.append((u, v, int(rng.integers(1, 15))))
                edges.append((u, k + u, int(rng.integers(1, 10))))
            for u in range(k):
                for v in range(u + 1, k):
                    edges.append((k + u, k + v, 0))
            g = WeightedGraph(2 * k, tuple(edges))
            a = min_weight_perfect_matching(g)
            b = brute_force_mwpm(g)
            assert_valid_perfect(g, a)
            assert matching_weight(g, a) == matching_weight(g, b)

    def test_blossom_heavy_instance(self):
        # two odd cycles bridged by one edge; optimum must open both
        edges = []
        for u in range(5):
            edges.append((u, (u + 1) % 5, 2))
        for u in range(5):
            edges.append((5 + u, 5 + (u + 1) % 5, 2))
        edges.append((0, 5, 1))
        g = WeightedGraph(10, tuple(edges))
        a = min_weight_perfect_matching(g)
        b = brute_force_mwpm(g)
        assert_valid_perfect(g, a)
        assert matching_weight(g, a) == matching_weight(g, b) == 9

    def test_deterministic_repeat(self):
        rng = np.random.default_rng(11)
        g = random_graph(rng, n_max=12, density=0.7)
        first = min_weight_perfect_matching(g)
        for _ in range(5):
            assert min_weight_perfect_matching(g) == first


class TestDifferential:
    def test_blossom_matches_brute_force(self):
        rng = np.random.default_rng(2024)
        feasible = 0
        for _ in range(600):
            g = random_graph(rng)
            a = min_weight_perfect_matching(g)
            b = brute_force_mwpm(g)
            assert (a is None) == (b is None)
            if a is not None:
                feasible += 1
                assert_valid_perfect(g, a)
                assert_valid_perfect(g, b)
                assert matching_weight(g, a) == matching_weight(g, b)
        assert feasible > 100  # the sweep must actually exercise the solver

    def test_metric_weights_medium_size(self):
        # planted points with taxicab metric, the decoder's weight shape
        rng = np.random.default_rng(31)
        for _ in range(40):
            n = int(rng.integers(6, 15)) & ~1
            pts = rng.integers(0, 12, size=(n, 2))
            edges = tuple(
                (u, v, int(abs(pts[u] - pts[v]).sum()))
                for u in range(n)
                for v in range(u + 1, n)
            )
            g = WeightedGraph(n, edges)
            a = min_weight_perfect_matching(g)
            b = brute_force_mwpm(g)
            assert matching_weight(g, a) == matching_weight(g, b)
