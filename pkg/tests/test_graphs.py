import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from splitsim import graphs as G


def brute_adjacency(n, pairs):
    """Independent oracle: adjacency sets from an edge list."""
    adj = {v: set() for v in range(n)}
    for u, v in pairs:
        adj[u].add(v)
        adj[v].add(u)
    return adj


class TestLoadEdgeList:
    def test_empty_input(self):
        g = G.load_edge_list("")
        assert g.n == 0 and g.max_degree == 0 and g.m == 0

    def test_path_degrees_forced(self):
        g = G.load_edge_list("0 1\n1 2")
        assert g.n == 3 and g.max_degree == 2

    def test_symmetry_dedup(self):
        g = G.load_edge_list("0 1\n1 0")
        assert g.m == 1 and g.max_degree == 1

    def test_comments_and_compaction(self):
        g = G.load_edge_list("# header\n10 30\n30 20 # trailing\n")
        assert g.n == 3
        assert g.external_ids.tolist() == [10, 20, 30]

    def test_malformed_line_number(self):
        with pytest.raises(G.EdgeListParseError) as ei:
            G.load_edge_list("0 1\n1 2 3")
        assert ei.value.line_no == 2

    def test_self_loop_rejected_with_id(self):
        with pytest.raises(G.EdgeListParseError, match="id 7"):
            G.load_edge_list("7 7")

    def test_roundtrip(self):
        g = G.load_edge_list("0 1\n1 2\n2 3\n0 3")
        g2 = G.load_edge_list(G.dump_edge_list(g))
        assert np.array_equal(g.indices, g2.indices)


class TestGenerate:
    def test_k4_unique_3_regular(self):
        g = G.generate(G.GraphGenSpec("d-regular", 4, 3, 19))
        assert g.m == 6 and (g.degrees == 3).all()

    def test_gnp_empty(self):
        g = G.generate(G.GraphGenSpec("gnp-capped", 0, 5, 1))
        assert g.n == 0

    def test_d_regular_determinism(self):
        g1 = G.generate(G.GraphGenSpec("d-regular", 6, 2, 42))
        g2 = G.generate(G.GraphGenSpec("d-regular", 6, 2, 42))
        assert np.array_equal(g1.indices, g2.indices)
        assert np.array_equal(g1.indptr, g2.indptr)

    def test_d_regular_odd_rejected(self):
        with pytest.raises(G.GraphError):
            G.generate(G.GraphGenSpec("d-regular", 5, 3, 1))

    @pytest.mark.parametrize("n,d", [(10, 3), (50, 7), (200, 16)])
    def test_d_regular_exact(self, n, d):
        g = G.generate(G.GraphGenSpec("d-regular", n, d, 5))
        assert (g.degrees == d).all()
        g.validate()

    def test_gnp_hard_cap(self):
        g = G.generate(G.GraphGenSpec("gnp-capped", 300, 8, 3))
        assert g.max_degree <= 8
        g.validate()

    def test_gnp_determinism(self):
        a = G.generate(G.GraphGenSpec("gnp-capped", 120, 6, 9))
        b = G.generate(G.GraphGenSpec("gnp-capped", 120, 6, 9))
        assert np.array_equal(a.indices, b.indices)

    def test_degree_target_bound(self):
        with pytest.raises(G.GraphError):
            G.GraphGenSpec("d-regular", 4, 4, 1)


class TestBipartiteTranslation:
    def test_triangle_by_hand(self):
        # left copy of i adjacent to right copy of j iff ij is an edge
        k3 = G.load_edge_list("0 1\n1 2\n0 2")
        b = G.to_bipartite_split_instance(k3)
        assert b.n_left == 3 and b.n_right == 3
        assert b.delta_left == 2 and b.delta_right == 2
        expected = {0: {4, 5}, 1: {3, 5}, 2: {3, 4}}
        for i, nb in expected.items():
            assert set(b.neighbors(i).tolist()) == nb
        b.validate()

    def test_star_degrees(self):
        star = G.load_edge_list("0 1\n0 2\n0 3")
        b = G.to_bipartite_split_instance(star)
        assert b.degrees[0] == 3
        assert all(b.degrees[i] == 1 for i in (1, 2, 3))
        # right copies mirror left degrees
        assert b.degrees[4] == 3

    def test_empty(self):
        b = G.to_bipartite_split_instance(G.load_edge_list(""))
        assert b.n_left == 0 and b.n_right == 0

    def test_degree_preservation_random(self):
        g = G.generate(G.GraphGenSpec("gnp-capped", 60, 6, 4))
        b = G.to_bipartite_split_instance(g)
        assert np.array_equal(b.degrees[: g.n], g.degrees)
        assert np.array_equal(b.degrees[g.n:], g.degrees)


class TestEdgeIncidence:
    def test_single_edge(self):
        b = G.edge_incidence_instance(G.load_edge_list("0 1"))
        assert b.n_left == 2 and b.n_right == 1
        assert b.degrees[2] == 2 and b.delta_left == 1

    def test_triangle_by_hand(self):
        b = G.edge_incidence_instance(G.load_edge_list("0 1\n1 2\n0 2"))
        assert b.n_right == 3
        assert b.delta_left == 2 and b.delta_right == 2

    def test_p3_middle_degree(self):
        b = G.edge_incidence_instance(G.load_edge_list("0 1\n1 2"))
        assert b.n_right == 2
        assert b.degrees[1] == 2  # middle vertex sees both edges

    def test_degree_sum_identity(self):
        g = G.generate(G.GraphGenSpec("gnp-capped", 40, 5, 8))
        b = G.edge_incidence_instance(g)
        left_sum = int(b.degrees[: b.n_left].sum())
        right_sum = int(b.degrees[b.n_left:].sum())
        assert left_sum == 2 * g.m == right_sum


class TestInducedSubgraph:
    def test_two_adjacent_nodes_of_k4(self):
        k4 = G.generate(G.GraphGenSpec("d-regular", 4, 3, 19))
        sub, mapping = G.induced_subgraph(k4, nodes=[0, 1])
        assert sub.m == 1 and mapping.tolist() == [0, 1]

    def test_empty_keep(self):
        k4 = G.generate(G.GraphGenSpec("d-regular", 4, 3, 19))
        sub, _ = G.induced_subgraph(k4, nodes=[])
        assert sub.n == 0

    def test_c5_three_consecutive(self):
        c5 = G.load_edge_list("0 1\n1 2\n2 3\n3 4\n4 0")
        sub, _ = G.induced_subgraph(c5, nodes=[0, 1, 2])
        assert sub.m == 2 and sub.max_degree == 2

    def test_edge_subset(self):
        c5 = G.load_edge_list("0 1\n1 2\n2 3\n3 4\n4 0")
        sub, mapping = G.induced_subgraph(c5, edges=[0, 1])
        assert sub.m == 2 and len(mapping) == 3

    def test_unknown_id(self):
        k4 = G.generate(G.GraphGenSpec("d-regular", 4, 3, 19))
        with pytest.raises(G.GraphError):
            G.induced_subgraph(k4, nodes=[99])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 15), st.integers(0, 15)), max_size=40))
def test_from_edges_matches_brute_adjacency(pairs):
    pairs = [(u, v) for u, v in pairs if u != v]
    n = 16
    g = G.Graph.from_edges(n, [u for u, _ in pairs], [v for _, v in pairs])
    oracle = brute_adjacency(n, pairs)
    for v in range(n):
        assert set(g.neighbors(v).tolist()) == oracle[v]
    assert g.max_degree == (max(len(s) for s in oracle.values()) if n else 0)
    g.validate()


def test_bipartite_file_roundtrip():
    g = G.load_edge_list("0 1\n1 2\n0 2")
    b = G.edge_incidence_instance(g)
    b2 = G.load_bipartite(G.dump_bipartite(b))
    assert np.array_equal(b.indices, b2.indices)
    assert (b2.n_left, b2.n_right) == (b.n_left, b.n_right)


def test_bipartite_file_rejects_side_violation():
    with pytest.raises(G.EdgeListParseError):
        G.load_bipartite("bipartite 2 2\n0 1\n")
