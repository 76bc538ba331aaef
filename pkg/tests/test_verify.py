import json
import math

import numpy as np
import pytest

from splitsim import coloring as C, graphs as G, verify


class TestCheckEdgeColoring:
    def test_p3_distinct_passes(self):
        p3 = G.load_edge_list("0 1\n1 2")
        ec = C.EdgeColoring(*p3.edges(), colors=np.array([1, 2]), palette=2)
        assert verify.check_edge_coloring(p3, ec, budget=2).passed

    def test_p3_clash_fails_at_shared_node(self):
        p3 = G.load_edge_list("0 1\n1 2")
        ec = C.EdgeColoring(*p3.edges(), colors=np.array([1, 1]), palette=1)
        rep = verify.check_edge_coloring(p3, ec, budget=2)
        assert not rep.passed and rep.worst_id == 1

    def test_budget_enforced(self):
        p3 = G.load_edge_list("0 1\n1 2")
        ec = C.EdgeColoring(*p3.edges(), colors=np.array([1, 2]), palette=2)
        assert not verify.check_edge_coloring(p3, ec, budget=1).passed

    def test_incomplete_rejected(self):
        p3 = G.load_edge_list("0 1\n1 2")
        ec = C.EdgeColoring(*p3.edges(), colors=np.array([-1, 2]), palette=1)
        with pytest.raises(verify.CheckError):
            verify.check_edge_coloring(p3, ec, budget=2)


class TestCheckListColoring:
    def test_disjoint_first_color_passes(self):
        g = G.load_edge_list("0 1")
        inst = C.ListInstance(g, [[0, 1], [2, 3]])
        assert verify.check_list_coloring(inst, np.array([0, 2])).passed

    def test_shared_color_on_edge_fails(self):
        g = G.load_edge_list("0 1")
        inst = C.ListInstance(g, [[0, 1], [0, 3]])
        rep = verify.check_list_coloring(inst, np.array([0, 0]))
        assert not rep.passed and rep.detail["monochromatic_edges"] == 1

    def test_off_list_color_fails(self):
        g = G.load_edge_list("0 1")
        inst = C.ListInstance(g, [[0, 1], [0, 3]])
        rep = verify.check_list_coloring(inst, np.array([7, 3]))
        assert not rep.passed and rep.detail["off_list_nodes"] == 1


class TestComponentStats:
    def test_empty_bad_sets(self):
        g = G.load_edge_list("0 1")
        stats = verify.component_stats(g, [[], []])
        assert stats.max_size == 0 and stats.sizes_per_set == [[], []]

    def test_single_bad_node(self):
        star = G.load_edge_list("0 1\n0 2\n0 3")
        stats = verify.component_stats(g := star, [[1]])
        # component is the bad node plus its neighborhood: {1, 0}
        assert stats.max_size == 2

    def test_histogram(self):
        g = G.load_edge_list("0 1\n2 3\n4 5")
        stats = verify.component_stats(g, [[0], [2, 4]])
        assert stats.max_size == 2
        assert stats.histogram == {2: 3}
        assert json.loads(stats.to_json())["max_size"] == 2


class TestChernoffBound:
    def test_z_zero_vacuous(self):
        assert verify.chernoff_bound(10, 2, 0) == 2.0

    def test_hand_value(self):
        assert verify.chernoff_bound(300, 3, 10) == pytest.approx(2 * math.exp(-1 / 3))

    def test_monotone_in_z(self):
        values = [verify.chernoff_bound(100, 2, z) for z in range(0, 51, 5)]
        assert all(a >= b for a, b in zip(values, values[1:]))

    def test_precondition(self):
        with pytest.raises(verify.CheckError):
            verify.chernoff_bound(10, 5, 3)  # z > N/k

    def test_dominates_monte_carlo_small_grid(self):
        # frequency of |Bin(N,1/k) - N/k| > z stays below the bound + 3 SE
        r = np.random.default_rng(1234)
        trials = 20_000
        for n_var, k, z in [(30, 2, 5), (60, 3, 6), (120, 2, 10)]:
            x = r.binomial(n_var, 1.0 / k, trials)
            freq = float(np.mean(np.abs(x - n_var / k) > z))
            se = math.sqrt(max(freq * (1 - freq), 1e-12) / trials)
            assert freq <= verify.chernoff_bound(n_var, k, z) + 3 * se


class TestCheckDefective:
    def test_proper_coloring_zero_defect(self):
        c4 = G.load_edge_list("0 1\n1 2\n2 3\n3 0")
        rep = verify.check_defective(c4, np.array([0, 1, 0, 1]), 2, 0.5)
        assert rep.passed and rep.max_value == 0

    def test_monochromatic_k4_fails(self):
        k4 = G.generate(G.GraphGenSpec("d-regular", 4, 3, 19))
        rep = verify.check_defective(k4, np.zeros(4, dtype=np.int64), 2, 0.5)
        assert not rep.passed  # defect 3 > 1.5*3/2


def test_check_report_json_contract():
    g = G.load_edge_list("0 1")
    inst = C.ListInstance(g, [[0, 1], [2, 3]])
    rep = verify.check_list_coloring(inst, np.array([0, 2]))
    doc = json.loads(rep.to_json())
    for key in ("pass", "kind", "worst", "max", "mean", "histogram", "detail"):
        assert key in doc
