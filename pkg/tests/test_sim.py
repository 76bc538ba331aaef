import numpy as np
import pytest

from splitsim import graphs as G, sim


def bfs_oracle(g, sources, limit):
    """Independent BFS oracle over adjacency sets."""
    dist = {v: 0 for v in sources}
    frontier = list(sources)
    d = 0
    while frontier and d < limit:
        d += 1
        nxt = []
        for v in frontier:
            for w in g.neighbors(v).tolist():
                if w not in dist:
                    dist[w] = d
                    nxt.append(w)
        frontier = nxt
    return dist


class HaltImmediately:
    def init(self, v, g):
        return None

    def step(self, v, state, inbox, stream, g):
        return state, {}

    def halted(self, v, state):
        return True


class SendIdOnce:
    def init(self, v, g):
        return {"sent": False, "got": []}

    def step(self, v, state, inbox, stream, g):
        state["got"].extend(inbox)
        if not state["sent"]:
            state["sent"] = True
            return state, {int(w): v for w in g.neighbors(v)}
        return state, {}

    def halted(self, v, state):
        return state["sent"]


class BarrierProbe:
    """Records what the inbox held during each step; a barrier violation would
    surface a round-0 message inside round 0's own inbox."""

    def init(self, v, g):
        return {"inboxes": [], "round": 0}

    def step(self, v, state, inbox, stream, g):
        state["inboxes"].append(list(inbox))
        state["round"] += 1
        out = {int(w): ("r", state["round"] - 1) for w in g.neighbors(v)}
        return state, out

    def halted(self, v, state):
        return state["round"] >= 3


class CoinFlip:
    def init(self, v, g):
        return {"flips": [], "round": 0}

    def step(self, v, state, inbox, stream, g):
        state["flips"].append(stream.randint(1000))
        state["round"] += 1
        return state, {}

    def halted(self, v, state):
        return state["round"] >= 2


class TestRunProtocol:
    def test_halt_immediately_zero_rounds(self):
        g = G.load_edge_list("0 1\n1 2")
        rep = sim.run_protocol(g, HaltImmediately(), sim.SimMode("LOCAL"), seed=1)
        assert rep.rounds == 0 and rep.bits_total == 0

    def test_send_id_once_congest(self):
        g = G.load_edge_list("0 1")
        rep = sim.run_protocol(g, SendIdOnce(), sim.SimMode("CONGEST", bandwidth_bits=64), seed=1)
        assert rep.rounds >= 1 and rep.violations == 0

    def test_determinism(self):
        g = G.generate(G.GraphGenSpec("gnp-capped", 20, 3, 2))
        r1 = sim.run_protocol(g, SendIdOnce(), sim.SimMode("LOCAL"), seed=5)
        r2 = sim.run_protocol(g, SendIdOnce(), sim.SimMode("LOCAL"), seed=5)
        assert r1.to_json() == r2.to_json()

    def test_barrier_semantics(self):
        g = G.load_edge_list("0 1")
        program = BarrierProbe()
        states = {}

        class Wrap(BarrierProbe):
            def init(self, v, gg):
                states[v] = super().init(v, gg)
                return states[v]

        sim.run_protocol(g, Wrap(), sim.SimMode("LOCAL"), seed=0)
        for v in (0, 1):
            inboxes = states[v]["inboxes"]
            assert inboxes[0] == []  # nothing delivered before the first barrier
            assert inboxes[1] and all(msg[1][1] == 0 for msg in inboxes[1])
            assert all(msg[1][1] == 1 for msg in inboxes[2])

    def test_round_cap(self):
        class Forever(HaltImmediately):
            def halted(self, v, state):
                return False

        g = G.load_edge_list("0 1")
        with pytest.raises(sim.RoundCapExceeded) as ei:
            sim.run_protocol(g, Forever(), sim.SimMode("LOCAL"), seed=0, max_rounds=5)
        assert ei.value.report.rounds == 5

    def test_randomness_isolation(self):
        # two components; rebinding node 0's stream must not change component {2,3}
        g = G.load_edge_list("0 1\n2 3")
        states_a, states_b = {}, {}

        def wrap(store):
            class W(CoinFlip):
                def init(self, v, gg):
                    store[v] = super().init(v, gg)
                    return store[v]
            return W()

        sim.run_protocol(g, wrap(states_a), sim.SimMode("LOCAL"), seed=7)
        sim.run_protocol(g, wrap(states_b), sim.SimMode("LOCAL"), seed=7,
                         node_salts={0: 12345})
        assert states_a[0]["flips"] != states_b[0]["flips"]
        assert states_a[2]["flips"] == states_b[2]["flips"]
        assert states_a[3]["flips"] == states_b[3]["flips"]

    def test_congest_violation_counted(self):
        class BigMessage(SendIdOnce):
            def step(self, v, state, inbox, stream, g):
                state, out = super().step(v, state, inbox, stream, g)
                return state, {w: b"x" * 100 for w in out}

        g = G.load_edge_list("0 1")
        rep = sim.run_protocol(g, BigMessage(), sim.SimMode("CONGEST", bandwidth_bits=16), seed=1)
        assert rep.violations == 2  # both directed messages exceed 16 bits


class TestComponents:
    def test_endpoints_of_path(self):
        g = G.load_edge_list("0 1\n1 2")
        comps = sim.connected_components(g, subset=[0, 2])
        assert sorted(len(c) for c in comps) == [1, 1]

    def test_empty_subset(self):
        g = G.load_edge_list("0 1")
        assert sim.connected_components(g, subset=[]) == []

    def test_k4_whole(self):
        k4 = G.generate(G.GraphGenSpec("d-regular", 4, 3, 19))
        comps = sim.connected_components(k4)
        assert len(comps) == 1 and len(comps[0]) == 4

    def test_matches_python_oracle(self):
        g = G.generate(G.GraphGenSpec("gnp-capped", 40, 2, 6))
        subset = [v for v in range(40) if v % 3 != 0]
        comps = sim.connected_components(g, subset)
        # oracle: union-find over induced edges
        parent = {v: v for v in subset}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        ss = set(subset)
        for u, v in zip(*g.edges()):
            if int(u) in ss and int(v) in ss:
                parent[find(int(u))] = find(int(v))
        from collections import defaultdict
        groups = defaultdict(set)
        for v in subset:
            groups[find(v)].add(v)
        assert sorted(map(sorted, (set(c.tolist()) for c in comps))) == \
            sorted(map(sorted, groups.values()))


class TestBall:
    def test_radius_zero(self):
        g = G.load_edge_list("0 1")
        assert sim.ball(g, 0, 0).tolist() == [0]

    def test_path_center(self):
        p5 = G.load_edge_list("0 1\n1 2\n2 3\n3 4")
        assert len(sim.ball(p5, 2, 1)) == 3

    def test_k4_radius_one(self):
        k4 = G.generate(G.GraphGenSpec("d-regular", 4, 3, 19))
        assert len(sim.ball(k4, 1, 1)) == 4

    def test_matches_bfs_oracle(self):
        g = G.generate(G.GraphGenSpec("gnp-capped", 50, 4, 3))
        for v in (0, 7, 23):
            for r in (0, 1, 2, 3):
                oracle = {w for w, d in bfs_oracle(g, [v], r).items()}
                assert set(sim.ball(g, v, r).tolist()) == oracle


class TestClusterDecompose:
    def _assert_invariants(self, g, node_set, dec):
        all_nodes = np.concatenate(dec.clusters) if dec.clusters else np.zeros(0, int)
        assert sorted(all_nodes.tolist()) == sorted(node_set)  # partition
        for members, center in zip(dec.clusters, dec.centers):
            dist = bfs_oracle(g, [center], dec.radius_bound)
            assert all(w in dist for w in members.tolist())  # radius bound (weakly)
        # same-color clusters more than `separation` apart
        for i in range(len(dec.clusters)):
            for j in range(i + 1, len(dec.clusters)):
                if dec.colors[i] != dec.colors[j]:
                    continue
                reach = bfs_oracle(g, dec.clusters[i].tolist(), dec.separation)
                assert not any(w in reach for w in dec.clusters[j].tolist())

    def test_single_node(self):
        g = G.Graph.from_edges(1, [], [])
        dec = sim.cluster_decompose(g, [0], separation=3, q_colors=1, radius_bound=2)
        assert len(dec.clusters) == 1 and dec.colors == [0]

    def test_far_apart_nodes_may_share_color(self):
        g = G.load_edge_list("\n".join(f"{i} {i+1}" for i in range(10)))
        dec = sim.cluster_decompose(g, [0, 10], separation=3, q_colors=1, radius_bound=0)
        assert len(dec.clusters) == 2
        assert dec.colors == [0, 0]

    def test_k4_invariants(self):
        k4 = G.generate(G.GraphGenSpec("d-regular", 4, 3, 19))
        dec = sim.cluster_decompose(k4, [0, 1, 2, 3], separation=3, q_colors=4, radius_bound=0)
        self._assert_invariants(k4, [0, 1, 2, 3], dec)

    def test_color_budget_error_reports_achieved(self):
        k4 = G.generate(G.GraphGenSpec("d-regular", 4, 3, 19))
        with pytest.raises(sim.ClusterColorBudget) as ei:
            sim.cluster_decompose(k4, [0, 1, 2, 3], separation=3, q_colors=1, radius_bound=0)
        assert ei.value.achieved == 4

    def test_random_graph_invariants(self):
        g = G.generate(G.GraphGenSpec("gnp-capped", 60, 4, 11))
        nodes = list(range(0, 60, 2))
        dec = sim.cluster_decompose(g, nodes, separation=2, q_colors=60, radius_bound=2)
        self._assert_invariants(g, nodes, dec)


def test_payload_bits():
    assert sim.payload_bits(None) == 0
    assert sim.payload_bits(True) == 1
    assert sim.payload_bits(0) == 1
    assert sim.payload_bits(255) == 8
    assert sim.payload_bits(1.5) == 64
    assert sim.payload_bits(b"ab") == 16
    assert sim.payload_bits((1, 255)) == 9


def test_report_json_stable_fields():
    rep = sim.RunReport(rounds=2, bits_total=10, bits_max_edge_round=5, violations=0, seed=3)
    doc = rep.to_json()
    for key in ("rounds", "bits_total", "bits_max_edge_round", "violations", "seed", "payload"):
        assert f'"{key}"' in doc
