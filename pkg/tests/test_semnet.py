import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from techkg.embeddings import Embedding, cosine_distance
from techkg.semnet import (
    Clustering,
    MembershipVector,
    SemanticNetwork,
    build_cooccurrence_network,
    build_threshold_network,
    mcl_cluster,
    membership_vector,
    network_stats,
    network_to_graphml,
    network_to_json,
    tanimoto,
)


def emb(*values):
    return Embedding(np.array(values, dtype=float), "test")


def member(term_id, *values):
    return MembershipVector(term_id, np.array(values, dtype=float))


def gram_vectors():
    """Three unit vectors with pairwise cosine distances 0.3, 0.3, 0.6."""
    gram = np.array([[1.0, 0.7, 0.7], [0.7, 1.0, 0.4], [0.7, 0.4, 1.0]])
    rows = np.linalg.cholesky(gram)
    return {f"t{i}": Embedding(rows[i], "test") for i in range(3)}


class TestThresholdNetwork:
    def test_identical_embeddings_max_weight(self):
        net = build_threshold_network(
            {"a": emb(1.0, 0.0), "b": emb(1.0, 0.0)}, tau=0.5
        )
        assert net.edges == {("a", "b"): 1.0}

    def test_orthogonal_no_edge_at_default_tau(self):
        net = build_threshold_network(
            {"a": emb(1.0, 0.0), "b": emb(0.0, 1.0)}, tau=0.5
        )
        assert net.edges == {}
        assert net.nodes == {"a", "b"}

    def test_prescribed_distances_give_exact_edge_set(self):
        vecs = gram_vectors()
        # brute-force oracle over all pairs with the scalar distance
        expected = set()
        ids = sorted(vecs)
        for i in range(3):
            for j in range(i + 1, 3):
                if cosine_distance(vecs[ids[i]], vecs[ids[j]]) <= 0.5:
                    expected.add((ids[i], ids[j]))
        net = build_threshold_network(vecs, tau=0.5)
        assert set(net.edges) == expected == {("t0", "t1"), ("t0", "t2")}

    def test_weights_map_distance(self):
        vecs = gram_vectors()
        net = build_threshold_network(vecs, tau=0.5)
        for (u, v), w in net.edges.items():
            d = cosine_distance(vecs[u], vecs[v])
            assert abs(w - (1.0 - d / 2.0)) < 1e-9
            assert 0.0 < w <= 1.0

    def test_rescaling_invariance(self):
        vecs = gram_vectors()
        baseline = set(build_threshold_network(vecs, tau=0.5).edges)
        rng = np.random.default_rng(7)
        for _ in range(50):
            scaled = {
                k: Embedding(v.values * rng.uniform(1e-3, 1e3), "test")
                for k, v in vecs.items()
            }
            assert set(build_threshold_network(scaled, tau=0.5).edges) == baseline

    def test_bad_tau_rejected(self):
        with pytest.raises(ValueError):
            build_threshold_network({"a": emb(1.0)}, tau=0.0)
        with pytest.raises(ValueError):
            build_threshold_network({"a": emb(1.0)}, tau=2.0)

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError):
            build_threshold_network({"a": emb(0.0, 0.0), "b": emb(1.0, 0.0)})

    def test_mixed_dims_rejected(self):
        with pytest.raises(Exception):
            build_threshold_network({"a": emb(1.0), "b": emb(1.0, 0.0)})


class TestMembership:
    def test_identical_doc_entry_one(self):
        mv = membership_vector(emb(1.0, 1.0), [emb(1.0, 1.0)], "t")
        assert mv.memberships[0] == pytest.approx(1.0)

    def test_orthogonal_clamped_to_zero(self):
        mv = membership_vector(emb(1.0, 0.0), [emb(0.0, 1.0), emb(-1.0, 0.0)], "t")
        assert mv.memberships.tolist() == [0.0, 0.0]

    def test_reference_value(self):
        s = 1.0 / math.sqrt(2.0)
        mv = membership_vector(emb(1.0, 0.0), [emb(s, s)], "t")
        assert abs(mv.memberships[0] - s) < 1e-12

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError):
            membership_vector(emb(0.0, 0.0), [emb(1.0, 0.0)], "t")


class TestTanimoto:
    def test_self_similarity(self):
        a = member("a", 0.2, 0.8, 0.5)
        assert tanimoto(a, a) == 1.0

    def test_disjoint_supports(self):
        assert tanimoto(member("a", 1.0, 0.0), member("b", 0.0, 1.0)) == 0.0

    def test_reference_value(self):
        # (1*1 + 0*1) / (1 + 2 - 1) = 0.5
        assert tanimoto(member("a", 1.0, 0.0), member("b", 1.0, 1.0)) == 0.5

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            tanimoto(member("a", 0.0, 0.0), member("b", 1.0, 0.0))

    def test_length_mismatch_rejected(self):
        with pytest.raises(Exception):
            tanimoto(member("a", 1.0), member("b", 1.0, 0.0))


# subnormal entries can square to zero, leaving the norm undefined;
# the domain is vectors whose float64 squared norm is still positive
_usable = st.lists(st.floats(0, 1), min_size=2, max_size=8).filter(
    lambda v: float(np.dot(v, v)) > 0.0
)


@given(_usable, _usable)
def test_tanimoto_symmetric_and_bounded(a, b):
    if len(a) != len(b):
        return
    ma, mb = member("a", *a), member("b", *b)
    t1, t2 = tanimoto(ma, mb), tanimoto(mb, ma)
    assert t1 == t2
    assert 0.0 <= t1 <= 1.0


class TestCooccurrenceNetwork:
    def test_identical_memberships_weight_one(self):
        net = build_cooccurrence_network(
            [member("a", 0.3, 0.7), member("b", 0.3, 0.7)], sigma=0.5
        )
        assert net.edges == {("a", "b"): 1.0}

    def test_disjoint_supports_never_connect(self):
        net = build_cooccurrence_network(
            [member("a", 1.0, 0.0), member("b", 0.0, 1.0)], sigma=0.1
        )
        assert net.edges == {}

    def test_three_term_path(self):
        # binary memberships over ranges {0..3}, {1..4}, {2..5}:
        # tanimoto(a,b) = tanimoto(b,c) = 3/5, tanimoto(a,c) = 2/6,
        # so sigma 0.5 keeps exactly the two chain edges
        def block(lo, hi):
            v = [0.0] * 6
            for i in range(lo, hi + 1):
                v[i] = 1.0
            return v

        a = member("a", *block(0, 3))
        b = member("b", *block(1, 4))
        c = member("c", *block(2, 5))
        assert tanimoto(a, b) == pytest.approx(0.6)
        assert tanimoto(b, c) == pytest.approx(0.6)
        assert tanimoto(a, c) == pytest.approx(1.0 / 3.0)
        net = build_cooccurrence_network([a, b, c], sigma=0.5)
        assert set(net.edges) == {("a", "b"), ("b", "c")}

    def test_bad_sigma_rejected(self):
        with pytest.raises(ValueError):
            build_cooccurrence_network([member("a", 1.0)], sigma=0.0)
        with pytest.raises(ValueError):
            build_cooccurrence_network([member("a", 1.0)], sigma=1.0)

    def test_duplicate_term_id_rejected(self):
        with pytest.raises(ValueError):
            build_cooccurrence_network(
                [member("a", 1.0), member("a", 1.0)], sigma=0.5
            )


# --- MCL ---------------------------------------------------------------


def network(nodes, edge_list):
    edges = {}
    for u, v, w in edge_list:
        edges[(u, v) if u <= v else (v, u)] = w
    return SemanticNetwork(frozenset(nodes), edges)


def clique_pair():
    """Two 5-cliques joined by one bridge edge."""
    nodes = [f"n{i}" for i in range(10)]
    edges = []
    for block in (range(0, 5), range(5, 10)):
        block = list(block)
        for i in range(len(block)):
            for j in range(i + 1, len(block)):
                edges.append((f"n{block[i]}", f"n{block[j]}", 1.0))
    edges.append(("n4", "n5", 1.0))
    return network(nodes, edges)


def reference_mcl(net, inflation=2.0, prune_eps=1e-5, tol=1e-8, max_iter=100):
    """Independent pure-python MCL used as the comparison oracle."""
    ids = sorted(net.nodes)
    idx = {n: i for i, n in enumerate(ids)}
    n = len(ids)
    cols = [[0.0] * n for _ in range(n)]  # cols[j][i] = M[i][j]
    for (u, v), w in net.edges.items():
        cols[idx[u]][idx[v]] = w
        cols[idx[v]][idx[u]] = w
    for j in range(n):
        cols[j][j] = 1.0
        s = sum(cols[j])
        cols[j] = [x / s for x in cols[j]]

    for _ in range(max_iter):
        new_cols = []
        for j in range(n):
            col = [0.0] * n
            for k in range(n):
                cjk = cols[j][k]
                if cjk:
                    colk = cols[k]
                    for i in range(n):
                        col[i] += colk[i] * cjk
            col = [x * x for x in col]
            col = [0.0 if x < prune_eps else x for x in col]
            s = sum(col)
            if s == 0.0:
                col[j] = 1.0
                s = 1.0
            new_cols.append([x / s for x in col])
        delta = max(
            abs(new_cols[j][i] - cols[j][i]) for j in range(n) for i in range(n)
        )
        cols = new_cols
        if delta < tol:
            break

    attractors = [i for i in range(n) if cols[i][i] > 0.0]
    parent = {i: i for i in attractors}

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for i in attractors:
        for k in attractors:
            if k > i and (cols[k][i] > 0.0 or cols[i][k] > 0.0):
                ri, rk = find(i), find(k)
                if ri != rk:
                    parent[max(ri, rk)] = min(ri, rk)
    systems = {}
    for i in attractors:
        systems.setdefault(find(i), []).append(i)

    groups = {}
    for j in range(n):
        best, best_mass = None, 0.0
        for root in sorted(systems):
            mass = sum(cols[j][i] for i in systems[root])
            if mass > best_mass:
                best, best_mass = root, mass
        key = ("s", best) if best is not None else ("o", j)
        groups.setdefault(key, set()).add(ids[j])
    return {frozenset(g) for g in groups.values()}


class TestMcl:
    def test_two_cliques_split(self):
        result = mcl_cluster(clique_pair())
        assert result.converged
        assert result.iterations < 100
        got = {frozenset(c) for c in result.clusters}
        assert got == {
            frozenset(f"n{i}" for i in range(5)),
            frozenset(f"n{i}" for i in range(5, 10)),
        }

    def test_matches_reference_on_cliques(self):
        net = clique_pair()
        assert {frozenset(c) for c in mcl_cluster(net).clusters} == reference_mcl(net)

    def test_edgeless_graph_singletons(self):
        net = network([f"x{i}" for i in range(6)], [])
        result = mcl_cluster(net)
        assert len(result.clusters) == 6
        assert all(len(c) == 1 for c in result.clusters)

    def test_single_clique_single_cluster(self):
        nodes = ["a", "b", "c", "d"]
        edges = [
            (u, v, 1.0) for i, u in enumerate(nodes) for v in nodes[i + 1 :]
        ]
        result = mcl_cluster(network(nodes, edges))
        assert len(result.clusters) == 1
        assert result.clusters[0] == frozenset(nodes)

    def test_empty_network(self):
        result = mcl_cluster(SemanticNetwork(frozenset(), {}))
        assert result.clusters == ()

    def test_partition_property_random_graphs(self):
        rng = np.random.default_rng(11)
        for trial in range(30):
            n = int(rng.integers(2, 15))
            nodes = [f"v{i}" for i in range(n)]
            edges = []
            for i in range(n):
                for j in range(i + 1, n):
                    if rng.random() < 0.3:
                        edges.append((nodes[i], nodes[j], float(rng.uniform(0.1, 1.0))))
            net = network(nodes, edges)
            result = mcl_cluster(net)
            assert result.covers() == net.nodes
            assert {frozenset(c) for c in result.clusters} == reference_mcl(net), (
                f"trial {trial} diverged from the reference implementation"
            )

    def test_label_permutation_equivariance(self):
        net = clique_pair()
        mapping = {f"n{i}": f"z{9 - i}" for i in range(10)}
        renamed = network(
            [mapping[n] for n in net.nodes],
            [(mapping[u], mapping[v], w) for (u, v), w in net.edges.items()],
        )
        base = {frozenset(mapping[x] for x in c) for c in mcl_cluster(net).clusters}
        got = {frozenset(c) for c in mcl_cluster(renamed).clusters}
        assert got == base

    def test_deterministic(self):
        net = clique_pair()
        a = mcl_cluster(net)
        b = mcl_cluster(net)
        assert a.clusters == b.clusters

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            mcl_cluster(clique_pair(), inflation=1.0)
        with pytest.raises(ValueError):
            mcl_cluster(clique_pair(), expansion=1)


class TestStats:
    def test_clique_pair_counts(self):
        net = clique_pair()
        clustering = mcl_cluster(net)
        assert network_stats(net, clustering) == {
            "node_count": 10,
            "edge_count": 21,
            "cluster_count": 2,
            "clusters_gt2": 2,
        }

    def test_empty(self):
        stats = network_stats(
            SemanticNetwork(frozenset(), {}), Clustering(())
        )
        assert stats == {
            "node_count": 0,
            "edge_count": 0,
            "cluster_count": 0,
            "clusters_gt2": 0,
        }

    def test_report_fields_match_published_shape(self):
        # the production corpus reported {708, 2836, 120, 60}; the field
        # set, not the values, is the contract
        keys = set(
            network_stats(SemanticNetwork(frozenset(), {}), Clustering(()))
        )
        assert keys == {"node_count", "edge_count", "cluster_count", "clusters_gt2"}

    def test_mismatch_rejected(self):
        net = network(["a", "b"], [("a", "b", 1.0)])
        with pytest.raises(ValueError):
            network_stats(net, Clustering((frozenset(["a"]),)))


class TestExports:
    def _fixture(self):
        net = clique_pair()
        clustering = mcl_cluster(net)
        labels = {n: n.upper() for n in net.nodes}
        return net, clustering, labels

    def test_json_shape(self):
        net, clustering, labels = self._fixture()
        out = network_to_json(net, clustering, labels)
        assert len(out["nodes"]) == 10
        assert len(out["edges"]) == 21
        assert out["nodes"] == sorted(out["nodes"], key=lambda n: n["id"])
        first = out["nodes"][0]
        assert set(first) == {"id", "label", "cluster"}
        assert first["label"] == first["id"].upper()
        clusters = {n["cluster"] for n in out["nodes"]}
        assert clusters == {0, 1}
        edge = out["edges"][0]
        assert set(edge) == {"source", "target", "weight"}

    def test_graphml_parses_and_counts(self):
        net, clustering, labels = self._fixture()
        xml = network_to_graphml(net, clustering, labels)
        root = ET.fromstring(xml)
        ns = {"g": "http://graphml.graphdrawing.org/xmlns"}
        nodes = root.findall(".//g:node", ns)
        edges = root.findall(".//g:edge", ns)
        assert len(nodes) == 10
        assert len(edges) == 21
        data = nodes[0].findall("g:data", ns)
        assert {d.get("key") for d in data} == {"label", "cluster"}

    def test_graphml_escapes_labels(self):
        net = network(["a"], [])
        xml = network_to_graphml(
            net, Clustering((frozenset(["a"]),)), {"a": 'x < y & "z"'}
        )
        ET.fromstring(xml)  # must stay well-formed
