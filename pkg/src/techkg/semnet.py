"""Semantic term networks, Markov clustering, and topic-map exports.

Two construction routes are kept side by side: the cosine-threshold
network over term embeddings, and the semantic co-occurrence network
built from Tanimoto similarity of fuzzy document-membership vectors.
Both produce the same SemanticNetwork shape and feed the same MCL
clustering.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from .embeddings import DimensionMismatch, Embedding

log = logging.getLogger(__name__)


def _edge_key(u: str, v: str) -> tuple:
    return (u, v) if u <= v else (v, u)


@dataclass
class SemanticNetwork:
    nodes: frozenset
    edges: dict  # sorted (u, v) tuple -> weight in (0, 1]

    def __post_init__(self):
        self.nodes = frozenset(self.nodes)
        for (u, v), w in self.edges.items():
            if u == v:
                raise ValueError(f"self-loop on {u!r}")
            if (u, v) != _edge_key(u, v):
                raise ValueError(f"edge key {(u, v)!r} not in sorted order")
            if u not in self.nodes or v not in self.nodes:
                raise ValueError(f"edge {(u, v)!r} has endpoint outside nodes")
            if not (0.0 < w <= 1.0):
                raise ValueError(f"edge weight {w} outside (0, 1]")

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def neighbors(self, node: str) -> set:
        out = set()
        for u, v in self.edges:
            if u == node:
                out.add(v)
            elif v == node:
                out.add(u)
        return out

    def degree(self, node: str) -> int:
        return len(self.neighbors(node))


@dataclass(frozen=True)
class MembershipVector:
    term_id: str
    memberships: np.ndarray

    def __post_init__(self):
        vec = np.asarray(self.memberships, dtype=np.float64)
        if vec.ndim != 1:
            raise ValueError("memberships must be a 1-d vector")
        if vec.size and (vec.min() < 0.0 or vec.max() > 1.0):
            raise ValueError("membership entries must lie in [0, 1]")
        object.__setattr__(self, "memberships", vec)


@dataclass
class Clustering:
    clusters: tuple  # of frozensets, disjoint and covering
    converged: bool = True
    iterations: int = 0
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.clusters = tuple(frozenset(c) for c in self.clusters)
        index = {}
        for i, cluster in enumerate(self.clusters):
            if not cluster:
                raise ValueError("empty cluster")
            for node in cluster:
                if node in index:
                    raise ValueError(f"node {node!r} in two clusters")
                index[node] = i
        self._index = index

    def __len__(self):
        return len(self.clusters)

    def covers(self) -> frozenset:
        return frozenset(self._index)

    def cluster_of(self, node: str) -> int:
        return self._index[node]


def _stack_unit_vectors(embeddings: dict) -> tuple:
    ids = sorted(embeddings)
    dims = {embeddings[i].dim for i in ids}
    if len(dims) > 1:
        raise DimensionMismatch(f"mixed embedding dims: {sorted(dims)}")
    mat = np.stack([embeddings[i].values for i in ids])
    norms = np.linalg.norm(mat, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ValueError(f"zero-vector embedding for {ids[zero[0]]!r}")
    return ids, mat / norms[:, None]


def build_threshold_network(embeddings: dict, tau: float = 0.5) -> SemanticNetwork:
    """Edge {u,v} iff cosine_distance(u,v) <= tau; weight 1 - d/2."""
    if not 0.0 < tau < 2.0:
        raise ValueError(f"tau must lie in (0, 2), got {tau}")
    if not embeddings:
        return SemanticNetwork(frozenset(), {})
    ids, unit = _stack_unit_vectors(embeddings)
    dist = 1.0 - unit @ unit.T
    edges = {}
    for a in range(len(ids)):
        for b in range(a + 1, len(ids)):
            d = min(2.0, max(0.0, float(dist[a, b])))
            if d <= tau:
                edges[_edge_key(ids[a], ids[b])] = 1.0 - d / 2.0
    return SemanticNetwork(frozenset(ids), edges)


def membership_vector(term_emb: Embedding, doc_embs: list, term_id: str = "") -> MembershipVector:
    """Fuzzy membership of a term in each document: clamped cosine similarity.

    Document order must stay fixed across all terms of one build.
    """
    tvec = term_emb.values
    tnorm = float(np.linalg.norm(tvec))
    if tnorm == 0.0:
        raise ValueError("zero term vector")
    entries = np.empty(len(doc_embs), dtype=np.float64)
    for i, demb in enumerate(doc_embs):
        dvec = demb.values
        if dvec.shape != tvec.shape:
            raise DimensionMismatch(f"dims differ at doc {i}")
        dnorm = float(np.linalg.norm(dvec))
        if dnorm == 0.0:
            raise ValueError(f"zero document vector at index {i}")
        entries[i] = float(np.dot(tvec, dvec)) / (tnorm * dnorm)
    np.clip(entries, 0.0, 1.0, out=entries)
    return MembershipVector(term_id, entries)


def tanimoto(a: MembershipVector, b: MembershipVector) -> float:
    """(a.b) / (|a|^2 + |b|^2 - a.b) for nonnegative membership vectors."""
    va, vb = a.memberships, b.memberships
    if va.shape != vb.shape:
        raise DimensionMismatch(f"lengths differ: {va.size} vs {vb.size}")
    na2 = float(np.dot(va, va))
    nb2 = float(np.dot(vb, vb))
    if na2 == 0.0 or nb2 == 0.0:
        raise ValueError("tanimoto undefined for an all-zero vector")
    ab = float(np.dot(va, vb))
    return max(0.0, min(1.0, ab / (na2 + nb2 - ab)))


def build_cooccurrence_network(memberships: list, sigma: float = 0.5) -> SemanticNetwork:
    """Edge {u,v} iff tanimoto(u,v) >= sigma; the weight is that value."""
    if not 0.0 < sigma < 1.0:
        raise ValueError(f"sigma must lie in (0, 1), got {sigma}")
    by_id = {}
    for m in memberships:
        if not m.term_id:
            raise ValueError("membership vector missing term_id")
        if m.term_id in by_id:
            raise ValueError(f"duplicate term_id {m.term_id!r}")
        by_id[m.term_id] = m
    ids = sorted(by_id)
    edges = {}
    for a in range(len(ids)):
        for b in range(a + 1, len(ids)):
            t = tanimoto(by_id[ids[a]], by_id[ids[b]])
            if t >= sigma:
                edges[_edge_key(ids[a], ids[b])] = t
    return SemanticNetwork(frozenset(ids), edges)


def mcl_cluster(
    network: SemanticNetwork,
    inflation: float = 2.0,
    expansion: int = 2,
    prune_eps: float = 1e-5,
    max_iter: int = 100,
    tol: float = 1e-8,
) -> Clustering:
    """Markov clustering of the weighted network.

    Self-loops of weight 1 are added, the adjacency is column-normalized,
    and expansion/inflation alternate until the iterate moves less than
    tol in max-norm. Non-convergence is not an error: the clustering at
    the last iterate is returned with converged=False.
    """
    if inflation <= 1.0:
        raise ValueError("inflation must exceed 1")
    if expansion < 2:
        raise ValueError("expansion must be at least 2")
    if not network.nodes:
        return Clustering((), converged=True, iterations=0)

    ids = sorted(network.nodes)
    pos = {n: i for i, n in enumerate(ids)}
    n = len(ids)
    m = np.zeros((n, n), dtype=np.float64)
    for (u, v), w in network.edges.items():
        m[pos[u], pos[v]] = w
        m[pos[v], pos[u]] = w
    np.fill_diagonal(m, 1.0)
    m /= m.sum(axis=0)

    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        prev = m
        m = np.linalg.matrix_power(m, expansion)
        m **= inflation
        m[m < prune_eps] = 0.0
        sums = m.sum(axis=0)
        dead = sums == 0.0
        if dead.any():
            # a fully pruned column would break stochasticity; restore
            # its self-loop
            m[np.flatnonzero(dead), np.flatnonzero(dead)] = 1.0
            sums = m.sum(axis=0)
        m /= sums
        if np.max(np.abs(m - prev)) < tol:
            converged = True
            break
    if not converged:
        log.warning("MCL did not converge after %d iterations", max_iter)

    # Attractors are nodes with positive diagonal mass; mutually
    # attracting attractors form one attractor system.
    attractors = [i for i in range(n) if m[i, i] > 0.0]
    parent = {i: i for i in attractors}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in attractors:
        for k in attractors:
            if k > i and (m[i, k] > 0.0 or m[k, i] > 0.0):
                ri, rk = find(i), find(k)
                if ri != rk:
                    parent[max(ri, rk)] = min(ri, rk)

    systems: dict = {}
    for i in attractors:
        systems.setdefault(find(i), []).append(i)

    assignment = {}
    for j in range(n):
        best_root, best_mass = None, 0.0
        for root, members in sorted(systems.items()):
            mass = float(sum(m[i, j] for i in members))
            if mass > best_mass:
                best_root, best_mass = root, mass
        if best_root is None:
            # no attractor claims this node (only possible before
            # convergence); keep it as its own cluster
            assignment[j] = ("orphan", j)
        else:
            assignment[j] = ("system", best_root)

    grouped: dict = {}
    for j, key in assignment.items():
        grouped.setdefault(key, set()).add(ids[j])
    clusters = tuple(
        frozenset(members)
        for _, members in sorted(grouped.items(), key=lambda kv: min(kv[1]))
    )
    return Clustering(clusters, converged=converged, iterations=iterations)


def network_stats(network: SemanticNetwork, clustering: Clustering) -> dict:
    """Node/edge/cluster counts for the topic-map report."""
    if clustering.covers() != network.nodes:
        raise ValueError("clustering does not partition the network nodes")
    return {
        "node_count": network.node_count,
        "edge_count": network.edge_count,
        "cluster_count": len(clustering),
        "clusters_gt2": sum(1 for c in clustering.clusters if len(c) > 2),
    }


def network_to_json(network: SemanticNetwork, clustering: Clustering, labels: dict) -> dict:
    """UI-facing JSON: nodes carry label + cluster, edges carry weight."""
    if clustering.covers() != network.nodes:
        raise ValueError("clustering does not partition the network nodes")
    nodes = [
        {
            "id": node,
            "label": labels.get(node, node),
            "cluster": clustering.cluster_of(node),
        }
        for node in sorted(network.nodes)
    ]
    edges = [
        {"source": u, "target": v, "weight": w}
        for (u, v), w in sorted(network.edges.items())
    ]
    return {"nodes": nodes, "edges": edges}


def network_to_graphml(network: SemanticNetwork, clustering: Clustering, labels: dict) -> str:
    """GraphML with label/cluster node attributes and weighted edges."""
    if clustering.covers() != network.nodes:
        raise ValueError("clustering does not partition the network nodes")
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
        '  <key id="label" for="node" attr.name="label" attr.type="string"/>',
        '  <key id="cluster" for="node" attr.name="cluster" attr.type="int"/>',
        '  <key id="weight" for="edge" attr.name="weight" attr.type="double"/>',
        '  <graph edgedefault="undirected">',
    ]
    for node in sorted(network.nodes):
        lines.append(f"    <node id={quoteattr(node)}>")
        lines.append(
            f"      <data key=\"label\">{escape(labels.get(node, node))}</data>"
        )
        lines.append(
            f"      <data key=\"cluster\">{clustering.cluster_of(node)}</data>"
        )
        lines.append("    </node>")
    for (u, v), w in sorted(network.edges.items()):
        lines.append(
            f"    <edge source={quoteattr(u)} target={quoteattr(v)}>"
        )
        lines.append(f"      <data key=\"weight\">{w!r}</data>")
        lines.append("    </edge>")
    lines.append("  </graph>")
    lines.append("</graphml>")
    return "\n".join(lines) + "\n"
