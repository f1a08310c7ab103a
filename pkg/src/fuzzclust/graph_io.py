"""Edge-list ingestion, graph cleaning, similarity construction and a
synthetic two-cluster Erdos-Renyi generator.

Random numbers for the generator come from numpy's Philox counter-based
bit generator. Each GeneratorSpec seed ``s`` keys three independent
streams, ``key = s + (stream << 64)``:

* stream 0: Bernoulli draws for cluster 1, one uniform per pair ``(i, j)``,
  ``i < j``, in lexicographic order; the pair becomes an edge iff ``u < p1``;
* stream 1: the same for cluster 2;
* stream 2: the ``k_inter`` inter-cluster pairs, drawn without replacement.

The exact stream is pinned by a golden test in ``tests/test_graph_io.py``.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .objective import SparseSimilarity


class ParseError(ValueError):
    """Malformed edge-list input; ``lineno`` is 1-based (0 if not line-specific)."""

    def __init__(self, message, lineno=0):
        super().__init__(f"line {lineno}: {message}" if lineno else message)
        self.lineno = lineno


class GeneratorError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph on nodes ``0..num_nodes-1``.

    ``edges`` is an ``(E, 2)`` int array with ``u < v`` in every row, sorted
    lexicographically and free of duplicates. ``origin[i]`` is the id that
    node ``i`` carried in the input it was parsed from.
    """

    num_nodes: int
    edges: np.ndarray
    origin: np.ndarray = field(default=None)

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if len(e):
            e = np.sort(e, axis=1)
            if np.any(e[:, 0] == e[:, 1]):
                raise ValueError("self-loops are not allowed")
            if e.min() < 0 or e.max() >= self.num_nodes:
                raise ValueError("edge endpoint out of range")
            n = np.int64(self.num_nodes)
            key = np.unique(e[:, 0] * n + e[:, 1])
            e = np.column_stack([key // n, key % n])
        object.__setattr__(self, "edges", e)
        origin = self.origin
        if origin is None:
            origin = np.arange(self.num_nodes, dtype=np.int64)
        origin = np.asarray(origin, dtype=np.int64)
        if origin.shape != (self.num_nodes,):
            raise ValueError("origin must have one entry per node")
        object.__setattr__(self, "origin", origin)

    @property
    def num_edges(self):
        return len(self.edges)

    def edge_set(self):
        return {(int(u), int(v)) for u, v in self.edges}

    def degrees(self):
        return np.bincount(self.edges.ravel(), minlength=self.num_nodes)

    def adjacency(self):
        n = self.num_nodes
        u, v = self.edges[:, 0], self.edges[:, 1]
        data = np.ones(2 * len(u))
        return sp.csr_matrix((data, (np.r_[u, v], np.r_[v, u])), shape=(n, n))

    def subgraph(self, keep):
        """Induced subgraph on the boolean mask ``keep``, ids recompacted in order."""
        keep = np.asarray(keep, dtype=bool)
        new_id = np.full(self.num_nodes, -1, dtype=np.int64)
        new_id[keep] = np.arange(int(keep.sum()))
        e = self.edges
        if len(e):
            e = e[keep[e[:, 0]] & keep[e[:, 1]]]
        return Graph(int(keep.sum()), new_id[e], self.origin[keep])

    def __eq__(self, other):
        return (isinstance(other, Graph) and self.num_nodes == other.num_nodes
                and np.array_equal(self.edges, other.edges))

    def __repr__(self):
        return f"Graph(num_nodes={self.num_nodes}, num_edges={self.num_edges})"


def parse_edge_list(stream):
    """Read a whitespace-separated ``source target`` edge list.

    Direction is discarded, duplicate edges and self-loops are dropped, and
    ids are compacted to ``0..N-1`` in order of first appearance.

    Returns
    -------
    graph : Graph
    remap : ndarray
        ``remap[new_id]`` is the original id.
    """
    ids = {}
    pairs = []
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise ParseError(f"expected two node ids, got {line!r}", lineno)
        try:
            a, b = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise ParseError(f"malformed node id in {line!r}", lineno) from None
        ia = ids.setdefault(a, len(ids))
        ib = ids.setdefault(b, len(ids))
        if ia != ib:
            pairs.append((ia, ib))
    if not ids:
        raise ParseError("empty edge list")
    remap = np.fromiter(ids.keys(), dtype=np.int64, count=len(ids))
    return Graph(len(ids), np.array(pairs, dtype=np.int64).reshape(-1, 2), remap), remap


def read_edge_list(path):
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh)


def format_edge_list(g):
    """Edge list text, one ``u v`` per line, sorted by ``(u, v)``."""
    return "".join(f"{u} {v}\n" for u, v in g.edges)


def write_edge_list(g, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_edge_list(g))


def write_labels(labels, path, node_ids=None):
    labels = np.asarray(labels)
    node_ids = np.arange(len(labels)) if node_ids is None else node_ids
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("node_id,label\n")
        for i, lab in zip(node_ids, labels):
            fh.write(f"{i},{lab}\n")


def largest_connected_component(g):
    """Induced subgraph on the largest connected component.

    Equal-size components are ranked by the smallest original id
    (``g.origin``) they contain.
    """
    if g.num_nodes == 0:
        raise ValueError("graph is empty")
    ncomp, comp = csgraph.connected_components(g.adjacency(), directed=False)
    sizes = np.bincount(comp, minlength=ncomp)
    min_origin = np.full(ncomp, np.iinfo(np.int64).max)
    np.minimum.at(min_origin, comp, g.origin)
    candidates = np.flatnonzero(sizes == sizes.max())
    best = candidates[np.argmin(min_origin[candidates])]
    return g.subgraph(comp == best)


def is_connected(g):
    if g.num_nodes == 0:
        return False
    n, _ = csgraph.connected_components(g.adjacency(), directed=False)
    return n == 1


def prune_degree_one(g):
    """Repeatedly delete every node of degree <= 1 until none is left."""
    keep = np.ones(g.num_nodes, dtype=bool)
    e = g.edges
    while True:
        deg = np.bincount(e.ravel(), minlength=g.num_nodes)
        drop = keep & (deg <= 1)
        if not drop.any():
            break
        keep &= ~drop
        if len(e):
            e = e[keep[e[:, 0]] & keep[e[:, 1]]]
    return g.subgraph(keep)


def build_similarity(g):
    """Adjacency matrix plus the identity: ``s_ij = 1`` iff ``i == j`` or ``(i, j)`` is an edge."""
    A = g.adjacency() + sp.identity(g.num_nodes, format="csr")
    return SparseSimilarity(A)


@dataclass(frozen=True)
class GeneratorSpec:
    n1: int
    p1: float
    n2: int
    p2: float
    k_inter: int
    seed: int = 0

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("cluster sizes must be positive")
        for p in (self.p1, self.p2):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"edge probability {p} outside [0, 1]")
        if not 0 <= self.k_inter <= self.n1 * self.n2:
            raise ValueError(f"k_inter must lie in [0, n1*n2 = {self.n1 * self.n2}]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned value")


def _stream(seed, stream):
    return np.random.Generator(np.random.Philox(key=int(seed) + (stream << 64)))


_ROW_CHUNK = 1 << 22


def erdos_renyi_edges(n, p, rng):
    """``G(n, p)`` by one Bernoulli draw per pair ``i < j`` in lexicographic order."""
    out = []
    i = 0
    while i < n - 1:
        # gather whole rows until the chunk holds ~_ROW_CHUNK pairs
        j_stop = i
        count = 0
        while j_stop < n - 1 and (count == 0 or count + (n - 1 - j_stop) <= _ROW_CHUNK):
            count += n - 1 - j_stop
            j_stop += 1
        u = rng.random(count)
        hits = np.flatnonzero(u < p)
        if len(hits):
            rows = np.arange(i, j_stop)
            lengths = n - 1 - rows
            starts = np.concatenate(([0], np.cumsum(lengths)[:-1]))
            r = np.searchsorted(starts, hits, side="right") - 1
            src = rows[r]
            dst = src + 1 + (hits - starts[r])
            out.append(np.column_stack([src, dst]))
        i = j_stop
    if not out:
        return np.zeros((0, 2), dtype=np.int64)
    return np.concatenate(out).astype(np.int64)


def generate_two_cluster_er(spec):
    """Two independent Erdos-Renyi clusters joined by ``k_inter`` random edges.

    Cluster 2 nodes are offset by ``n1``. After merging, degree <= 1 nodes are
    pruned iteratively and the result must be connected.

    Returns
    -------
    graph : Graph
        ``graph.origin`` holds the pre-pruning node ids.
    labels : ndarray of int
        1 or 2 for each surviving node.
    """
    e1 = erdos_renyi_edges(spec.n1, spec.p1, _stream(spec.seed, 0))
    e2 = erdos_renyi_edges(spec.n2, spec.p2, _stream(spec.seed, 1)) + spec.n1
    flat = _stream(spec.seed, 2).choice(spec.n1 * spec.n2, size=spec.k_inter, replace=False)
    inter = np.column_stack([flat // spec.n2, spec.n1 + flat % spec.n2]).astype(np.int64)
    n = spec.n1 + spec.n2
    g = Graph(n, np.concatenate([e1, e2, inter]))
    labels = np.r_[np.ones(spec.n1, dtype=int), np.full(spec.n2, 2)]

    pruned = prune_degree_one(g)
    kept = labels[pruned.origin]
    if not (np.any(kept == 1) and np.any(kept == 2)):
        raise GeneratorError("a cluster was pruned away entirely; "
                             "raise the edge probabilities or pick another seed")
    if not is_connected(pruned):
        raise GeneratorError("generated graph is disconnected after pruning; "
                             "use a different seed or a larger k_inter")
    return pruned, kept
