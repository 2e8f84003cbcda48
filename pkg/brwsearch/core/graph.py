"""
Graph representation and degree statistics.

This module provides the undirected simple graph on which searches take
place, together with every degree-derived statistic the reduced model
needs: the degree profile (degree set, degree classes, degree distribution,
degree neighborhoods), the joint degree matrix J, its row-normalized
conditional form J~, and the degree assortativity.
"""
import hashlib
import logging
from fractions import Fraction
from pathlib import Path
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from brwsearch.core.errors import (
    DegenerateGraphError,
    EdgeListError,
    GraphError,
    UndefinedAssortativityError,
)


# Configure logging
logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


class Graph:
    """Immutable undirected simple graph over dense node ids 0..n-1.

    External node ids (as read from an edge list or a networkx graph) are
    kept in a side map so matrices stay indexable by position.
    """

    def __init__(
        self,
        n: int,
        edges: Iterable[Edge],
        node_ids: Optional[Sequence[Hashable]] = None,
    ):
        """Initialize the graph.

        Args:
            n: Number of nodes
            edges: Unordered node pairs; duplicates collapse, orientation is ignored
            node_ids: External id of each node (defaults to 0..n-1)

        Raises:
            GraphError: On self-loops, out-of-range ids or a bad id map
        """
        if n < 0:
            raise GraphError(f"node count must be nonnegative, got {n}")

        edge_set = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) out of range for n={n}")
            edge_set.add((u, v) if u < v else (v, u))

        if node_ids is None:
            node_ids = range(n)
        node_ids = tuple(node_ids)
        if len(node_ids) != n:
            raise GraphError(f"expected {n} node ids, got {len(node_ids)}")

        adjacency: List[List[int]] = [[] for _ in range(n)]
        for u, v in edge_set:
            adjacency[u].append(v)
            adjacency[v].append(u)

        self._n = n
        self._edges: Tuple[Edge, ...] = tuple(sorted(edge_set))
        self._adjacency: Tuple[Tuple[int, ...], ...] = tuple(
            tuple(sorted(nbrs)) for nbrs in adjacency
        )
        degrees = np.fromiter((len(a) for a in adjacency), dtype=np.int64, count=n)
        degrees.flags.writeable = False
        self._degrees = degrees
        self._node_ids = node_ids

    @property
    def n(self) -> int:
        """Number of nodes."""
        return self._n

    @property
    def m(self) -> int:
        """Number of edges."""
        return len(self._edges)

    @property
    def edges(self) -> Tuple[Edge, ...]:
        """Edges as sorted (u, v) pairs with u < v."""
        return self._edges

    @property
    def adjacency(self) -> Tuple[Tuple[int, ...], ...]:
        """Sorted neighbor tuples, indexed by node."""
        return self._adjacency

    @property
    def degrees(self) -> np.ndarray:
        """Read-only degree array."""
        return self._degrees

    @property
    def node_ids(self) -> Tuple[Hashable, ...]:
        """External id of each node."""
        return self._node_ids

    def neighbors(self, v: int) -> Tuple[int, ...]:
        """Return the neighbors of node v."""
        return self._adjacency[v]

    def degree(self, v: int) -> int:
        """Return the degree of node v."""
        return int(self._degrees[v])

    def has_edge(self, u: int, v: int) -> bool:
        """Check whether {u, v} is an edge."""
        return v in self._adjacency[u]

    def to_networkx(self) -> nx.Graph:
        """Convert to a networkx graph over the dense ids."""
        graph = nx.Graph()
        graph.add_nodes_from(range(self._n))
        graph.add_edges_from(self._edges)
        return graph

    @classmethod
    def from_networkx(cls, graph: nx.Graph) -> "Graph":
        """Build a graph from a networkx graph, compacting sorted node labels.

        Args:
            graph: Undirected networkx graph without self-loops

        Returns:
            Graph whose node_ids are the original networkx labels
        """
        labels = sorted(graph.nodes())
        position = {label: i for i, label in enumerate(labels)}
        edges = ((position[u], position[v]) for u, v in graph.edges())
        return cls(len(labels), edges, node_ids=labels)

    def components(self) -> List[List[int]]:
        """Connected components, largest first, ties by smallest node id.

        Returns:
            List of sorted node lists
        """
        comps = [sorted(c) for c in nx.connected_components(self.to_networkx())]
        comps.sort(key=lambda c: (-len(c), c[0]))
        return comps

    def is_connected(self) -> bool:
        """Check whether the graph is connected (and nonempty)."""
        return self._n > 0 and nx.is_connected(self.to_networkx())

    def subgraph(self, nodes: Iterable[int]) -> "Graph":
        """Induced subgraph with ids remapped in sorted order.

        The external id map of the result points at this graph's external ids.
        """
        keep = sorted(set(int(v) for v in nodes))
        position = {v: i for i, v in enumerate(keep)}
        edges = (
            (position[u], position[v])
            for u, v in self._edges
            if u in position and v in position
        )
        return Graph(len(keep), edges, node_ids=[self._node_ids[v] for v in keep])

    def with_edges(self, edges: Iterable[Edge]) -> "Graph":
        """Return a graph on the same nodes with a replaced edge set."""
        return Graph(self._n, edges, node_ids=self._node_ids)

    def fingerprint(self) -> str:
        """Stable SHA-256 digest of the node count and edge set."""
        digest = hashlib.sha256(f"n={self._n};".encode())
        for u, v in self._edges:
            digest.update(f"{u},{v};".encode())
        return digest.hexdigest()

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Graph):
            return (
                self._n == other._n
                and self._edges == other._edges
                and self._node_ids == other._node_ids
            )
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self._n, self._edges))

    def __repr__(self) -> str:
        return f"Graph(n={self._n}, m={self.m})"


def load_edge_list(text: str) -> Graph:
    """Parse an edge-list document.

    One edge per line as two whitespace-separated integer ids; ``#`` starts
    a comment. Node ids are compacted to 0..n-1 in sorted order of the
    external ids, which are retained as ``node_ids``.

    Args:
        text: Edge-list document

    Returns:
        Graph with deduplicated undirected edges

    Raises:
        EdgeListError: On self-loops, unparseable tokens or malformed lines
    """
    pairs: List[Tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise EdgeListError(lineno, f"expected two node ids, got {len(tokens)} tokens")
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise EdgeListError(lineno, f"unparseable node id in {line!r}") from None
        if u == v:
            raise EdgeListError(lineno, f"self-loop at node {u}")
        pairs.append((u, v))

    labels = sorted({x for pair in pairs for x in pair})
    position = {label: i for i, label in enumerate(labels)}
    graph = Graph(
        len(labels),
        ((position[u], position[v]) for u, v in pairs),
        node_ids=labels,
    )
    logger.debug(f"Parsed edge list: {graph}")
    return graph


def dump_edge_list(graph: Graph) -> str:
    """Serialize a graph as an edge-list document using external ids.

    Isolated nodes cannot be expressed in this format and are dropped.
    """
    ids = graph.node_ids
    lines = [f"# n={graph.n} m={graph.m}"]
    lines.extend(f"{ids[u]} {ids[v]}" for u, v in graph.edges)
    return "\n".join(lines) + "\n"


def read_edge_list(path: Union[str, Path]) -> Graph:
    """Read an edge-list file."""
    return load_edge_list(Path(path).read_text(encoding="utf-8"))


def write_edge_list(path: Union[str, Path], graph: Graph) -> None:
    """Write a graph to an edge-list file."""
    Path(path).write_text(dump_edge_list(graph), encoding="utf-8")


class DegreeProfile:
    """Degree statistics of a graph.

    Attributes:
        degrees: Degree of every node
        degree_set: Sorted distinct degrees
        index: Map from degree to its position in degree_set
        classes: Map from degree k to the nodes of degree k
        class_sizes: |V_k| aligned with degree_set
        distribution: p(k) = |V_k| / n aligned with degree_set
        neighborhoods: n x delta matrix with entry (v, index[l]) = n_l(v)
    """

    def __init__(self, graph: Graph):
        """Compute the profile of a nonempty graph.

        Args:
            graph: Graph to profile

        Raises:
            GraphError: If the graph has no nodes
        """
        if graph.n == 0:
            raise GraphError("degree profile of an empty graph")

        degrees = graph.degrees
        self.n = graph.n
        self.degrees = degrees
        self.degree_set: Tuple[int, ...] = tuple(int(k) for k in np.unique(degrees))
        self.index: Dict[int, int] = {k: i for i, k in enumerate(self.degree_set)}
        self.classes: Dict[int, Tuple[int, ...]] = {
            k: tuple(int(v) for v in np.flatnonzero(degrees == k))
            for k in self.degree_set
        }
        self.class_sizes = np.array(
            [len(self.classes[k]) for k in self.degree_set], dtype=np.int64
        )
        self.distribution = self.class_sizes / float(graph.n)

        # Degree position of every node, then scatter neighbor positions.
        positions = np.searchsorted(np.asarray(self.degree_set), degrees)
        neighborhoods = np.zeros((graph.n, self.delta), dtype=np.int64)
        if graph.m:
            edges = np.asarray(graph.edges, dtype=np.int64)
            np.add.at(neighborhoods, (edges[:, 0], positions[edges[:, 1]]), 1)
            np.add.at(neighborhoods, (edges[:, 1], positions[edges[:, 0]]), 1)
        neighborhoods.flags.writeable = False
        self.positions = positions
        self.neighborhoods = neighborhoods

    @property
    def delta(self) -> int:
        """Number of distinct degrees."""
        return len(self.degree_set)

    @property
    def d_max(self) -> int:
        """Maximum degree."""
        return self.degree_set[-1]

    @property
    def max_nodes(self) -> Tuple[int, ...]:
        """Nodes of maximum degree (the absorbing set of the walk)."""
        return self.classes[self.d_max]

    @property
    def transient_nodes(self) -> Tuple[int, ...]:
        """Nodes below maximum degree."""
        return tuple(int(v) for v in np.flatnonzero(self.degrees < self.d_max))

    @property
    def transient_degrees(self) -> Tuple[int, ...]:
        """Degrees below the maximum."""
        return self.degree_set[:-1]

    def probability(self, k: int) -> Fraction:
        """Exact degree probability |V_k| / n."""
        return Fraction(len(self.classes[k]), self.n)

    def neighborhood(self, v: int) -> Dict[int, int]:
        """Degree neighborhood n(v) restricted to its support D(v)."""
        row = self.neighborhoods[v]
        return {self.degree_set[i]: int(row[i]) for i in np.flatnonzero(row)}

    def __repr__(self) -> str:
        return f"DegreeProfile(degrees={self.degree_set}, d_max={self.d_max})"


def degree_profile(graph: Graph) -> DegreeProfile:
    """Compute the degree profile of a graph."""
    return DegreeProfile(graph)


class JointDegreeMatrix:
    """Symmetric delta x delta matrix J of edge counts by endpoint degrees.

    Diagonal entries count each same-degree edge twice, so the total is 2m.
    """

    def __init__(self, matrix: np.ndarray, degree_set: Sequence[int]):
        self.matrix = matrix
        self.degree_set = tuple(degree_set)
        self.index = {k: i for i, k in enumerate(self.degree_set)}

    def entry(self, k: int, l: int) -> int:
        """Return J(k, l); degrees absent from the graph give 0."""
        if k not in self.index or l not in self.index:
            return 0
        return int(self.matrix[self.index[k], self.index[l]])

    @property
    def total(self) -> int:
        """Sum of all entries (2m)."""
        return int(self.matrix.sum())


def joint_degree_matrix(graph: Graph, profile: Optional[DegreeProfile] = None) -> JointDegreeMatrix:
    """Count edges by the degrees of their endpoints.

    Args:
        graph: Graph to summarize
        profile: Degree profile of graph (computed if omitted)

    Returns:
        JointDegreeMatrix indexed by the sorted degree set
    """
    profile = profile or degree_profile(graph)
    matrix = np.zeros((profile.delta, profile.delta), dtype=np.int64)
    if graph.m:
        edges = np.asarray(graph.edges, dtype=np.int64)
        a = profile.positions[edges[:, 0]]
        b = profile.positions[edges[:, 1]]
        np.add.at(matrix, (a, b), 1)
        np.add.at(matrix, (b, a), 1)
    matrix.flags.writeable = False
    return JointDegreeMatrix(matrix, profile.degree_set)


class ConditionalDegreeMatrix:
    """Row-stochastic matrix J~ obtained by normalizing each row of J."""

    def __init__(self, matrix: np.ndarray, degree_set: Sequence[int]):
        self.matrix = matrix
        self.degree_set = tuple(degree_set)
        self.index = {k: i for i, k in enumerate(self.degree_set)}

    def entry(self, k: int, l: int) -> float:
        """Return J~(k, l)."""
        return float(self.matrix[self.index[k], self.index[l]])

    def row(self, k: int) -> np.ndarray:
        """Return row J~(k, .) aligned with degree_set."""
        return self.matrix[self.index[k]]

    def support(self, k: int) -> Tuple[int, ...]:
        """Degrees l with J~(k, l) > 0 (the set D_k)."""
        return tuple(self.degree_set[i] for i in np.flatnonzero(self.row(k) > 0))


def conditional_degree_matrix(joint: JointDegreeMatrix) -> ConditionalDegreeMatrix:
    """Normalize each row of J into the conditional degree distribution.

    Raises:
        DegenerateGraphError: If a degree class has no incident edges
    """
    sums = joint.matrix.sum(axis=1)
    empty = [k for k, s in zip(joint.degree_set, sums) if s == 0]
    if empty:
        raise DegenerateGraphError(f"isolated degree class(es): {empty}")
    matrix = joint.matrix / sums[:, None].astype(float)
    matrix.flags.writeable = False
    return ConditionalDegreeMatrix(matrix, joint.degree_set)


def endpoint_degree_sums(graph: Graph) -> Tuple[int, int, int, int]:
    """Integer sums over the 2m oriented edge stubs.

    Returns:
        (2m, sum of x, sum of x^2, sum of x*y) where (x, y) are the
        degrees at the two ends of an oriented edge
    """
    deg = graph.degrees
    stubs = 2 * graph.m
    s1 = int(np.sum(deg * deg))
    s2 = int(np.sum(deg * deg * deg))
    if graph.m:
        edges = np.asarray(graph.edges, dtype=np.int64)
        sxy = 2 * int(np.sum(deg[edges[:, 0]] * deg[edges[:, 1]]))
    else:
        sxy = 0
    return stubs, s1, s2, sxy


def pearson_from_sums(stubs: int, s1: int, s2: int, sxy: int) -> float:
    """Endpoint degree correlation from exact integer stub sums.

    Raises:
        UndefinedAssortativityError: If the endpoint degrees have zero variance
    """
    denominator = stubs * s2 - s1 * s1
    if stubs == 0 or denominator == 0:
        raise UndefinedAssortativityError("endpoint degrees have zero variance")
    return (stubs * sxy - s1 * s1) / denominator


def assortativity(graph: Graph) -> float:
    """Degree assortativity of a graph.

    The Pearson correlation of the degrees at the two ends of a uniformly
    random edge, both orientations counted. Computed from integer sums, so
    the value is exactly invariant under node relabeling.

    Raises:
        UndefinedAssortativityError: For edgeless or regular graphs
    """
    return pearson_from_sums(*endpoint_degree_sums(graph))
