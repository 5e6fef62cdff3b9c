"""Directed communication topologies and switching signals.

Weighted digraphs with their Laplacians, directed-spanning-tree checks, the
disagreement-space reduction of the Laplacian, and piecewise-constant
switching signals with dwell-time bookkeeping.

Edge orientation convention: an edge ``from -> to`` means information flows
from node `from` to node `to`, i.e. it contributes the adjacency weight
``a[to, from] > 0``.  Node indices are 1-based in all public interfaces
(edge lists, roots, topology indices); arrays are 0-based internally.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import linalg

# Row sums of a Laplacian may deviate from zero by this much (relative to
# the largest weight) before the matrix is rejected.
ROW_SUM_RTOL = 1e-9

__all__ = [
    "DirectedGraph",
    "GraphSet",
    "ReducedLaplacian",
    "SwitchingSignal",
    "active_index",
    "antistability_margin",
    "graph_from_dict",
    "graph_to_dict",
    "has_spanning_tree",
    "laplacian",
    "load_graph",
    "periodic_signal",
    "pi_matrix",
    "reduce_laplacian",
    "save_graph",
    "xi_matrix",
]


@dataclass
class DirectedGraph:
    """Weighted directed graph on N nodes.

    ``weights[i, j] > 0`` means an edge from node j+1 to node i+1 (information
    flows j -> i).  Self-weights must be zero; all weights non-negative and
    finite.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"weight matrix must be square, got shape {w.shape}")
        if w.shape[0] < 1:
            raise ValueError("graph needs at least one node")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights contain non-finite entries")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if np.any(np.diag(w) != 0):
            raise ValueError("self-weights a_ii must be zero")
        self.weights = w

    @property
    def node_count(self):
        return self.weights.shape[0]

    @classmethod
    def from_edges(cls, node_count, edges):
        """Build a graph from 1-based ``(from, to)`` or ``(from, to, weight)`` tuples."""
        w = np.zeros((node_count, node_count))
        for edge in edges:
            src, dst = edge[0], edge[1]
            weight = edge[2] if len(edge) > 2 else 1.0
            if not (1 <= src <= node_count and 1 <= dst <= node_count):
                raise ValueError(f"edge ({src}, {dst}) out of range 1..{node_count}")
            w[dst - 1, src - 1] = weight
        return cls(w)

    def edges(self):
        """Edge list as 1-based ``(from, to, weight)`` tuples, sorted by (from, to)."""
        out = []
        for i in range(self.node_count):
            for j in range(self.node_count):
                if self.weights[i, j] > 0:
                    out.append((j + 1, i + 1, float(self.weights[i, j])))
        return sorted(out)


@dataclass
class GraphSet:
    """Ordered collection of candidate topologies over a common node set."""

    graphs: tuple

    def __post_init__(self):
        graphs = tuple(self.graphs)
        if not graphs:
            raise ValueError("graph set must be non-empty")
        n = graphs[0].node_count
        for k, g in enumerate(graphs):
            if g.node_count != n:
                raise ValueError(
                    f"graph {k + 1} has {g.node_count} nodes, expected {n}"
                )
        self.graphs = graphs

    @property
    def node_count(self):
        return self.graphs[0].node_count

    def __len__(self):
        return len(self.graphs)

    def __iter__(self):
        return iter(self.graphs)

    def __getitem__(self, index):
        return self.graphs[index]


@dataclass
class SwitchingSignal:
    """Piecewise-constant topology schedule sigma(t) on [0, horizon).

    `breakpoints` start at 0 and are strictly increasing; `indices` holds the
    1-based topology index active on each interval ``[t_k, t_{k+1})`` (the
    last interval runs to the horizon).  sigma is right-continuous at the
    breakpoints.  Dwell bounds satisfy ``tau1 > t_{k+1} - t_k >= tau0 > 0``;
    when omitted they are derived from the breakpoints themselves.
    """

    breakpoints: np.ndarray
    indices: np.ndarray
    horizon: float
    tau0: float = None
    tau1: float = None

    def __post_init__(self):
        t = np.asarray(self.breakpoints, dtype=float)
        idx = np.asarray(self.indices, dtype=int)
        if t.ndim != 1 or t.size == 0:
            raise ValueError("breakpoints must be a non-empty 1-d sequence")
        if t[0] != 0.0:
            raise ValueError(f"first breakpoint must be 0, got {t[0]}")
        if np.any(np.diff(t) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if idx.shape != t.shape:
            raise ValueError("breakpoints and indices must have equal length")
        if np.any(idx < 1):
            raise ValueError("topology indices are 1-based and must be >= 1")
        horizon = float(self.horizon)
        if horizon <= t[-1]:
            raise ValueError(
                f"horizon {horizon} must exceed the last breakpoint {t[-1]}"
            )
        gaps = np.diff(t)
        tau0 = float(self.tau0) if self.tau0 is not None else (
            float(gaps.min()) if gaps.size else horizon
        )
        tau1 = float(self.tau1) if self.tau1 is not None else np.inf
        if tau0 <= 0:
            raise ValueError(f"tau0 must be positive, got {tau0}")
        # Breakpoints built by multiplication wobble by an ulp; allow that.
        slack = 1e-9 * max(tau0, float(gaps.max()) if gaps.size else 0.0)
        if gaps.size and (gaps.min() < tau0 - slack or gaps.max() >= tau1 - slack):
            raise ValueError(
                f"dwell bounds violated: intervals in [{gaps.min()}, {gaps.max()}] "
                f"must satisfy tau1 > gap >= tau0 with tau0={tau0}, tau1={tau1}"
            )
        self.breakpoints = t
        self.indices = idx
        self.horizon = horizon
        self.tau0 = tau0
        self.tau1 = tau1

    @property
    def interval_count(self):
        return self.breakpoints.size

    def validate_against(self, graph_count):
        if self.indices.max() > graph_count:
            raise ValueError(
                f"signal references topology {self.indices.max()} but only "
                f"{graph_count} graphs are available"
            )


@dataclass
class ReducedLaplacian:
    """(N-1)x(N-1) matrix governing the disagreement dynamics of one topology.

    Equals ``Xi @ L @ Pi`` for the source Laplacian L, with Xi = [I, -1] and
    Pi = [I; 0].  Antistable (all eigenvalues in the open right half-plane)
    exactly when the source graph contains a directed spanning tree.
    """

    matrix: np.ndarray
    source_index: int = field(default=0)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"reduced Laplacian must be square, got {m.shape}")
        self.matrix = m


def laplacian(g):
    """Graph Laplacian L = D - A with row sums exactly zero.

    Off-diagonals are the negated weights; each diagonal entry is the sum of
    the corresponding row of the weight matrix.
    """
    w = g.weights
    lap = -w.copy()
    np.fill_diagonal(lap, w.sum(axis=1))
    return lap


def xi_matrix(n_nodes):
    """Disagreement map Xi = [I_{N-1}, -1_{N-1}], mapping states to pairwise offsets."""
    return np.hstack([np.eye(n_nodes - 1), -np.ones((n_nodes - 1, 1))])


def pi_matrix(n_nodes):
    """Embedding Pi = [I_{N-1}; 0^T], right inverse of Xi on the reduced space."""
    return np.vstack([np.eye(n_nodes - 1), np.zeros((1, n_nodes - 1))])


def reduce_laplacian(lap, source_index=0):
    """Reduce an NxN Laplacian to the (N-1)x(N-1) disagreement-space matrix.

    Computes ``Xi @ L @ Pi``, which entrywise is ``L[j, k] - L[N-1, k]`` for
    j, k < N-1.  Rejects inputs whose row sums are not zero (within
    tolerance), since the reduction is only meaningful for Laplacians.
    """
    lap = np.asarray(lap, dtype=float)
    if lap.ndim != 2 or lap.shape[0] != lap.shape[1]:
        raise ValueError(f"Laplacian must be square, got shape {lap.shape}")
    n = lap.shape[0]
    if n < 2:
        raise ValueError("reduction needs at least two nodes")
    scale = max(1.0, np.abs(lap).max())
    row_sums = np.abs(lap.sum(axis=1)).max()
    if row_sums > ROW_SUM_RTOL * scale:
        raise ValueError(
            f"not a valid Laplacian: max row sum {row_sums:.3e} exceeds "
            f"{ROW_SUM_RTOL:.1e} * {scale:.3e}"
        )
    reduced = lap[: n - 1, : n - 1] - lap[n - 1, : n - 1]
    return ReducedLaplacian(reduced, source_index)


def has_spanning_tree(g):
    """Directed-spanning-tree test by reachability from each candidate root.

    Returns ``(verdict, root)`` where `root` is the 1-based witness root when
    the verdict is True, else None.  Node j reaches node i directly when
    ``weights[i, j] > 0``.
    """
    w = g.weights
    n = g.node_count
    for root in range(n):
        seen = np.zeros(n, dtype=bool)
        seen[root] = True
        stack = [root]
        while stack:
            j = stack.pop()
            for i in np.nonzero(w[:, j] > 0)[0]:
                if not seen[i]:
                    seen[i] = True
                    stack.append(int(i))
        if seen.all():
            return True, root + 1
    return False, None


def antistability_margin(reduced):
    """Smallest real part over the spectrum of a reduced Laplacian.

    Positive exactly when the source graph contains a directed spanning tree;
    a non-positive margin means synthesis is impossible for that topology.
    """
    if reduced.matrix.size == 0:
        return np.inf
    return float(linalg.eigenvalues(reduced.matrix).real.min())


def periodic_signal(graph_count, dwell, horizon):
    """Round-robin switching signal 1, 2, ..., p, 1, ... with a uniform dwell.

    Breakpoints are multiples of `dwell` strictly inside [0, horizon); the
    final interval is truncated by the horizon.
    """
    if dwell <= 0:
        raise ValueError(f"dwell must be positive, got {dwell}")
    if horizon <= dwell:
        raise ValueError(f"horizon {horizon} must exceed the dwell {dwell}")
    if graph_count < 1:
        raise ValueError("need at least one topology")
    breakpoints = []
    k = 0
    # Multiply rather than accumulate so breakpoints are reproducible; the
    # guard keeps float noise from creating a near-empty trailing interval.
    while k * dwell < horizon - 1e-9 * dwell:
        breakpoints.append(k * dwell)
        k += 1
    indices = [(k % graph_count) + 1 for k in range(len(breakpoints))]
    return SwitchingSignal(
        np.array(breakpoints), np.array(indices), float(horizon), tau0=dwell
    )


def active_index(signal, t):
    """Topology index sigma(t), right-continuous at the breakpoints."""
    if t < 0 or t > signal.horizon:
        raise ValueError(f"t={t} outside the signal domain [0, {signal.horizon}]")
    pos = int(np.searchsorted(signal.breakpoints, t, side="right")) - 1
    return int(signal.indices[pos])


def graph_to_dict(g):
    """Graph interchange document: node count plus a 1-based edge list."""
    return {
        "node_count": g.node_count,
        "edges": [
            {"from": src, "to": dst, "weight": weight}
            for src, dst, weight in g.edges()
        ],
    }


def graph_from_dict(doc):
    """Inverse of :func:`graph_to_dict`; round-trips weights bit-exactly."""
    try:
        n = int(doc["node_count"])
        edges = [(e["from"], e["to"], float(e["weight"])) for e in doc["edges"]]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed graph document: missing field {exc}") from exc
    return DirectedGraph.from_edges(n, edges)


def save_graph(g, path):
    with open(path, "w") as fh:
        json.dump(graph_to_dict(g), fh, indent=2)
        fh.write("\n")


def load_graph(path):
    with open(path) as fh:
        return graph_from_dict(json.load(fh))
