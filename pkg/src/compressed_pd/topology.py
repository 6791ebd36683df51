"""
Undirected communication graphs and their Laplacians.
"""

from collections import deque
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Topology",
    "DisconnectedGraphError",
    "laplacian",
    "spectral_bounds",
    "is_connected",
    "path_graph",
    "complete_graph",
    "random_geometric_graph",
    "read_edge_list",
    "write_edge_list",
]

ZERO_EIG_RTOL = 1e-9


class DisconnectedGraphError(ValueError):
    pass


def _check_adjacency(adjacency):
    A = np.array(adjacency, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"adjacency must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("adjacency has non-finite entries")
    if np.any(A < 0):
        raise ValueError("adjacency has negative weights")
    if not np.array_equal(A, A.T):
        raise ValueError("adjacency is not symmetric")
    if np.any(np.diag(A) != 0):
        raise ValueError("adjacency must have a zero diagonal")
    return A


def laplacian(adjacency):
    """``Deg - A`` for a symmetric nonnegative adjacency with zero diagonal."""
    A = _check_adjacency(adjacency)
    return np.diag(A.sum(axis=1)) - A


def spectral_bounds(L):
    """Return ``(rho2, rho)``: smallest positive and largest Laplacian eigenvalue.

    Eigenvalues below ``1e-9 * rho`` count as zero; more than one such
    eigenvalue means the graph is disconnected.
    """
    eig = np.linalg.eigvalsh(np.asarray(L, dtype=np.float64))
    rho = float(eig[-1])
    if len(eig) == 1:
        raise DisconnectedGraphError("a single node has no positive Laplacian eigenvalue")
    threshold = ZERO_EIG_RTOL * max(rho, 1e-300)
    zeros = int(np.sum(eig <= threshold))
    if rho <= 0 or zeros > 1:
        raise DisconnectedGraphError(
            f"graph is disconnected: {max(zeros, len(eig))} near-zero Laplacian eigenvalues"
        )
    return float(eig[zeros]), rho


def _adjacency_connected(A):
    n = A.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j in np.flatnonzero(A[i] > 0):
            if not seen[j]:
                seen[j] = True
                queue.append(j)
    return bool(seen.all())


@dataclass(frozen=True, eq=False)
class Topology:
    """Weighted undirected graph with cached Laplacian spectrum.

    ``rho2`` and ``rho`` are ``nan`` for graphs that are disconnected or
    have a single node.
    """

    adjacency: np.ndarray
    laplacian: np.ndarray = field(init=False)
    rho2: float = field(init=False)
    rho: float = field(init=False)

    def __post_init__(self):
        A = _check_adjacency(self.adjacency)
        A.setflags(write=False)
        L = laplacian(A)
        L.setflags(write=False)
        object.__setattr__(self, "adjacency", A)
        object.__setattr__(self, "laplacian", L)
        try:
            rho2, rho = spectral_bounds(L)
        except DisconnectedGraphError:
            rho2 = rho = float("nan")
        object.__setattr__(self, "rho2", rho2)
        object.__setattr__(self, "rho", rho)

    @property
    def n(self):
        return self.adjacency.shape[0]

    @property
    def edges(self):
        i, j = np.nonzero(np.triu(self.adjacency))
        return [(int(a), int(b), float(self.adjacency[a, b])) for a, b in zip(i, j)]

    def neighbors(self, i):
        return np.flatnonzero(self.adjacency[i] > 0)

    @property
    def max_degree(self):
        return float(self.adjacency.sum(axis=1).max())

    def scaled(self, weight):
        """Same edge set with every weight multiplied by ``weight``."""
        if not weight > 0:
            raise ValueError("weight scale must be positive")
        return Topology(self.adjacency * weight)

    @classmethod
    def from_edges(cls, n, edges):
        A = np.zeros((n, n))
        for e in edges:
            i, j = int(e[0]), int(e[1])
            w = float(e[2]) if len(e) > 2 else 1.0
            if i == j:
                raise ValueError(f"self-loop on node {i}")
            A[i, j] = A[j, i] = w
        return cls(A)


def is_connected(graph):
    """Breadth-first reachability from node 0 over positive-weight edges."""
    A = graph.adjacency if isinstance(graph, Topology) else _check_adjacency(graph)
    return _adjacency_connected(A)


def path_graph(n, weight=1.0):
    return Topology.from_edges(n, [(i, i + 1, weight) for i in range(n - 1)])


def complete_graph(n, weight=1.0):
    A = weight * (np.ones((n, n)) - np.eye(n))
    return Topology(A)


def random_geometric_graph(n, radius=0.5, rng=None, max_retries=1000, weight=1.0):
    """Connected random geometric graph on the unit square.

    Points are drawn uniformly and joined when their distance is at most
    ``radius``. The whole point set is redrawn until the graph is connected.
    """
    if n < 2:
        raise ValueError("a random geometric graph needs n >= 2")
    if not 0 < radius <= np.sqrt(2):
        raise ValueError(f"radius must lie in (0, sqrt(2)], got {radius}")
    rng = np.random.default_rng(rng)
    for _ in range(max_retries):
        pts = rng.random((n, 2))
        dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
        A = (dist <= radius).astype(np.float64)
        np.fill_diagonal(A, 0.0)
        if _adjacency_connected(A):
            return Topology(weight * A)
    raise DisconnectedGraphError(
        f"no connected geometric graph (n={n}, radius={radius}) in {max_retries} draws"
    )


def write_edge_list(topology, path):
    """Write ``i j weight`` lines, 0-indexed, preceded by a node-count comment."""
    with open(path, "w") as fh:
        fh.write(f"# nodes {topology.n}\n")
        for i, j, w in topology.edges:
            fh.write(f"{i} {j} {w!r}\n")


def read_edge_list(path, n=None):
    edges = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "nodes" and n is None:
                    n = int(parts[1])
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise ValueError(f"bad edge line: {line!r}")
            edges.append(tuple(float(p) if k == 2 else int(p) for k, p in enumerate(parts)))
    if n is None:
        n = 1 + max(max(e[0], e[1]) for e in edges) if edges else 1
    return Topology.from_edges(n, edges)
