"""
Seeded problem construction: random streams, synthetic data, graph, x0.

Randomness comes from numpy's PCG64 generator seeded through
``SeedSequence(seed, spawn_key=(purpose, agent))``; purposes are

    0  graph          1  data            2  initial point      3  compression

Every (purpose, agent) pair owns its own stream, so the graph, data and
initial point of a seed are shared by all algorithms of a suite, and serial
and parallel execution draw identical numbers.
"""

import os

import numpy as np

from ..objectives import LogisticNonconvex
from ..topology import (
    DisconnectedGraphError,
    is_connected,
    random_geometric_graph,
    read_edge_list,
    write_edge_list,
)

__all__ = [
    "PURPOSE_GRAPH",
    "PURPOSE_DATA",
    "PURPOSE_X0",
    "PURPOSE_COMPRESSION",
    "stream",
    "generate_dataset",
    "save_dataset",
    "load_dataset",
    "build_topology",
    "initial_point",
    "build_problem",
    "export_problem",
]

PURPOSE_GRAPH, PURPOSE_DATA, PURPOSE_X0, PURPOSE_COMPRESSION = range(4)
RNG_DESCRIPTION = "numpy PCG64 via SeedSequence(seed, spawn_key=(purpose, agent)); purposes 0 graph, 1 data, 2 x0, 3 compression"


def stream(seed, purpose, agent=None):
    key = (purpose,) if agent is None else (purpose, agent)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def generate_dataset(n, d, m_i, seed, signal_scale=1.0):
    """Synthetic binary classification data, one block per agent.

    Features are standard normal; labels are Bernoulli draws with success
    probability ``sigmoid(z @ w)`` for a hidden ``w ~ N(0, signal_scale^2 I_d)``
    shared by all agents. The scale sets how well conditioned the fitted
    problem is: a large ``w`` gives nearly separable data and a flat loss
    around its minimizer.

    Returns
    -------
    features : list of (m_i, d) arrays
    labels : list of (m_i,) arrays of 0.0 / 1.0
    """
    w = signal_scale * stream(seed, PURPOSE_DATA).standard_normal(d)
    features, labels = [], []
    for i in range(n):
        rng = stream(seed, PURPOSE_DATA, i)
        z = rng.standard_normal((m_i, d))
        p = 1.0 / (1.0 + np.exp(-(z @ w)))
        labels.append((rng.random(m_i) < p).astype(np.float64))
        features.append(z)
    return features, labels


def save_dataset(directory, features, labels):
    """One text file per agent: each row is an observation, label last."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for i, (z, y) in enumerate(zip(features, labels)):
        path = os.path.join(directory, f"agent_{i:03d}.txt")
        np.savetxt(path, np.column_stack([z, y]), fmt="%.17g", header=f"agent {i}: features..., label")
        paths.append(path)
    return paths


def load_dataset(directory):
    names = sorted(f for f in os.listdir(directory) if f.startswith("agent_") and f.endswith(".txt"))
    if not names:
        raise FileNotFoundError(f"no agent_*.txt files in {directory}")
    features, labels = [], []
    for name in names:
        arr = np.loadtxt(os.path.join(directory, name), ndmin=2)
        features.append(arr[:, :-1])
        labels.append(arr[:, -1])
    return features, labels


def build_topology(cfg):
    """Graph of ``cfg``, rescaled so that its largest Laplacian eigenvalue is
    ``cfg.rho_target`` (unless that is 0)."""
    if cfg.graph_kind == "edge_list":
        topo = read_edge_list(cfg.edge_list, n=cfg.n)
        if topo.n != cfg.n:
            raise ValueError(f"edge list has {topo.n} nodes, config says {cfg.n}")
        if not is_connected(topo):
            raise DisconnectedGraphError(f"graph in {cfg.edge_list} is disconnected")
    else:
        topo = random_geometric_graph(
            cfg.n, cfg.radius, stream(cfg.seed, PURPOSE_GRAPH), max_retries=cfg.max_retries
        )
    if cfg.rho_target > 0:
        topo = topo.scaled(cfg.rho_target / topo.rho)
    return topo


def initial_point(cfg):
    return np.stack(
        [cfg.x0_scale * stream(cfg.seed, PURPOSE_X0, i).standard_normal(cfg.d) for i in range(cfg.n)]
    )


def build_problem(cfg):
    """Topology, objective and initial point for a validated config."""
    topo = build_topology(cfg)
    if cfg.data_dir:
        features, labels = load_dataset(cfg.data_dir)
        if len(features) != cfg.n or features[0].shape[1] != cfg.d:
            raise ValueError(
                f"dataset in {cfg.data_dir} has {len(features)} agents of dimension "
                f"{features[0].shape[1]}, config says n={cfg.n}, d={cfg.d}"
            )
    else:
        features, labels = generate_dataset(cfg.n, cfg.d, cfg.m_i, cfg.seed, cfg.signal_scale)
    objective = LogisticNonconvex(features, labels, lam=cfg.lam, mu=cfg.mu)
    return topo, objective, initial_point(cfg)


def export_problem(cfg, directory):
    """Write the dataset and the graph of ``cfg`` under ``directory``."""
    features, labels = generate_dataset(cfg.n, cfg.d, cfg.m_i, cfg.seed, cfg.signal_scale)
    paths = save_dataset(os.path.join(directory, "data"), features, labels)
    graph_path = os.path.join(directory, "graph.txt")
    write_edge_list(build_topology(cfg), graph_path)
    return paths, graph_path
