"""Seedable generators for the six benchmark networks with known edge structure.

Each generator iterates its published recurrence from white-noise initial
conditions, discards a burn-in prefix, and returns the panel together with
the ground-truth directed adjacency. Innovations are standard normal; every
node owns an independent, deterministically derived noise substream (two for
nodes whose recurrence draws both an additive and a multiplicative noise
term), so results for one node never depend on how many nodes exist.

The recurrences of the 7-, 9- and 11-node nonlinear networks are transcribed
exactly as published. Their polynomial feedback is numerically explosive
under unit-variance innovations, so generation trips the overflow guard for
most seeds; the guard raises rather than returning garbage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .panel import TimeSeriesPanel

OVERFLOW_GUARD = 1e6
_STRUCTURE_STREAM = 1_000_003  # substream index reserved for edge orientation draws

SQRT2 = np.sqrt(2.0)

NETWORK_NAMES = (
    "linear5",
    "nonlinear5",
    "nonlinear7",
    "nonlinear9",
    "nonlinear11",
    "zachary1",
    "zachary2",
)

# Zachary karate club, 34 members, 78 undirected friendship edges (1-based).
ZACHARY_EDGES = (
    (1, 2), (1, 3), (1, 4), (1, 5), (1, 6), (1, 7), (1, 8), (1, 9), (1, 11),
    (1, 12), (1, 13), (1, 14), (1, 18), (1, 20), (1, 22), (1, 32),
    (2, 3), (2, 4), (2, 8), (2, 14), (2, 18), (2, 20), (2, 22), (2, 31),
    (3, 4), (3, 8), (3, 9), (3, 10), (3, 14), (3, 28), (3, 29), (3, 33),
    (4, 8), (4, 13), (4, 14),
    (5, 7), (5, 11),
    (6, 7), (6, 11), (6, 17),
    (7, 17),
    (9, 31), (9, 33), (9, 34),
    (10, 34),
    (14, 34),
    (15, 33), (15, 34),
    (16, 33), (16, 34),
    (19, 33), (19, 34),
    (20, 34),
    (21, 33), (21, 34),
    (23, 33), (23, 34),
    (24, 26), (24, 28), (24, 30), (24, 33), (24, 34),
    (25, 26), (25, 28), (25, 32),
    (26, 32),
    (27, 30), (27, 34),
    (28, 34),
    (29, 32), (29, 34),
    (30, 33), (30, 34),
    (31, 33), (31, 34),
    (32, 33), (32, 34),
    (33, 34),
)

_EDGE_LISTS = {
    "linear5": ((1, 2), (1, 3), (1, 4), (4, 5), (5, 4)),
    "nonlinear5": ((1, 2), (1, 3), (1, 4), (4, 5), (5, 4)),
    "nonlinear7": (
        (1, 2), (1, 6), (1, 7), (2, 3), (3, 4), (3, 6), (6, 5), (6, 7), (7, 4),
    ),
    "nonlinear9": (
        (1, 2), (1, 3), (1, 4), (1, 8), (1, 9), (3, 8), (4, 5), (4, 6), (5, 4),
        (6, 7), (8, 9),
    ),
    "nonlinear11": (
        (1, 2), (1, 8), (1, 9), (1, 10), (2, 3), (2, 4), (2, 10), (2, 11),
        (3, 8), (3, 10), (4, 5), (4, 6), (5, 4), (6, 7), (8, 9),
    ),
}

_NODE_COUNTS = {
    "linear5": 5,
    "nonlinear5": 5,
    "nonlinear7": 7,
    "nonlinear9": 9,
    "nonlinear11": 11,
    "zachary1": 34,
    "zachary2": 34,
}

_MAX_LAGS = {
    "linear5": 3,
    "nonlinear5": 3,
    "nonlinear7": 3,
    "nonlinear9": 3,
    "nonlinear11": 3,
    "zachary1": 1,
    "zachary2": 1,
}

ZACHARY1_COUPLING = 0.025
ZACHARY2_COUPLING = 0.05
ZACHARY_MAP_A = 1.8
ZACHARY_NOISE_SCALE = 0.01
ZACHARY2_BIDIRECTIONAL = 5


class SimulationDivergedError(RuntimeError):
    """A generated value crossed the overflow guard."""

    def __init__(self, node: str, step: int):
        self.node = node
        self.step = step
        super().__init__(
            f"series {node} exceeded |x| > {OVERFLOW_GUARD:g} at simulation step {step}"
        )


@dataclass(frozen=True)
class NetworkSpec:
    """Which network to generate, how long, and from which seed."""

    name: str
    length: int
    seed: int = 0
    burn_in: int = 500

    def __post_init__(self):
        if self.name not in NETWORK_NAMES:
            raise ValueError(
                f"unknown network {self.name!r}; choose from {', '.join(NETWORK_NAMES)}"
            )
        if self.length < 1:
            raise ValueError("length must be >= 1")
        if self.burn_in < 0:
            raise ValueError("burn_in must be nonnegative")


@dataclass(frozen=True)
class GroundTruth:
    """Directed adjacency: entry (i, j) true iff series i drives series j."""

    adjacency: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        adj = np.asarray(self.adjacency, dtype=bool)
        object.__setattr__(self, "adjacency", adj)
        if adj.shape != (len(self.names), len(self.names)):
            raise ValueError("adjacency shape does not match node count")
        if adj.diagonal().any():
            raise ValueError("self-loops are excluded from ground truth")

    @property
    def edge_count(self) -> int:
        return int(self.adjacency.sum())

    def edge_list(self) -> list[tuple[str, str]]:
        src, dst = np.nonzero(self.adjacency)
        return [(self.names[i], self.names[j]) for i, j in zip(src, dst)]


def _node_names(count: int) -> tuple[str, ...]:
    return tuple(f"x{i + 1}" for i in range(count))


def _truth_from_pairs(name: str) -> GroundTruth:
    count = _NODE_COUNTS[name]
    adj = np.zeros((count, count), dtype=bool)
    for src, dst in _EDGE_LISTS[name]:
        adj[src - 1, dst - 1] = True
    return GroundTruth(adjacency=adj, names=_node_names(count))


def _node_rng(seed: int, node: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(node, stream)))
    )


def _noise_matrix(seed: int, n_nodes: int, n_steps: int, stream: int) -> np.ndarray:
    cols = [_node_rng(seed, node, stream).normal(size=n_steps) for node in range(n_nodes)]
    return np.column_stack(cols)


def _guard(x_row: np.ndarray, t: int, names: tuple[str, ...]) -> None:
    bad = np.abs(x_row) > OVERFLOW_GUARD
    if bad.any():
        raise SimulationDivergedError(names[int(np.argmax(bad))], t)


def _run_named(name: str, w: np.ndarray, wm: np.ndarray) -> np.ndarray:
    """Iterate one of the fixed-equation networks over pre-drawn noise."""
    n_steps, count = w.shape
    names = _node_names(count)
    lag = _MAX_LAGS[name]
    x = np.zeros((n_steps, count))
    x[:lag] = w[:lag]
    clip = np.clip
    for t in range(lag, n_steps):
        p1, p2, p3 = x[t - 1], x[t - 2], x[t - 3]
        r = x[t]
        if name == "linear5":
            r[0] = 0.95 * SQRT2 * p1[0] - 0.9025 * p2[0] + w[t, 0]
            r[1] = 0.5 * p2[0] + w[t, 1]
            r[2] = -0.4 * p3[0] + w[t, 2]
            r[3] = -0.5 * p2[0] + 0.25 * SQRT2 * p1[3] + 0.25 * SQRT2 * p1[4] + w[t, 3]
            r[4] = -0.25 * SQRT2 * p1[3] + 0.25 * SQRT2 * p1[4] + w[t, 4]
        elif name == "nonlinear5":
            r[0] = 0.95 * SQRT2 * p1[0] - 0.9025 * p2[0] + w[t, 0]
            r[1] = 0.5 * p2[0] ** 2 + w[t, 1]
            r[2] = -0.4 * p3[0] + w[t, 2]
            r[3] = -0.5 * p2[0] ** 2 + 0.5 * SQRT2 * p1[3] + 0.25 * SQRT2 * p1[4] + w[t, 3]
            r[4] = -0.5 * SQRT2 * p1[3] + 0.5 * SQRT2 * p1[4] + w[t, 4]
        elif name == "nonlinear7":
            r[0] = 0.95 * SQRT2 * p1[0] - 0.9025 * p2[0] + w[t, 0]
            r[1] = -0.04 * p3[0] ** 3 + 0.04 * p1[0] ** 3 + w[t, 1]
            r[2] = -0.04 * SQRT2 * p1[1] ** 3 + 0.04 * SQRT2 * p2[1] ** 3 + w[t, 2]
            r[3] = (
                np.log1p(abs(p1[2])) * np.sign(p1[2])
                + 0.001 * p2[6] ** 3
                - 0.001 * p3[6] ** 3
                + w[t, 3]
            )
            r[4] = 0.04 * clip(wm[t, 4], -1, 1) * p2[5] ** 5 + w[t, 4]
            r[5] = 0.04 * p2[0] ** 3 + 0.04 * p1[2] ** 3 + w[t, 5]
            r[6] = (
                clip(wm[t, 6], -0.5, 0.5)
                * (0.04 * p2[0] ** 3 + 0.1 * p1[5] ** 2 - 0.1 * p2[5] ** 2)
                + w[t, 6]
            )
        elif name == "nonlinear9":
            r[0] = 0.95 * SQRT2 * p1[0] - 0.9025 * p2[0] + w[t, 0]
            r[1] = 0.5 * p2[0] ** 2 + 0.5 * p1[1] ** 2 - 0.4 * p2[1] ** 2 + w[t, 1]
            r[2] = -0.4 * p3[0] + 0.5 * p1[2] ** 2 - 0.4 * p2[2] ** 2 + w[t, 2]
            r[3] = (
                -0.5 * p2[0] ** 2
                + 0.5 * p1[3] ** 2
                - 0.4 * p2[3] ** 2
                + 0.5 * SQRT2 * p1[3]
                + 0.25 * SQRT2 * p1[4]
                + w[t, 3]
            )
            r[4] = -0.5 * SQRT2 * p1[3] + 0.5 * SQRT2 * p1[4] + w[t, 4]
            r[5] = (
                np.sign(p1[3]) * np.log1p(abs(p1[3]))
                + 0.5 * p1[5] ** 2
                - 0.4 * p2[5] ** 2
                + w[t, 5]
            )
            r[6] = (
                0.04 * clip(wm[t, 6], -1, 1) * p2[5] ** 5
                + 0.5 * p1[6] ** 2
                - 0.4 * p2[6] ** 2
                + w[t, 6]
            )
            r[7] = (
                0.4 * p2[0]
                + 0.25 * p1[2] ** 3
                + 0.5 * p1[7] ** 2
                - 0.4 * p2[7] ** 2
                + w[t, 7]
            )
            r[8] = (
                clip(wm[t, 8], -0.5, 0.5)
                * (0.2 * p2[0] + 0.1 * p1[7] ** 2 - 0.1 * p2[7] ** 2)
                + 0.5 * p1[8] ** 2
                - 0.4 * p2[8] ** 2
                + w[t, 8]
            )
        elif name == "nonlinear11":
            r[0] = 0.25 * p1[0] ** 2 - 0.25 * p2[0] ** 2 + w[t, 0]
            r[1] = np.log1p(abs(p2[0])) * np.sign(p2[0]) + w[t, 1]
            r[2] = -0.1 * p3[1] ** 3 + w[t, 2]
            r[3] = -0.5 * p2[1] ** 2 + 0.5 * SQRT2 * p1[3] + 0.25 * SQRT2 * p1[4] + w[t, 3]
            r[4] = -0.5 * SQRT2 * p1[3] + 0.5 * SQRT2 * p1[4] + w[t, 4]
            r[5] = np.log1p(abs(p1[3])) * np.sign(p1[3]) + w[t, 5]
            r[6] = 0.04 * clip(wm[t, 6], -1, 1) * p2[5] ** 5 + w[t, 6]
            r[7] = 0.4 * p2[0] + 0.25 * p1[2] ** 3 + w[t, 7]
            r[8] = (
                clip(wm[t, 8], -0.5, 0.5)
                * (0.2 * p2[0] + 0.1 * p1[7] ** 2 - 0.1 * p2[7] ** 2)
                + w[t, 8]
            )
            r[9] = 0.25 * p3[0] ** 2 - 0.01 * p3[1] ** 2 + 0.15 * p3[2] ** 3 + w[t, 9]
            r[10] = 0.1 * p1[1] ** 4 - 0.1 * p2[1] ** 4 + 0.1 * p3[5] ** 3 + w[t, 10]
        else:  # pragma: no cover
            raise ValueError(name)
        _guard(r, t, names)
    return x


def zachary_coupling_matrix(truth: GroundTruth, coupling: float) -> np.ndarray:
    """Coupling matrix C where C[i, j] = coupling iff j drives i."""
    return coupling * truth.adjacency.T.astype(float)


def _run_zachary(
    coupling_matrix: np.ndarray,
    w: np.ndarray,
    a: float = ZACHARY_MAP_A,
    noise_scale: float = ZACHARY_NOISE_SCALE,
) -> np.ndarray:
    """Coupled quadratic maps on a fixed coupling matrix.

    Initial state uses the scaled innovation noise_scale * w(0): the map
    1 - a*x^2 diverges from unit-scale starting points, so the first row
    must stay inside the attractor basin.
    """
    n_steps = w.shape[0]
    count = coupling_matrix.shape[0]
    names = _node_names(count)
    own_weight = 1.0 - coupling_matrix.sum(axis=1)
    x = np.zeros((n_steps, count))
    x[0] = noise_scale * w[0]
    for t in range(1, n_steps):
        g = 1.0 - a * x[t - 1] ** 2
        x[t] = own_weight * g + coupling_matrix @ g + noise_scale * w[t]
        _guard(x[t], t, names)
    return x


def zachary1_truth() -> GroundTruth:
    count = 34
    adj = np.zeros((count, count), dtype=bool)
    for u, v in ZACHARY_EDGES:
        adj[u - 1, v - 1] = True
        adj[v - 1, u - 1] = True
    return GroundTruth(adjacency=adj, names=_node_names(count))


def zachary2_truth(seed: int) -> GroundTruth:
    """Per-seed orientation: 5 edges bidirectional, the other 73 one-way."""
    rng = _node_rng(seed, _STRUCTURE_STREAM)
    n_edges = len(ZACHARY_EDGES)
    both_ways = set(
        rng.choice(n_edges, size=ZACHARY2_BIDIRECTIONAL, replace=False).tolist()
    )
    adj = np.zeros((34, 34), dtype=bool)
    for k, (u, v) in enumerate(ZACHARY_EDGES):
        if k in both_ways:
            adj[u - 1, v - 1] = True
            adj[v - 1, u - 1] = True
        elif rng.random() < 0.5:
            adj[u - 1, v - 1] = True
        else:
            adj[v - 1, u - 1] = True
    return GroundTruth(adjacency=adj, names=_node_names(34))


def network_truth(name: str, seed: int = 0) -> GroundTruth:
    if name in _EDGE_LISTS:
        return _truth_from_pairs(name)
    if name == "zachary1":
        return zachary1_truth()
    if name == "zachary2":
        return zachary2_truth(seed)
    raise ValueError(f"unknown network {name!r}")


def generate(spec: NetworkSpec) -> tuple[TimeSeriesPanel, GroundTruth]:
    """Generate one independent set: the panel plus its ground truth.

    (name, length, burn_in, seed) fully determine the output.

    Raises:
        SimulationDivergedError: when the recurrence crosses the overflow
            guard, which the published 7-, 9- and 11-node parameterizations
            do for most seeds.
    """
    n_steps = spec.burn_in + spec.length
    count = _NODE_COUNTS[spec.name]
    truth = network_truth(spec.name, spec.seed)
    w = _noise_matrix(spec.seed, count, n_steps, stream=0)
    if spec.name in ("zachary1", "zachary2"):
        coupling = ZACHARY1_COUPLING if spec.name == "zachary1" else ZACHARY2_COUPLING
        values = _run_zachary(zachary_coupling_matrix(truth, coupling), w)
    else:
        wm = _noise_matrix(spec.seed, count, n_steps, stream=1)
        values = _run_named(spec.name, w, wm)
    panel = TimeSeriesPanel(values=values[spec.burn_in :], names=truth.names)
    return panel, truth
