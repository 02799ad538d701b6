"""Augmenting-path (Dinic) max-flow on an explicit residual graph.

Capacities are floats; augmentation stops once residuals drop below a
relative tolerance so rounding noise cannot stall termination. The min-cut
partition is read off the final residual graph.
"""

from __future__ import annotations

from collections import deque

import numpy as np


class FlowNetwork:
    """Directed flow network with paired residual arcs (arc i's twin is i^1)."""

    def __init__(self, n_nodes: int):
        self.n_nodes = n_nodes
        self.adj: list[list[int]] = [[] for _ in range(n_nodes)]
        self.to: list[int] = []
        self.cap: list[float] = []

    def add_edge(self, u: int, v: int, cap: float, reverse_cap: float = 0.0):
        if cap < 0 or reverse_cap < 0:
            raise ValueError("capacities must be nonnegative")
        self.adj[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(float(cap))
        self.adj[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(float(reverse_cap))

    def max_flow(self, source: int, sink: int) -> float:
        self._tol = 1e-12 * max(1.0, max(self.cap, default=1.0))
        total = 0.0
        while True:
            level = self._bfs_levels(source, sink)
            if level[sink] < 0:
                return total
            iters = [0] * self.n_nodes
            while True:
                pushed = self._blocking_path(source, sink, level, iters)
                if pushed <= 0.0:
                    break
                total += pushed

    def _bfs_levels(self, source, sink):
        level = [-1] * self.n_nodes
        level[source] = 0
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for eid in self.adj[u]:
                v = self.to[eid]
                if self.cap[eid] > self._tol and level[v] < 0:
                    level[v] = level[u] + 1
                    queue.append(v)
        return level

    def _blocking_path(self, source, sink, level, iters):
        # Iterative DFS along the level graph; advances per-node arc cursors
        # so each saturated arc is inspected once per phase.
        path: list[int] = []
        u = source
        while True:
            if u == sink:
                bottleneck = min(self.cap[eid] for eid in path)
                for eid in path:
                    self.cap[eid] -= bottleneck
                    self.cap[eid ^ 1] += bottleneck
                return bottleneck
            advanced = False
            while iters[u] < len(self.adj[u]):
                eid = self.adj[u][iters[u]]
                v = self.to[eid]
                if self.cap[eid] > self._tol and level[v] == level[u] + 1:
                    path.append(eid)
                    u = v
                    advanced = True
                    break
                iters[u] += 1
            if advanced:
                continue
            if not path:
                return 0.0
            level[u] = -1  # dead end: prune from this phase
            eid = path.pop()
            u = self.to[eid ^ 1]
            iters[u] += 1

    def source_side(self, source: int) -> np.ndarray:
        """Nodes reachable from the source in the residual graph."""
        seen = np.zeros(self.n_nodes, dtype=bool)
        seen[source] = True
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for eid in self.adj[u]:
                v = self.to[eid]
                if self.cap[eid] > self._tol and not seen[v]:
                    seen[v] = True
                    queue.append(v)
        return seen
