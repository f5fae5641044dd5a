"""Undirected sensing graph with a leader/follower split.

Vertices are 1-based ids ``1..n``; the first ``n_leaders`` vertices are
leaders.  Edges keep their stored orientation (first vertex = head), which
fixes the sign pattern of the incidence matrix once and for all.
"""

import numpy as np

from .errors import DisconnectedGraphError, UnknownVertexError, ValidationError


class FormationGraph:
    """Connected undirected graph over agents 1..n with n_leaders >= 2."""

    __slots__ = ("n", "n_leaders", "edges", "_incidence", "_adjacency")

    def __init__(self, n, n_leaders, edges):
        edges = [(int(i), int(j)) for i, j in edges]
        problems = []
        if n < 2:
            problems.append(f"need at least 2 vertices, got n={n}")
        if n_leaders < 2:
            problems.append(f"need at least 2 leaders, got n_leaders={n_leaders}")
        if n_leaders > n:
            problems.append(f"n_leaders={n_leaders} exceeds n={n}")
        seen = set()
        for i, j in edges:
            if not (1 <= i <= n and 1 <= j <= n):
                problems.append(f"edge ({i},{j}) references a vertex outside 1..{n}")
                continue
            if i == j:
                problems.append(f"self-loop at vertex {i}")
            key = (min(i, j), max(i, j))
            if key in seen:
                problems.append(f"duplicate edge ({i},{j})")
            seen.add(key)
        if problems:
            raise ValidationError(problems)

        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "n_leaders", int(n_leaders))
        object.__setattr__(self, "edges", tuple(edges))

        adjacency = {i: set() for i in range(1, n + 1)}
        for i, j in edges:
            adjacency[i].add(j)
            adjacency[j].add(i)
        object.__setattr__(self, "_adjacency", adjacency)
        _check_connected(adjacency, n)

        inc = np.zeros((len(edges), n), dtype=int)
        for k, (i, j) in enumerate(edges):
            inc[k, i - 1] = 1   # head
            inc[k, j - 1] = -1  # tail
        inc.setflags(write=False)
        object.__setattr__(self, "_incidence", inc)

    def __setattr__(self, name, value):
        raise AttributeError("FormationGraph is immutable")

    @property
    def m(self):
        return len(self.edges)

    @property
    def n_followers(self):
        return self.n - self.n_leaders

    @property
    def leaders(self):
        return tuple(range(1, self.n_leaders + 1))

    @property
    def followers(self):
        return tuple(range(self.n_leaders + 1, self.n + 1))

    def is_leader(self, i):
        return 1 <= i <= self.n_leaders

    def leader_edge_mask(self):
        """Boolean mask over edges whose both endpoints are leaders."""
        return np.array(
            [self.is_leader(i) and self.is_leader(j) for i, j in self.edges]
        )

    def __repr__(self):
        return f"FormationGraph(n={self.n}, n_leaders={self.n_leaders}, edges={list(self.edges)})"


def _check_connected(adjacency, n):
    reached = {1}
    stack = [1]
    while stack:
        v = stack.pop()
        for w in adjacency[v]:
            if w not in reached:
                reached.add(w)
                stack.append(w)
    if len(reached) != n:
        missing = sorted(set(range(1, n + 1)) - reached)
        raise DisconnectedGraphError(f"vertices {missing} unreachable from vertex 1")


def incidence_matrix(graph):
    """Oriented m-by-n incidence matrix over {0, +1, -1}.

    Row k has +1 at the head (first stored vertex) of edge k and -1 at the
    tail, so every row sums to zero; for a connected graph the rank is n-1.
    """
    return graph._incidence


def neighbors(graph, i):
    """Set of vertex ids adjacent to vertex ``i`` (1-based)."""
    if not (1 <= i <= graph.n):
        raise UnknownVertexError(f"vertex {i} outside 1..{graph.n}")
    return set(graph._adjacency[i])
