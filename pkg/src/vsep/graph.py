"""Simple undirected graphs, rotation systems, and vertex-cut primitives.

Every other module builds on :class:`Graph`. Vertices are always the dense
range ``0..n-1``; original input labels live in ``Graph.labels``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import GraphFormatError, PreconditionError


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple undirected graph with sorted adjacency lists."""

    n: int
    adjacency: tuple[tuple[int, ...], ...]
    labels: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.adjacency) != self.n:
            raise GraphFormatError(f"adjacency has {len(self.adjacency)} rows, expected {self.n}")
        for v, nbrs in enumerate(self.adjacency):
            prev = -1
            for u in nbrs:
                if not 0 <= u < self.n:
                    raise GraphFormatError(f"vertex {v} lists out-of-range neighbor {u}")
                if u == v:
                    raise GraphFormatError(f"self-loop at vertex {v}")
                if u <= prev:
                    raise GraphFormatError(f"adjacency of {v} not strictly sorted (duplicate or unordered)")
                prev = u
        for v, nbrs in enumerate(self.adjacency):
            for u in nbrs:
                if not self.has_edge(u, v):
                    raise GraphFormatError(f"asymmetric adjacency: {v}->{u} without {u}->{v}")
        if self.labels is not None and len(self.labels) != self.n:
            raise GraphFormatError("labels length does not match n")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]], labels=None) -> "Graph":
        """Build a graph from an edge iterable; rejects loops and repeated edges."""
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if not (0 <= u < n and 0 <= v < n):
                raise GraphFormatError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise GraphFormatError(f"self-loop at vertex {u}")
            if v in nbrs[u]:
                raise GraphFormatError(f"parallel edge ({u}, {v})")
            nbrs[u].add(v)
            nbrs[v].add(u)
        adjacency = tuple(tuple(sorted(s)) for s in nbrs)
        return cls(n, adjacency, None if labels is None else tuple(labels))

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.adjacency == other.adjacency

    def __hash__(self):
        return hash((self.n, self.adjacency))

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency], dtype=np.int64)

    @property
    def m(self) -> int:
        return int(self.degrees.sum()) // 2

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.n else 0

    @cached_property
    def edges(self) -> np.ndarray:
        """Edges as an ``(m, 2)`` int array, each row ``u < v``, sorted."""
        out = [(u, v) for u in range(self.n) for v in self.adjacency[u] if u < v]
        return np.array(out, dtype=np.int64).reshape(-1, 2)

    @cached_property
    def _neighbor_sets(self) -> tuple[frozenset, ...]:
        return tuple(frozenset(a) for a in self.adjacency)

    @cached_property
    def _edge_index(self) -> dict:
        return {(int(u), int(v)): i for i, (u, v) in enumerate(self.edges)}

    def edge_id(self, u: int, v: int) -> int:
        if u > v:
            u, v = v, u
        return self._edge_index[(u, v)]

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._neighbor_sets[u]

    def adjacency_matrix(self, sparse: bool = True):
        e = self.edges
        data = np.ones(2 * len(e))
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        a = sp.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))
        return a if sparse else a.toarray()

    def components(self) -> list[list[int]]:
        seen = np.zeros(self.n, dtype=bool)
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp, queue = [s], deque([s])
            while queue:
                x = queue.popleft()
                for y in self.adjacency[x]:
                    if not seen[y]:
                        seen[y] = True
                        comp.append(y)
                        queue.append(y)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return self.n <= 1 or len(self.components()) == 1

    def induced_subgraph(self, vertices: Iterable[int]) -> tuple["Graph", np.ndarray]:
        """Induced subgraph on ``vertices``; returns it with the local->global id map."""
        verts = np.array(sorted(set(int(v) for v in vertices)), dtype=np.int64)
        local = {int(v): i for i, v in enumerate(verts)}
        adjacency = tuple(
            tuple(sorted(local[u] for u in self.adjacency[v] if u in local)) for v in verts
        )
        return Graph(len(verts), adjacency), verts

    def canonical_text(self) -> str:
        lines = [f"# n={self.n} m={self.m}"]
        lines += [f"{u} {v}" for u, v in self.edges]
        return "\n".join(lines) + "\n"


def _check_subset(g: Graph, S) -> np.ndarray:
    s = np.unique(np.asarray(list(S), dtype=np.int64))
    if s.size and (s[0] < 0 or s[-1] >= g.n):
        raise PreconditionError(f"vertex id out of range for n={g.n}")
    return s


def laplacian(g: Graph, sparse: bool = False):
    """Combinatorial Laplacian ``D - A``."""
    a = g.adjacency_matrix(sparse=True)
    lap = sp.diags(g.degrees.astype(float)) - a
    return lap.tocsr() if sparse else lap.toarray()


def vertex_boundary(g: Graph, S) -> frozenset[int]:
    """Vertices outside ``S`` with a neighbor inside ``S``."""
    s = _check_subset(g, S)
    inside = set(s.tolist())
    return frozenset(u for v in inside for u in g.adjacency[v] if u not in inside)


def edge_boundary_size(g: Graph, S) -> int:
    s = _check_subset(g, S)
    inside = set(s.tolist())
    return sum(1 for v in inside for u in g.adjacency[v] if u not in inside)


def expansion_of(g: Graph, S) -> tuple[float, float]:
    """Return ``(psi, phi)`` = vertex and edge expansion of ``S``."""
    s = _check_subset(g, S)
    if s.size == 0 or s.size > g.n // 2:
        raise PreconditionError(f"need 1 <= |S| <= {g.n // 2}, got {s.size}")
    return len(vertex_boundary(g, s)) / s.size, edge_boundary_size(g, s) / s.size


@dataclass(frozen=True)
class VertexCut:
    S: tuple[int, ...]
    boundary: tuple[int, ...]
    ratio: float

    @classmethod
    def of(cls, g: Graph, S) -> "VertexCut":
        s = _check_subset(g, S)
        if s.size == 0 or s.size > g.n // 2:
            raise PreconditionError(
                f"a VertexCut needs 1 <= |S| <= {g.n // 2}; take the complement first (|S|={s.size})"
            )
        b = sorted(vertex_boundary(g, s))
        return cls(tuple(s.tolist()), tuple(b), len(b) / s.size)


@dataclass(frozen=True)
class Separator:
    S: tuple[int, ...]
    A: tuple[int, ...]
    B: tuple[int, ...]
    alpha: float

    def violations(self, g: Graph) -> list[str]:
        out = []
        sets = [set(self.S), set(self.A), set(self.B)]
        if sum(len(x) for x in sets) != g.n or set().union(*sets) != set(range(g.n)):
            out.append("S, A, B do not partition V")
        cap = np.floor(self.alpha * g.n + 1e-9)
        if len(self.A) > cap or len(self.B) > cap:
            out.append(f"part sizes {len(self.A)}, {len(self.B)} exceed alpha*n = {self.alpha * g.n:.3f}")
        # label components of G - S and make sure none straddles A and B
        side = np.zeros(g.n, dtype=np.int8)
        side[list(self.A)] = 1
        side[list(self.B)] = 2
        for u, v in g.edges:
            if {side[u], side[v]} == {1, 2}:
                out.append(f"edge ({u}, {v}) joins A and B")
                break
        return out

    def is_valid(self, g: Graph) -> bool:
        return not self.violations(g)


@dataclass(frozen=True, eq=False)
class RotationSystem:
    """Cyclic neighbor orders per vertex: a combinatorial orientable embedding.

    Faces are traced with the rule: after dart ``u -> v`` comes
    ``v -> succ_v(u)``, the rotation successor of ``u`` around ``v``.
    """

    graph: Graph
    rotations: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        g = self.graph
        if len(self.rotations) != g.n:
            raise GraphFormatError("one rotation per vertex required")
        for v, rot in enumerate(self.rotations):
            if len(rot) != len(set(rot)) or tuple(sorted(rot)) != g.adjacency[v]:
                raise GraphFormatError(f"rotation at {v} is not a permutation of its incident edges")

    @classmethod
    def from_rotations(cls, rotations: Sequence[Sequence[int]], labels=None) -> "RotationSystem":
        n = len(rotations)
        edges = {(min(v, u), max(v, u)) for v, rot in enumerate(rotations) for u in rot}
        for v, rot in enumerate(rotations):
            for u in rot:
                if u == v:
                    raise GraphFormatError(f"self-loop at vertex {v}")
                if v not in rotations[u]:
                    raise GraphFormatError(f"asymmetric adjacency: {v}->{u} without {u}->{v}")
        g = Graph.from_edges(n, sorted(edges), labels=labels)
        return cls(g, tuple(tuple(int(u) for u in rot) for rot in rotations))

    @cached_property
    def _position(self) -> tuple[dict, ...]:
        return tuple({u: i for i, u in enumerate(rot)} for rot in self.rotations)

    def succ(self, v: int, u: int) -> int:
        rot = self.rotations[v]
        return rot[(self._position[v][u] + 1) % len(rot)]

    @cached_property
    def faces(self) -> tuple[tuple[int, ...], ...]:
        """Traced faces, each as the cyclic sequence of dart tails."""
        seen = set()
        faces = []
        for u in range(self.graph.n):
            for v in self.rotations[u]:
                if (u, v) in seen:
                    continue
                walk = []
                a, b = u, v
                while (a, b) not in seen:
                    seen.add((a, b))
                    walk.append(a)
                    a, b = b, self.succ(b, a)
                faces.append(tuple(walk))
        return tuple(faces)

    @property
    def num_faces(self) -> int:
        return len(self.faces)

    def is_triangulation(self) -> bool:
        return self.graph.m > 0 and all(len(f) == 3 for f in self.faces)

    def canonical_text(self) -> str:
        return "".join(f"{v}: {' '.join(map(str, rot))}\n" for v, rot in enumerate(self.rotations))


def euler_genus(r: RotationSystem) -> int:
    """Orientable genus ``(2 - n + m - f) / 2`` of a connected rotation system."""
    g = r.graph
    if not g.is_connected():
        raise PreconditionError("genus is only defined here for connected graphs")
    twice = 2 - g.n + g.m - r.num_faces
    if twice < 0 or twice % 2:
        raise GraphFormatError(f"inconsistent face count: 2g = {twice}")
    return twice // 2
