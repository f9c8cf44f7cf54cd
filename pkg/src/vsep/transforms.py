"""Combinatorial graph transformations and certificate transport.

Rotation-system edits rely on one rule: to add a chord inside a face at a
corner ``p -> a -> q`` (so ``q = succ_a(p)``), insert the new neighbor of
``a`` immediately after ``p`` in ``a``'s rotation.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass

import numpy as np

from .certificates import EmbeddingCertificate, centered, verify
from .errors import InfeasibleCertificateError, PreconditionError
from .generators import rotation_from_triangles
from .graph import Graph, RotationSystem, euler_genus


# ------------------------------------------------------- hexagonal subdivision

def hexagonal_subdivide(r: RotationSystem, k: int = 1) -> RotationSystem:
    """Bisect every edge and join the three midpoints inside each triangle, ``k`` times.

    Midpoint of edge ``i`` gets id ``n + i``. Each face ``(a, b, c)`` becomes
    ``(a, m_ab, m_ca)``, ``(m_ab, b, m_bc)``, ``(m_ca, m_bc, c)``, ``(m_ab, m_bc, m_ca)``
    with the same orientation, so the output is a triangulation of the same surface.
    """
    if k < 0:
        raise PreconditionError("k must be non-negative")
    for _ in range(k):
        if not r.is_triangulation():
            raise PreconditionError("hexagonal subdivision needs a triangulation")
        g = r.graph
        mid = lambda a, b: g.n + g.edge_id(a, b)
        tris = []
        for a, b, c in r.faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            tris += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
        r = rotation_from_triangles(g.n + g.m, tris)
    return r


# ------------------------------------------------------------- minor maps

@dataclass(frozen=True)
class UniformShallowMinorMap:
    """``p: V(H) -> V(G)`` with equal patch sizes ``r`` and patch diameter at most ``L``."""

    p: np.ndarray
    r: int
    L: int

    def patches(self, n: int) -> list[np.ndarray]:
        order = np.argsort(self.p, kind="stable")
        bounds = np.searchsorted(self.p[order], np.arange(n + 1))
        return [order[bounds[v]:bounds[v + 1]] for v in range(n)]

    def violations(self, g: Graph, h: Graph) -> list[str]:
        out = []
        p = np.asarray(self.p)
        if p.shape != (h.n,):
            return ["map length differs from |V(H)|"]
        sizes = np.bincount(p, minlength=g.n)
        if np.any(sizes != self.r):
            out.append(f"patch sizes {sorted(set(sizes.tolist()))} differ from r={self.r}")
        for v, patch in enumerate(self.patches(g.n)):
            sub, _ = h.induced_subgraph(patch)
            if not sub.is_connected():
                out.append(f"patch of {v} is disconnected")
            elif _diameter(sub) > self.L:
                out.append(f"patch of {v} has diameter {_diameter(sub)} > L={self.L}")
        realized = set()
        for a, b in h.edges:
            pa, pb = int(p[a]), int(p[b])
            if pa != pb:
                if not g.has_edge(pa, pb):
                    out.append(f"H-edge ({a}, {b}) maps to non-edge ({pa}, {pb})")
                realized.add((min(pa, pb), max(pa, pb)))
        missing = [tuple(e) for e in g.edges.tolist() if tuple(e) not in realized]
        if missing:
            out.append(f"G-edges without an H-edge between patches: {missing[:5]}")
        return out


def _bfs(h: Graph, s: int) -> np.ndarray:
    dist = np.full(h.n, -1)
    dist[s] = 0
    q = deque([s])
    while q:
        x = q.popleft()
        for y in h.adjacency[x]:
            if dist[y] < 0:
                dist[y] = dist[x] + 1
                q.append(y)
    return dist


def _diameter(h: Graph) -> int:
    return max((int(_bfs(h, s).max()) for s in range(h.n)), default=0)


def contract(h: Graph, p: np.ndarray, n: int) -> Graph:
    """Quotient of ``h`` by the map ``p`` (loops dropped, parallel edges merged)."""
    edges = {(min(int(p[a]), int(p[b])), max(int(p[a]), int(p[b]))) for a, b in h.edges if p[a] != p[b]}
    return Graph.from_edges(n, sorted(edges))


# ------------------------------------------------------------ degree reduction

def _balanced_bst(lo: int, hi: int, parent: int, out: dict):
    """Balanced BST over in-order positions ``lo..hi-1``; ``out[pos] = (parent, left, right)``."""
    if lo >= hi:
        return -1
    mid = (lo + hi) // 2
    left = _balanced_bst(lo, mid, mid, out)
    right = _balanced_bst(mid + 1, hi, mid, out)
    out[mid] = (parent, left, right)
    return mid


def degree_reduce(r: RotationSystem) -> tuple[RotationSystem, UniformShallowMinorMap]:
    """Replace each vertex by a near-perfect binary tree of ``Delta`` copies.

    The copy at in-order position ``j`` of vertex ``v`` has id ``v * Delta + j``
    and carries the edge to the ``j``-th neighbor in ``v``'s rotation, so the
    in-order walk around each tree reproduces the rotation and the genus is kept.
    """
    g = r.graph
    if not g.is_connected():
        raise PreconditionError("degree_reduce needs a connected graph")
    delta = g.max_degree
    if delta < 2:
        return r, UniformShallowMinorMap(np.arange(g.n), 1, 0)
    tree: dict = {}
    _balanced_bst(0, delta, -1, tree)
    copy = lambda v, j: v * delta + j

    def build(order):
        rotations = []
        for v in range(g.n):
            rot_v = r.rotations[v]
            for j in range(delta):
                parent, left, right = tree[j]
                ext = copy(rot_v[j], r.rotations[rot_v[j]].index(v)) if j < len(rot_v) else -1
                slots = {"parent": copy(v, parent) if parent >= 0 else -1,
                         "left": copy(v, left) if left >= 0 else -1,
                         "right": copy(v, right) if right >= 0 else -1,
                         "ext": ext}
                rotations.append([slots[s] for s in order if slots[s] >= 0])
        return RotationSystem.from_rotations(rotations)

    genus = euler_genus(r)
    for order in (("parent", "left", "ext", "right"), ("parent", "right", "ext", "left")):
        h = build(order)
        if euler_genus(h) == genus:
            break
    else:  # pragma: no cover - one of the two mirror orders always works
        raise AssertionError("degree reduction changed the genus")
    p = np.repeat(np.arange(g.n), delta)
    sub, _ = h.graph.induced_subgraph(range(delta))
    return h, UniformShallowMinorMap(p, delta, _diameter(sub))


# -------------------------------------------------------------- triangulation

def _insert_after(rot: list, after, new):
    rot.insert(rot.index(after) + 1, new)


def _faces_of(rot: list[list[int]]):
    return RotationSystem.from_rotations(rot).faces


def triangulate(r: RotationSystem, check: bool = True) -> RotationSystem:
    """Triangulate with ``Delta`` satellites per vertex, satellite cycles, quad diagonals and zig-zag ears.

    Satellite ``i`` of vertex ``v`` has id ``n + v * Delta + i``.
    """
    g = r.graph
    if not g.is_connected():
        raise PreconditionError("triangulate needs a connected graph")
    if g.n < 2:
        raise PreconditionError("triangulate needs at least one edge")
    n, delta = g.n, g.max_degree
    genus = euler_genus(r)
    rot = [list(x) for x in r.rotations] + [[] for _ in range(n * delta)]
    owner = {}

    # H1: one satellite per rotation gap, the remaining ones round-robin
    for v in range(n):
        base = list(r.rotations[v])
        d = len(base)
        counts = [1] * d
        for i in range(delta - d):
            counts[i % d] += 1
        new_rot, s = [], 0
        for j, u in enumerate(base):
            new_rot.append(u)
            for _ in range(counts[j]):
                sat = n + v * delta + s
                new_rot.append(sat)
                rot[sat] = [v]
                owner[sat] = v
                s += 1
        rot[v] = new_rot

    # H2: inside each face, a cycle through its satellites in walk order
    for face in _faces_of(rot):
        sats = [x for x in face if x in owner]
        k = len(sats)
        if k == 2:
            a, b = sats
            rot[a] = [owner[a], b]
            rot[b] = [owner[b], a]
        elif k >= 3:
            for i, s in enumerate(sats):
                rot[s] = [owner[s], sats[i - 1], sats[(i + 1) % k]]

    faces = _faces_of(rot)
    if check:
        big = [f for f in faces if len(f) > 4]
        seen = {}
        for fi, f in enumerate(big):
            for i in range(len(f)):
                key = frozenset((f[i], f[(i + 1) % len(f)]))
                if key in seen and seen[key] != fi:
                    raise AssertionError("two faces of size > 4 share an edge before zig-zagging")
                seen[key] = fi

    edges = {frozenset((v, u)) for v in range(len(rot)) for u in rot[v]}

    def add_chord(face, i, j):
        """Chord between positions i and j of a face walk (corners keep the face's side)."""
        a, b = face[i], face[j]
        rot_a_prev = face[i - 1]
        rot_b_prev = face[j - 1]
        _insert_after(rot[a], rot_a_prev, b)
        _insert_after(rot[b], rot_b_prev, a)
        edges.add(frozenset((a, b)))

    # H3: one diagonal per quadrilateral, avoiding existing edges
    for face in faces:
        if len(face) != 4:
            continue
        for i in (0, 1):
            if frozenset((face[i], face[i + 2])) not in edges and face[i] != face[i + 2]:
                add_chord(face, i, i + 2)
                break
        else:
            raise AssertionError(f"quadrilateral {face} has both diagonals present")

    # zig-zag ear cuts on the remaining (simple, pairwise non-adjacent) faces
    for face in _faces_of(rot):
        if len(face) <= 3:
            continue
        if len(set(face)) != len(face):
            raise AssertionError(f"non-simple face {face} left for zig-zagging")
        start = face.index(min(face))
        poly = list(face[start:] + face[:start])
        front = True
        while len(poly) > 3:
            if not front:
                poly = [poly[-1]] + poly[:-1]
            # ear at poly[0]: chord poly[1] - poly[-1]
            a, b = poly[1], poly[-1]
            if frozenset((a, b)) in edges:
                raise AssertionError(f"zig-zag chord ({a}, {b}) would duplicate an edge")
            _insert_after(rot[a], poly[0], b)
            _insert_after(rot[b], poly[-2], a)
            edges.add(frozenset((a, b)))
            poly = poly[1:]
            front = not front

    out = RotationSystem.from_rotations(rot)
    if check:
        if not out.is_triangulation():
            raise AssertionError("triangulate left a non-triangular face")
        if euler_genus(out) != genus:
            raise AssertionError("triangulate changed the genus")
    return out


def satellite_map(r: RotationSystem) -> UniformShallowMinorMap:
    """Each vertex together with its satellites, as a shallow-minor map of depth 2."""
    n, delta = r.graph.n, r.graph.max_degree
    p = np.concatenate([np.arange(n), np.repeat(np.arange(n), delta)])
    return UniformShallowMinorMap(p, delta + 1, 2)


# ----------------------------------------------------------------- pullback

def usm_pullback(
    g: Graph,
    h: Graph,
    mapping: UniformShallowMinorMap,
    cert_h: EmbeddingCertificate,
    samples: int = 64,
    seed: int = 0,
) -> EmbeddingCertificate:
    """Pull a line certificate on ``H`` back to its uniform shallow minor ``G``.

    Each patch sends one random representative; the sample maximizing the
    spread of representatives is kept. ``y_G(v) = 4r(2L+1) * sum of y_H over
    the patch``, so the value is exactly ``4r(2L+1)`` times the input value.
    """
    if cert_h.n != h.n:
        raise PreconditionError("certificate does not match H")
    if cert_h.d != 1:
        raise PreconditionError("usm_pullback transports line certificates")
    p = np.asarray(mapping.p)
    patches = mapping.patches(g.n)
    fh = centered(cert_h.f)[:, 0]
    target = float(np.sum(fh ** 2)) / (2 * mapping.r)
    rng = np.random.default_rng(seed)
    best, best_score = None, -np.inf
    for _ in range(max(samples, 1)):
        reps = np.array([patch[rng.integers(len(patch))] for patch in patches])
        fg = fh[reps] - fh[reps].mean()
        score = float(np.sum(fg ** 2))
        if score > best_score:
            best, best_score = fg, score
        if score >= target:
            break
    factor = 4 * mapping.r * (2 * mapping.L + 1)
    yg = factor * np.bincount(p, weights=cert_h.y, minlength=g.n)
    cert = EmbeddingCertificate(best, yg)
    rep = verify(cert, g)
    if not rep.feasible:
        raise InfeasibleCertificateError(
            f"pulled-back certificate infeasible after {samples} samples (worst slack {rep.worst_slack:.3e}); raise the sample budget"
        )
    return cert


# ---------------------------------------------------- edge -> vertex expansion

@dataclass(frozen=True)
class ExpansionReduction:
    """``G'``: ``k`` copies of each vertex plus one vertex per edge, joined by incidence.

    Copy ``i`` of ``v`` has id ``v * k + i``; the vertex of edge ``j`` has id ``n * k + j``.
    """

    source: Graph
    k: int
    graph: Graph

    def copies(self, v: int) -> range:
        return range(v * self.k, (v + 1) * self.k)

    def edge_vertex(self, j: int) -> int:
        return self.source.n * self.k + j

    def forward(self, S) -> frozenset:
        """``S' = {v^i : v in S} + E[S]``."""
        S = set(int(v) for v in S)
        out = {c for v in S for c in self.copies(v)}
        out |= {self.edge_vertex(j) for j, (u, v) in enumerate(self.source.edges) if u in S and v in S}
        return frozenset(out)

    def normalize(self, S_prime) -> tuple[frozenset, frozenset]:
        """``(S'', S)``: whole copy-sets of every touched vertex, plus the edges they span."""
        n, k = self.source.n, self.k
        S = frozenset(int(x) // k for x in S_prime if x < n * k)
        return self.forward(S), S


def expansion_reduction(g: Graph, k: int | None = None) -> ExpansionReduction:
    if k is None:
        k = g.n ** 2 + g.n + 1
    if k < g.n ** 2 + g.n + 1:
        warnings.warn(f"k={k} is below n^2+n+1={g.n ** 2 + g.n + 1}; the reduction's guarantees need the bound", RuntimeWarning, stacklevel=2)
    n = g.n
    edges = []
    for j, (u, v) in enumerate(g.edges):
        e = n * k + j
        edges += [(e, u * k + i) for i in range(k)]
        edges += [(e, v * k + i) for i in range(k)]
    return ExpansionReduction(g, k, Graph.from_edges(n * k + g.m, edges))
