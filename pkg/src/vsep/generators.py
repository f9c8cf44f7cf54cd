"""Graph families used as test corpora and benchmark inputs."""

from __future__ import annotations

import numpy as np
from scipy.spatial import Delaunay

from .errors import PreconditionError
from .graph import Graph, RotationSystem


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise PreconditionError("a simple cycle needs n >= 3")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def star_graph(leaves: int) -> Graph:
    """``K_{1,leaves}`` with center 0."""
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def complete_bipartite(a: int, b: int) -> Graph:
    return Graph.from_edges(a + b, [(i, a + j) for i in range(a) for j in range(b)])


def grid_graph(rows: int, cols: int | None = None) -> Graph:
    cols = rows if cols is None else cols
    idx = lambda r, c: r * cols + c
    edges = [(idx(r, c), idx(r, c + 1)) for r in range(rows) for c in range(cols - 1)]
    edges += [(idx(r, c), idx(r + 1, c)) for r in range(rows - 1) for c in range(cols)]
    return Graph.from_edges(rows * cols, edges)


def random_connected_gnp(n: int, p: float, rng: np.random.Generator, max_tries: int = 1000) -> Graph:
    """Erdos-Renyi G(n, p) conditioned on connectivity (rejection sampling)."""
    iu, ju = np.triu_indices(n, 1)
    for _ in range(max_tries):
        keep = rng.random(iu.size) < p
        g = Graph.from_edges(n, zip(iu[keep], ju[keep]))
        if g.is_connected():
            return g
    raise PreconditionError(f"no connected G({n}, {p}) sample in {max_tries} tries")


def random_tree(n: int, rng: np.random.Generator) -> Graph:
    return Graph.from_edges(n, [(i, int(rng.integers(i))) for i in range(1, n)])


# ---------------------------------------------------------------- rotations

def rotation_from_triangles(n: int, triangles) -> RotationSystem:
    """Rotation system whose traced faces are exactly the given oriented triangles.

    A triangle ``(a, b, c)`` is the face walk a->b->c->a; with the tracing rule
    ``(u->v) -> (v -> succ_v(u))`` this means ``succ_b(a) = c`` and so on.
    """
    succ = [dict() for _ in range(n)]
    for a, b, c in triangles:
        for x, v, y in ((a, b, c), (b, c, a), (c, a, b)):
            if x in succ[v]:
                raise PreconditionError(f"triangles are not consistently oriented at vertex {v}")
            succ[v][x] = y
    rotations = []
    for v in range(n):
        if not succ[v]:
            rotations.append(())
            continue
        start = min(succ[v])
        rot, x = [start], succ[v][start]
        while x != start:
            rot.append(x)
            x = succ[v][x]
        if len(rot) != len(succ[v]):
            raise PreconditionError(f"link of vertex {v} is not a single cycle")
        rotations.append(tuple(rot))
    return RotationSystem.from_rotations(rotations)


def planar_rotation(points: np.ndarray, g: Graph) -> RotationSystem:
    """Rotation system of a straight-line drawing: neighbors sorted by angle."""
    pts = np.asarray(points, dtype=float)
    rotations = []
    for v in range(g.n):
        nb = np.array(g.adjacency[v], dtype=np.int64)
        if nb.size == 0:
            rotations.append(())
            continue
        d = pts[nb] - pts[v]
        order = np.argsort(np.arctan2(d[:, 1], d[:, 0]), kind="stable")
        rotations.append(tuple(int(u) for u in nb[order]))
    return RotationSystem(g, tuple(rotations))


def tetrahedron() -> RotationSystem:
    return rotation_from_triangles(4, [(0, 1, 2), (0, 2, 3), (0, 3, 1), (1, 3, 2)])


def octahedron() -> RotationSystem:
    # poles 0 (top) and 5 (bottom), equator 1-2-3-4
    tris = [(0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 1),
            (5, 2, 1), (5, 3, 2), (5, 4, 3), (5, 1, 4)]
    return rotation_from_triangles(6, tris)


def icosahedron() -> RotationSystem:
    top, bot = 0, 11
    up = [1, 2, 3, 4, 5]
    lo = [6, 7, 8, 9, 10]
    tris = []
    for i in range(5):
        a, b = up[i], up[(i + 1) % 5]
        c, d = lo[i], lo[(i + 1) % 5]
        tris += [(top, a, b), (a, c, b), (b, c, d), (bot, d, c)]
    return rotation_from_triangles(12, tris)


def planar_k4() -> RotationSystem:
    return tetrahedron()


def planar_cycle(n: int) -> RotationSystem:
    return RotationSystem(cycle_graph(n), tuple(((i - 1) % n, (i + 1) % n) for i in range(n)))


def torus_triangulation(k: int) -> RotationSystem:
    """The 6-regular triangulation of the k x k torus (k >= 3)."""
    if k < 3:
        raise PreconditionError("torus triangulation needs k >= 3 to stay simple")
    idx = lambda i, j: (i % k) * k + (j % k)
    tris = []
    for i in range(k):
        for j in range(k):
            a, b, c, d = idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)
            tris += [(a, b, c), (a, c, d)]
    return rotation_from_triangles(k * k, tris)


def toroidal_k7() -> RotationSystem:
    """K7 triangulating the torus (14 triangular faces)."""
    offs = (1, 3, 2, 6, 4, 5)
    return RotationSystem.from_rotations([[(i + o) % 7 for o in offs] for i in range(7)])


def toroidal_k5() -> RotationSystem:
    """K5 on the torus with five faces."""
    rots = [[1, 2, 4, 3], [0, 3, 4, 2], [0, 3, 4, 1], [0, 2, 4, 1], [0, 1, 3, 2]]
    return RotationSystem.from_rotations(rots)


def toroidal_k33() -> RotationSystem:
    """K_{3,3} on the torus with three hexagonal faces."""
    rots = [[3, 5, 4], [3, 5, 4], [3, 4, 5], [0, 2, 1], [0, 1, 2], [0, 2, 1]]
    return RotationSystem.from_rotations(rots)


def random_delaunay(n: int, rng: np.random.Generator, max_tries: int = 20) -> tuple[RotationSystem, np.ndarray]:
    """Random simple planar triangulation on ``n`` vertices with its drawing.

    ``n - 3`` uniform points in the unit disk are wrapped by a large outer
    triangle (vertices ``0, 1, 2``), so every traced face - including the outer
    one - is a triangle.
    """
    if n < 4:
        raise PreconditionError("a random triangulation needs n >= 4")
    outer = 10.0 * np.array([[np.cos(t), np.sin(t)] for t in (np.pi / 2, np.pi / 2 + 2 * np.pi / 3, np.pi / 2 + 4 * np.pi / 3)])
    for _ in range(max_tries):
        k = n - 3
        rad = np.sqrt(rng.random(k))
        ang = 2 * np.pi * rng.random(k)
        pts = np.vstack([outer, np.c_[rad * np.cos(ang), rad * np.sin(ang)]])
        try:
            tri = Delaunay(pts)
        except Exception:  # QhullError on degenerate samples
            continue
        if len(tri.coplanar):
            continue
        edges = set()
        for s in tri.simplices:
            for a, b in ((s[0], s[1]), (s[1], s[2]), (s[0], s[2])):
                edges.add((int(min(a, b)), int(max(a, b))))
        g = Graph.from_edges(n, sorted(edges))
        r = planar_rotation(pts, g)
        if r.is_triangulation() and r.num_faces == 2 * n - 4:
            return r, pts
    raise PreconditionError("could not sample a non-degenerate point set")


def generate_random_triangulation(n: int, seed: int = 0) -> RotationSystem:
    return random_delaunay(n, np.random.default_rng(seed))[0]
