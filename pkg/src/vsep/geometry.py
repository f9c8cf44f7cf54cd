"""Ball systems, circle packings, sphere centering, and the geometric certificate.

A spherical cap ``{X in S^d : u . X >= w}`` is stored internally as the
Lorentz vector ``C = (u, w)`` with ``|u|^2 - w^2 = 1``; its center is
``u / |u|`` and its geodesic radius ``atan2(1, w)``. Conformal maps of the
sphere act linearly on these vectors (Lorentz boosts), so caps go to caps
and two caps are tangent exactly when ``u_i . u_j - w_i w_j = -1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .certificates import BallCertificate
from .errors import ConvergenceError, PreconditionError
from .generators import generate_random_triangulation, random_delaunay  # noqa: F401  (re-exported)
from .graph import Graph, RotationSystem, euler_genus

EUCLIDEAN = "euclidean"
GEODESIC = "geodesic"


@dataclass(frozen=True)
class BallSystem:
    """Closed balls: ``centers`` in ``R^d`` (euclidean) or unit vectors in ``R^(d+1)`` (geodesic)."""

    d: int
    centers: np.ndarray
    radii: np.ndarray
    kind: str = EUCLIDEAN

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=float)
        c = c.reshape(-1, 1) if c.ndim == 1 else c
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "radii", np.asarray(self.radii, dtype=float).ravel())
        if self.kind not in (EUCLIDEAN, GEODESIC):
            raise PreconditionError(f"unknown ball-system kind {self.kind!r}")
        want = self.d + (1 if self.kind == GEODESIC else 0)
        if c.shape[1] != want or c.shape[0] != self.radii.size:
            raise PreconditionError(f"centers must be an (n, {want}) array matching the radii")
        if self.radii.size and self.radii.min() < 0:
            raise PreconditionError("negative radius")
        if self.kind == GEODESIC and c.size and np.max(np.abs(np.linalg.norm(c, axis=1) - 1)) > 1e-9:
            raise PreconditionError("geodesic ball centers must be unit vectors")

    @property
    def n(self) -> int:
        return self.radii.size

    def to_document(self) -> dict:
        return {"d": self.d, "kind": self.kind, "centers": self.centers.tolist(), "radii": self.radii.tolist()}

    @classmethod
    def from_document(cls, doc: dict) -> "BallSystem":
        return cls(int(doc["d"]), np.array(doc["centers"], dtype=float), np.array(doc["radii"], dtype=float), doc.get("kind", EUCLIDEAN))


def _pair_gaps(b: BallSystem) -> np.ndarray:
    """``dist(c_u, c_v) - r_u - r_v`` for all pairs (geodesic or euclidean distance)."""
    c = b.centers
    if b.kind == GEODESIC:
        dist = np.arccos(np.clip(c @ c.T, -1.0, 1.0))
    else:
        sq = np.sum(c * c, axis=1)
        dist = np.sqrt(np.maximum(sq[:, None] + sq[None, :] - 2 * c @ c.T, 0.0))
    return dist - (b.radii[:, None] + b.radii[None, :])


def intersection_graph(b: BallSystem, tol: float = 0.0) -> Graph:
    """Edge ``uv`` iff the closed balls meet (distance ``<= r_u + r_v + tol``)."""
    gap = _pair_gaps(b)
    iu, ju = np.triu_indices(b.n, 1)
    keep = gap[iu, ju] <= tol
    return Graph.from_edges(b.n, zip(iu[keep].tolist(), ju[keep].tolist()))


# ------------------------------------------------------------------------ ply

def _depth_open(b: BallSystem, pts: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Number of open balls containing each probe point."""
    out = np.empty(len(pts), dtype=np.int64)
    c, r = b.centers, b.radii
    for s in range(0, len(pts), chunk):
        p = pts[s:s + chunk]
        if b.kind == GEODESIC:
            inside = p @ c.T > np.cos(r)[None, :]
        else:
            d2 = np.sum(p * p, axis=1)[:, None] + np.sum(c * c, axis=1)[None, :] - 2 * p @ c.T
            inside = d2 < (r ** 2)[None, :]
        out[s:s + chunk] = inside.sum(axis=1)
    return out


def _circle_intersections_plane(c: np.ndarray, r: np.ndarray):
    i, j = np.triu_indices(len(r), 1)
    d = np.linalg.norm(c[j] - c[i], axis=1)
    ok = (d > 0) & (d <= r[i] + r[j]) & (d >= np.abs(r[i] - r[j]))
    i, j, d = i[ok], j[ok], d[ok]
    a = (r[i] ** 2 - r[j] ** 2 + d ** 2) / (2 * d)
    h = np.sqrt(np.maximum(r[i] ** 2 - a ** 2, 0.0))
    e = (c[j] - c[i]) / d[:, None]
    base = c[i] + a[:, None] * e
    perp = np.c_[-e[:, 1], e[:, 0]]
    return np.vstack([base + h[:, None] * perp, base - h[:, None] * perp])


def _circle_intersections_sphere(c: np.ndarray, r: np.ndarray):
    i, j = np.triu_indices(len(r), 1)
    ci, cj = c[i], c[j]
    hi, hj = np.cos(r[i]), np.cos(r[j])
    dot = np.sum(ci * cj, axis=1)
    det = 1 - dot ** 2
    ok = det > 1e-15
    ci, cj, hi, hj, dot, det = ci[ok], cj[ok], hi[ok], hj[ok], dot[ok], det[ok]
    a = (hi - hj * dot) / det
    bb = (hj - hi * dot) / det
    base = a[:, None] * ci + bb[:, None] * cj
    cross = np.cross(ci, cj)
    t2 = (1 - np.sum(base * base, axis=1)) / np.sum(cross * cross, axis=1)
    ok = t2 >= 0
    t = np.sqrt(t2[ok])[:, None]
    return np.vstack([base[ok] + t * cross[ok], base[ok] - t * cross[ok]])


@dataclass
class PlyResult:
    ply: int
    method: str
    probes: int

    def __int__(self):
        return self.ply


def ply_report(b: BallSystem, probes: int = 20000, seed: int = 0, eps: float = 1e-7) -> PlyResult:
    """Maximum number of balls over a common point, ignoring measure-zero contacts.

    In one dimension and in the plane/2-sphere every cell of the arrangement is
    probed (points just inside each boundary-crossing vertex plus every center),
    which is exact; otherwise a Monte-Carlo sample gives a lower estimate.
    """
    if b.n == 0:
        return PlyResult(0, "empty", 0)
    c, r = b.centers, b.radii
    if b.kind == EUCLIDEAN and b.d == 1:
        ends = np.concatenate([c[:, 0] - r, c[:, 0] + r])
        scale = eps * max(1.0, np.abs(ends).max())
        pts = np.concatenate([ends - scale, ends + scale, c[:, 0]])[:, None]
        return PlyResult(int(_depth_open(b, pts).max()), "exact-1d", len(pts))
    if (b.kind == EUCLIDEAN and b.d == 2) or (b.kind == GEODESIC and b.d == 2):
        if b.kind == EUCLIDEAN:
            verts = _circle_intersections_plane(c, r)
            scale = eps * max(1.0, float(np.abs(c).max() + r.max()))
            ang = np.linspace(0, 2 * np.pi, 8, endpoint=False)
            offs = scale * np.c_[np.cos(ang), np.sin(ang)]
            pts = np.vstack([c] + [verts + o for o in offs]) if len(verts) else c
        else:
            verts = _circle_intersections_sphere(c, r)
            pts = [c]
            if len(verts):
                t1 = np.cross(verts, np.array([0.3, 0.5, 0.8]))
                t1 /= np.linalg.norm(t1, axis=1, keepdims=True)
                t2 = np.cross(verts, t1)
                for a in np.linspace(0, 2 * np.pi, 8, endpoint=False):
                    p = verts + eps * (np.cos(a) * t1 + np.sin(a) * t2)
                    pts.append(p / np.linalg.norm(p, axis=1, keepdims=True))
            pts = np.vstack(pts)
        return PlyResult(int(_depth_open(b, pts).max()), "exact-arrangement", len(pts))
    rng = np.random.default_rng(seed)
    if b.kind == GEODESIC:
        pts = rng.standard_normal((probes, b.d + 1))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    else:
        lo, hi = (c - r[:, None]).min(axis=0), (c + r[:, None]).max(axis=0)
        pts = lo + (hi - lo) * rng.random((probes, b.d))
    pts = np.vstack([c, pts])
    return PlyResult(int(_depth_open(b, pts).max()), "monte-carlo-lower-bound", len(pts))


def ply(b: BallSystem, probes: int = 20000, seed: int = 0) -> int:
    return ply_report(b, probes, seed).ply


# ------------------------------------------------------------------------ kNN

def knn_graph(points, k: int) -> Graph:
    """Symmetric k-nearest-neighbor graph; distance ties go to the smaller index."""
    pts = np.asarray(points, dtype=float)
    pts = pts.reshape(-1, 1) if pts.ndim == 1 else pts
    n = len(pts)
    if len(np.unique(pts, axis=0)) != n:
        raise PreconditionError("knn_graph needs distinct points")
    if n < 2 or k < 1:
        return Graph.from_edges(n, [])
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=2)
    idx = np.arange(n)
    edges = set()
    for i in range(n):
        order = np.lexsort((idx, d2[i]))
        order = order[order != i][:k]
        edges.update((min(i, int(j)), max(i, int(j))) for j in order)
    return Graph.from_edges(n, sorted(edges))


# ------------------------------------------------------------ Lorentz helpers

def caps_from_plane(centers: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Lorentz vectors of the caps obtained by inverse stereographic projection of disks."""
    z = np.asarray(centers, dtype=float)
    rho = np.asarray(radii, dtype=float)
    K = np.sum(z * z, axis=1) - rho ** 2
    return np.c_[z / rho[:, None], (K - 1) / (2 * rho), (K + 1) / (2 * rho)]


def caps_from_sphere(centers: np.ndarray, radii: np.ndarray) -> np.ndarray:
    c = np.asarray(centers, dtype=float)
    r = np.asarray(radii, dtype=float)
    return np.c_[c / np.sin(r)[:, None], np.cos(r) / np.sin(r)]


def caps_to_sphere(C: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    u, w = C[:, :-1], C[:, -1]
    norm = np.linalg.norm(u, axis=1)
    return u / norm[:, None], np.arctan2(1.0, w)


def _boost(C: np.ndarray, e: np.ndarray, t: float) -> np.ndarray:
    """Lorentz boost along unit ``e``; on the sphere it pushes points away from ``e`` for ``t > 0``."""
    u, w = C[:, :-1], C[:, -1]
    par = u @ e
    ch, sh = np.cosh(t), np.sinh(t)
    new_par = ch * par - sh * w
    new_w = ch * w - sh * par
    return np.c_[u + (new_par - par)[:, None] * e[None, :], new_w]


def lift_to_sphere(b: BallSystem) -> BallSystem:
    """Inverse stereographic image (pole ``e_{d+1}``) of a euclidean ball system."""
    if b.kind != EUCLIDEAN:
        raise PreconditionError("lift_to_sphere expects euclidean balls")
    if b.radii.min(initial=1.0) <= 0:
        raise PreconditionError("cannot lift zero-radius balls")
    centers, radii = caps_to_sphere(caps_from_plane(b.centers, b.radii))
    return BallSystem(b.d, centers, radii, GEODESIC)


# ------------------------------------------------------------ sphere centering

def sphere_normalize(
    b: BallSystem,
    tol: float = 1e-10,
    max_iter: int = 500,
    check_precondition: bool | None = None,
    max_step: float = 1.0,
) -> BallSystem:
    """Conformal automorphism of the sphere moving the centroid of the cap centers to the origin."""
    if b.kind != GEODESIC:
        raise PreconditionError("sphere_normalize expects a geodesic ball system")
    n = b.n
    if n < 2:
        raise PreconditionError("need at least two caps")
    if check_precondition is None:
        check_precondition = n <= 200
    if check_precondition and b.d == 2:
        depth = ply(b)
        if depth >= int(np.ceil(n / 2)):
            raise PreconditionError(f"a point is covered by {depth} >= ceil(n/2) caps; no centering map exists")
    C = caps_from_sphere(b.centers, b.radii)
    centers, _ = caps_to_sphere(C)
    mu = centers.mean(axis=0)
    norm = np.linalg.norm(mu)
    for _ in range(max_iter):
        if norm <= tol:
            break
        e = mu / norm
        M = centers.T @ centers / n
        slope = max(1.0 - e @ M @ e, 1e-3)
        t = min(norm / slope, max_step)
        for _ in range(60):
            trial = _boost(C, e, t)
            tc, _ = caps_to_sphere(trial)
            tmu = tc.mean(axis=0)
            if np.linalg.norm(tmu) < norm:
                break
            t /= 2
        else:
            raise ConvergenceError("sphere centering stalled", residual=norm)
        # re-derive the Lorentz vectors from (center, radius) to limit round-off drift
        centers, radii = caps_to_sphere(trial)
        C = caps_from_sphere(centers, radii)
        mu = tmu
        norm = np.linalg.norm(mu)
    if norm > tol:
        raise ConvergenceError(f"sphere centering did not converge (|centroid| = {norm:.3e})", residual=norm)
    centers, radii = caps_to_sphere(C)
    return BallSystem(b.d, centers, radii, GEODESIC)


def ballsystem_to_certificate(b: BallSystem, g: Graph, center_tol: float = 1e-6, contact_tol: float = 1e-6) -> BallCertificate:
    """Centers as the embedding, chordal radii ``2 sin(rho/2)`` as ball sizes."""
    if b.kind != GEODESIC:
        raise PreconditionError("ballsystem_to_certificate expects caps on a sphere")
    if g.n != b.n:
        raise PreconditionError("graph and ball system sizes differ")
    mu = b.centers.mean(axis=0)
    if np.linalg.norm(mu) > center_tol:
        raise PreconditionError(f"centroid of centers is off the origin by {np.linalg.norm(mu):.3e}; normalize first")
    gap = _pair_gaps(b)
    e = g.edges
    if e.size:
        worst = gap[e[:, 0], e[:, 1]].max()
        if worst > contact_tol:
            raise PreconditionError(f"graph edge between disjoint caps (gap {worst:.3e})")
    s = np.minimum(2 * np.sin(np.minimum(b.radii, np.pi) / 2), 2.0)
    f = b.centers - mu
    # absorb tangency round-off so every edge constraint holds exactly
    if e.size:
        need = np.linalg.norm(f[e[:, 0]] - f[e[:, 1]], axis=1) - (s[e[:, 0]] + s[e[:, 1]])
        for i in np.flatnonzero(need > 0):
            s[e[i, 0]] += need[i] / 2 + 1e-16
            s[e[i, 1]] += need[i] / 2 + 1e-16
    return BallCertificate(f, s)


# -------------------------------------------------------------- circle packing

@dataclass
class PackingResult:
    balls: BallSystem
    planar_centers: np.ndarray
    planar_radii: np.ndarray
    residual: float
    iterations: int
    outer: tuple


def _corner_angles(F: np.ndarray, r: np.ndarray) -> np.ndarray:
    ra, rb, rc = r[F[:, 0]], r[F[:, 1]], r[F[:, 2]]

    def ang(x, y, z):
        return 2 * np.arcsin(np.sqrt(np.clip(y * z / ((x + y) * (x + z)), 0.0, 1.0)))

    return np.c_[ang(ra, rb, rc), ang(rb, rc, ra), ang(rc, ra, rb)]


def _pack_radii(n: int, F: np.ndarray, interior: np.ndarray, tol: float, max_iter: int):
    deg = np.bincount(F.ravel(), minlength=n)  # interior faces per vertex = degree for interior vertices
    r = np.ones(n)
    two_pi = 2 * np.pi
    k = deg[interior].astype(float)
    delta = np.sin(np.pi / k)
    resid = np.inf
    prev_lr = None
    for it in range(1, max_iter + 1):
        theta = np.bincount(F.ravel(), weights=_corner_angles(F, r).ravel(), minlength=n)
        err = theta[interior] - two_pi
        resid = float(np.abs(err).max())
        if resid < tol:
            return r, resid, it
        beta = np.sin(theta[interior] / (2 * k))
        rhat = beta / (1 - beta) * r[interior]
        lr_new = np.log((1 - delta) / delta * rhat)
        lr_old = np.log(r[interior])
        step = lr_new - lr_old
        # superstep: extrapolate along consistently repeated directions
        if prev_lr is not None:
            cosang = step @ prev_lr / (np.linalg.norm(step) * np.linalg.norm(prev_lr) + 1e-300)
            ratio = np.linalg.norm(step) / (np.linalg.norm(prev_lr) + 1e-300)
            if cosang > 0.99 and ratio < 1:
                step = step * min(1.0 / (1 - ratio), 50.0)
        prev_lr = lr_new - lr_old
        trial = r.copy()
        trial[interior] = np.exp(lr_old + step)
        theta_t = np.bincount(F.ravel(), weights=_corner_angles(F, trial).ravel(), minlength=n)
        if np.abs(theta_t[interior] - two_pi).max() > resid:
            trial[interior] = np.exp(lr_new)
            prev_lr = None
        r = trial
    return r, resid, max_iter


def circle_pack(
    rs: RotationSystem,
    tol: float = 1e-12,
    max_iter: int = 100000,
    outer=None,
    normalize: bool = True,
) -> PackingResult:
    """Tangency packing of a planar triangulation, lifted to the sphere and centered."""
    g = rs.graph
    if g.n < 4:
        raise PreconditionError("circle packing needs n >= 4")
    if not rs.is_triangulation():
        raise PreconditionError("circle packing needs a triangulation (every face a triangle)")
    if euler_genus(rs) != 0:
        raise PreconditionError("circle packing needs a planar (genus 0) rotation system")
    faces = [tuple(f) for f in rs.faces]
    if outer is None:
        outer = min(faces, key=lambda f: tuple(sorted(f)))
    outer = tuple(outer)
    fi = faces.index(outer)
    inner_faces = np.array([f for i, f in enumerate(faces) if i != fi], dtype=np.int64)
    interior = np.setdiff1d(np.arange(g.n), outer)
    r, resid, iters = _pack_radii(g.n, inner_faces, interior, tol, max_iter)
    if resid >= tol:
        raise ConvergenceError(f"circle packing residual {resid:.3e} after {iters} iterations", residual=resid)

    # lay out: seed face counterclockwise, then every face counterclockwise by BFS
    z = np.full((g.n, 2), np.nan)
    placed = np.zeros(g.n, dtype=bool)
    a, b, c = inner_faces[0]
    z[a] = (0.0, 0.0)
    z[b] = (r[a] + r[b], 0.0)
    placed[[a, b]] = True

    def place(a, b, c):
        ab = z[b] - z[a]
        lab = np.linalg.norm(ab)
        lac, lbc = r[a] + r[c], r[b] + r[c]
        cosA = np.clip((lab ** 2 + lac ** 2 - lbc ** 2) / (2 * lab * lac), -1, 1)
        A = np.arccos(cosA)
        e = ab / lab
        rot = np.array([e[0] * np.cos(A) - e[1] * np.sin(A), e[0] * np.sin(A) + e[1] * np.cos(A)])
        z[c] = z[a] + lac * rot
        placed[c] = True

    place(a, b, c)
    remaining = [tuple(f) for f in inner_faces[1:]]
    progress = True
    while remaining and progress:
        progress = False
        nxt = []
        for f in remaining:
            p = placed[list(f)]
            if p.all():
                continue
            if p.sum() == 2:
                i = int(np.flatnonzero(~p)[0])
                x, y, w = f[(i + 1) % 3], f[(i + 2) % 3], f[i]
                place(x, y, w)
                progress = True
            else:
                nxt.append(f)
        remaining = nxt
    if not placed.all():
        raise ConvergenceError("layout did not reach every vertex")
    C = caps_from_plane(z, r)
    centers, radii = caps_to_sphere(C)
    balls = BallSystem(2, centers, radii, GEODESIC)
    if normalize:
        balls = sphere_normalize(balls, check_precondition=False)
    return PackingResult(balls, z, r, resid, iters, outer)


def packing_gaps(b: BallSystem, g: Graph) -> tuple[float, float]:
    """``(max |gap| over edges, min gap over non-edges)`` for a tangency packing."""
    gap = _pair_gaps(b)
    A = g.adjacency_matrix(sparse=False).astype(bool)
    iu, ju = np.triu_indices(b.n, 1)
    on = A[iu, ju]
    return float(np.abs(gap[iu, ju][on]).max(initial=0.0)), float(gap[iu, ju][~on].min(initial=np.inf))


# --------------------------------------------------------- k-ply generators

def random_packing_layer(n: int, rng: np.random.Generator, d: int = 2) -> BallSystem:
    """Random points in the unit cube, radii = half the nearest-neighbor distance (ply 1)."""
    pts = rng.random((n, d))
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=2)
    np.fill_diagonal(d2, np.inf)
    return BallSystem(d, pts, 0.5 * np.sqrt(d2.min(axis=1)), EUCLIDEAN)


def random_kply_system(n: int, k: int, seed: int = 0, d: int = 2) -> BallSystem:
    """Union of ``k`` independent ply-1 layers (so ply at most ``k``)."""
    rng = np.random.default_rng(seed)
    sizes = [n // k + (1 if i < n % k else 0) for i in range(k)]
    layers = [random_packing_layer(s, rng, d) for s in sizes]
    return BallSystem(d, np.vstack([l.centers for l in layers]), np.concatenate([l.radii for l in layers]), EUCLIDEAN)
