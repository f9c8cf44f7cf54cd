"""Brute-force ground truth for tiny graphs.

Everything here is exponential or grid-based and exists only to check the
fast algorithms elsewhere in the package on desk-sized instances.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError
from .graph import Graph, Separator, expansion_of, laplacian

PSI_CAP = 24
SEPARATOR_CAP = 20
DENSE_CAP = 2000
ORBIT_CAP = 12


def _popcount(a: np.ndarray) -> np.ndarray:
    if hasattr(np, "bitwise_count"):
        return np.bitwise_count(a).astype(np.int64)
    b = a.astype(np.uint32).view(np.uint8).reshape(*a.shape, 4)
    table = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)
    return table[b].sum(axis=-1)


def _subset_tables(g: Graph):
    """For every bitmask S: |S|, the neighbor mask N(S), and |E[S]|, built by doubling."""
    n = g.n
    nbr = np.array([sum(1 << u for u in g.adjacency[v]) for v in range(n)], dtype=np.uint32)
    size = np.zeros(1, dtype=np.int64)
    nmask = np.zeros(1, dtype=np.uint32)
    inner = np.zeros(1, dtype=np.int64)
    for k in range(n):
        low = np.arange(1 << k, dtype=np.uint32)
        size = np.concatenate([size, size + 1])
        inner = np.concatenate([inner, inner + _popcount(low & nbr[k])])
        nmask = np.concatenate([nmask, nmask | nbr[k]])
    return size, nmask, inner


def _mask_to_tuple(mask: int) -> tuple[int, ...]:
    return tuple(i for i in range(mask.bit_length()) if mask >> i & 1)


def _best(values: np.ndarray, size: np.ndarray, num: np.ndarray):
    ok = (size >= 1) & (size <= values)
    ratio = np.where(ok, num / np.maximum(size, 1), np.inf)
    best = ratio.min()
    hits = np.flatnonzero(ratio <= best + 1e-12)
    witness = min(_mask_to_tuple(int(h)) for h in hits)
    return float(best), witness


def brute_psi(g: Graph, cap: int = PSI_CAP) -> tuple[float, tuple[int, ...]]:
    """Exact vertex expansion with the lexicographically least minimizing set."""
    if g.n > cap:
        raise PreconditionError(f"brute_psi is capped at n={cap} (got {g.n})")
    if g.n < 2:
        raise PreconditionError("vertex expansion needs n >= 2")
    size, nmask, _ = _subset_tables(g)
    masks = np.arange(1 << g.n, dtype=np.uint32)
    boundary = _popcount(nmask & ~masks)
    return _best(np.full_like(size, g.n // 2), size, boundary)


def brute_phi(g: Graph, cap: int = PSI_CAP) -> tuple[float, tuple[int, ...]]:
    """Exact edge expansion with the lexicographically least minimizing set."""
    if g.n > cap:
        raise PreconditionError(f"brute_phi is capped at n={cap} (got {g.n})")
    if g.n < 2:
        raise PreconditionError("edge expansion needs n >= 2")
    size, _, inner = _subset_tables(g)
    deg = g.degrees
    degsum = np.zeros(1, dtype=np.int64)
    for k in range(g.n):
        degsum = np.concatenate([degsum, degsum + deg[k]])
    return _best(np.full_like(size, g.n // 2), size, degsum - 2 * inner)


def dense_lambda2(g: Graph, cap: int = DENSE_CAP) -> float:
    """Fiedler value of ``D - A`` by full symmetric eigendecomposition."""
    if g.n > cap:
        raise PreconditionError(f"dense_lambda2 is capped at n={cap} (got {g.n})")
    if g.n < 2:
        return 0.0
    return float(np.linalg.eigvalsh(laplacian(g))[1])


# ------------------------------------------------------------ symmetry search

def automorphisms(g: Graph, limit: int = 5000):
    """Enumerate up to ``limit`` automorphisms by degree-refined backtracking."""
    n = g.n
    deg = g.degrees
    adj = [set(a) for a in g.adjacency]
    out = []
    perm = [-1] * n
    used = [False] * n

    def extend(v):
        if len(out) >= limit:
            return
        if v == n:
            out.append(tuple(perm))
            return
        for w in range(n):
            if used[w] or deg[w] != deg[v]:
                continue
            if any((perm[u] in adj[w]) != (u in adj[v]) for u in range(v)):
                continue
            perm[v], used[w] = w, True
            extend(v + 1)
            perm[v], used[w] = -1, False

    extend(0)
    return out


def edge_orbits(g: Graph, limit: int = 5000) -> list[list[int]]:
    """Edge-index orbits under the (possibly partially enumerated) automorphism group."""
    m = g.m
    parent = list(range(m))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for p in automorphisms(g, limit):
        for i, (u, v) in enumerate(g.edges):
            j = g.edge_id(p[u], p[v])
            a, b = find(i), find(j)
            if a != b:
                parent[a] = b
    groups: dict[int, list[int]] = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values())


def _orbit_lambda2(g: Graph, orbits, weights) -> float:
    lap = np.zeros((g.n, g.n))
    for orb, w in zip(orbits, weights):
        for i in orb:
            u, v = g.edges[i]
            lap[u, v] -= w
            lap[v, u] -= w
            lap[u, u] += w
            lap[v, v] += w
    return float(np.linalg.eigvalsh(lap)[1])


def oracle_lambda2_star(g: Graph, grid: int = 41, orbits=None, zoom_rounds: int = 30) -> float:
    """Grid-and-zoom search for the maximum reweighted spectral gap.

    Reweightings are restricted to be constant on edge orbits, which loses
    nothing: the objective is concave and invariant under automorphisms, so
    averaging any optimum over the group gives an orbit-constant optimum.
    The returned value is achieved by a feasible reweighting, hence a lower
    bound; on orbit-reduced instances it converges to the optimum.
    """
    if g.n < 2 or not g.is_connected():
        return 0.0
    orbits = edge_orbits(g) if orbits is None else [list(o) for o in orbits]
    k = len(orbits)
    if k > ORBIT_CAP:
        raise PreconditionError(f"{k} free weights after symmetry reduction exceed the cap {ORBIT_CAP}")
    # count[v, o] = number of orbit-o edges at v; feasibility is count @ w <= 1
    count = np.zeros((g.n, k))
    for o, orb in enumerate(orbits):
        for i in orb:
            u, v = g.edges[i]
            count[u, o] += 1
            count[v, o] += 1
    upper = 1.0 / count.max(axis=0)

    def feasible(w):
        return np.all(w >= -1e-15) and np.all(count @ w <= 1 + 1e-12)

    def value(w):
        return _orbit_lambda2(g, orbits, w) if feasible(w) else -np.inf

    best_w = np.zeros(k)
    best = 0.0
    if k <= 3:
        lo, hi = np.zeros(k), upper.copy()
        pts = max(5, int(round(grid ** (1.0 / max(k, 1)) * (3 if k == 1 else 1)))) if k > 1 else grid
        for _ in range(zoom_rounds):
            axes = [np.linspace(lo[i], hi[i], pts) for i in range(k)]
            for w in itertools.product(*axes):
                w = np.array(w)
                val = value(w)
                if val > best:
                    best, best_w = val, w
            half = (hi - lo) / 4
            lo = np.maximum(best_w - half, 0.0)
            hi = np.minimum(best_w + half, upper)
    else:
        # pattern search from the max-degree weighting
        w = np.full(k, 1.0 / g.max_degree)
        best, best_w = value(w), w
        step = 0.25 * upper.min()
        while step > 1e-9:
            improved = False
            for i in range(k):
                for sgn in (1.0, -1.0):
                    cand = best_w.copy()
                    cand[i] += sgn * step
                    val = value(cand)
                    if val > best + 1e-15:
                        best, best_w, improved = val, cand, True
            if not improved:
                step /= 2
    return float(best)


# -------------------------------------------------------------- separators

def _components_mask(adj_masks, alive: int) -> list[int]:
    comps = []
    while alive:
        low = alive & -alive
        comp = low
        frontier = low
        while frontier:
            b = frontier & -frontier
            frontier ^= b
            new = adj_masks[b.bit_length() - 1] & alive & ~comp
            comp |= new
            frontier |= new
        comps.append(comp)
        alive &= ~comp
    return comps


def pack_two_bins(sizes, cap: int):
    """Split ``sizes`` into two bins of capacity ``cap`` (exact subset-sum); returns
    the index set of bin A or ``None``."""
    total = sum(sizes)
    reach = {0: ()}
    for i, s in enumerate(sizes):
        nxt = dict(reach)
        for t, idx in reach.items():
            if t + s <= cap and t + s not in nxt:
                nxt[t + s] = idx + (i,)
        reach = nxt
    for t in sorted(reach, reverse=True):
        if total - t <= cap:
            return reach[t]
    return None


def brute_separator(g: Graph, alpha: float = 2 / 3, cap: int = SEPARATOR_CAP) -> Separator:
    """Minimum alpha-vertex-separator, lexicographically least among minimum ones."""
    if g.n > cap:
        raise PreconditionError(f"brute_separator is capped at n={cap} (got {g.n})")
    n = g.n
    bin_cap = int(np.floor(alpha * n + 1e-12))
    adj_masks = [sum(1 << u for u in g.adjacency[v]) for v in range(n)]
    full = (1 << n) - 1
    for k in range(n + 1):
        for S in itertools.combinations(range(n), k):
            smask = sum(1 << v for v in S)
            comps = _components_mask(adj_masks, full & ~smask)
            sizes = [c.bit_count() if hasattr(int, "bit_count") else bin(c).count("1") for c in comps]
            pick = pack_two_bins(sizes, bin_cap)
            if pick is None:
                continue
            amask = 0
            for i in pick:
                amask |= comps[i]
            bmask = full & ~smask & ~amask
            return Separator(S, _mask_to_tuple(amask), _mask_to_tuple(bmask), alpha)
    raise AssertionError("unreachable: S = V always separates")


@dataclass
class OracleReport:
    psi_star: float
    psi_witness: tuple[int, ...]
    phi_star: float
    phi_witness: tuple[int, ...]
    lambda2: float
    lambda2_star: float | None = None
    notes: list[str] = field(default_factory=list)

    def check(self, g: Graph) -> bool:
        psi, _ = expansion_of(g, self.psi_witness)
        _, phi = expansion_of(g, self.phi_witness)
        return abs(psi - self.psi_star) < 1e-12 and abs(phi - self.phi_star) < 1e-12

    def to_dict(self) -> dict:
        return {
            "psi_star": self.psi_star,
            "psi_witness": list(self.psi_witness),
            "phi_star": self.phi_star,
            "phi_witness": list(self.phi_witness),
            "lambda2": self.lambda2,
            "lambda2_star": self.lambda2_star,
            "notes": self.notes,
        }


def oracle_report(g: Graph, with_lambda2_star: bool = True) -> OracleReport:
    psi, pw = brute_psi(g)
    phi, fw = brute_phi(g)
    notes = ["psi/phi by exhaustive subset enumeration", "lambda2 by dense eigendecomposition"]
    l2s = None
    if with_lambda2_star:
        try:
            l2s = oracle_lambda2_star(g)
            notes.append("lambda2_star by orbit-reduced grid search (lower bound)")
        except PreconditionError as exc:
            notes.append(f"lambda2_star skipped: {exc}")
    return OracleReport(psi, pw, phi, fw, dense_lambda2(g), l2s, notes)
