"""Semi-regular bilayer graphs and their polarity-weighted adjacency matrices.

Vertices are 0-based: ``0 .. n_L1-1`` form layer 1 and ``n_L1 .. N-1`` form
layer 2. Each vertex of a layer has the same number ``n1`` of same-layer
neighbours and ``n2`` cross-layer neighbours.
"""
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import InvalidGraph, NotConnected, ProfileInfeasible
from .numerics import eig_symmetric

ROW_SUM_TOL = 1e-12


class DegreeProfile(NamedTuple):
    n1_L1: int
    n2_L1: int
    n1_L2: int
    n2_L2: int

    def layer(self, k: int):
        """(n1, n2) of layer ``k`` (1 or 2)."""
        return (self.n1_L1, self.n2_L1) if k == 1 else (self.n1_L2, self.n2_L2)


PRESETS = {
    "contact": (2, 2),
    "diffusion": (2, 4),
}


def default_offsets(n2: int) -> list:
    """Cross-layer offsets 0, +1, -1, +2, -2, ... truncated to ``n2``."""
    out = [0]
    d = 1
    while len(out) < n2:
        out.append(d)
        if len(out) < n2:
            out.append(-d)
        d += 1
    return out[:n2]


@dataclass(frozen=True, eq=False)
class BilayerGraph:
    layer1_size: int
    layer2_size: int
    edges: tuple  # sorted (u, v) pairs with u < v
    strict: bool = True
    label: str = ""
    # ring construction metadata, None when built from an arbitrary edge list
    ring: Optional[dict] = field(default=None, compare=False)

    def __post_init__(self):
        n = self.n_vertices
        e = np.asarray(self.edges, dtype=int).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise InvalidGraph("edge endpoint out of range")
        if np.any(e[:, 0] == e[:, 1]):
            raise InvalidGraph("self-loop")
        canon = {(min(u, v), max(u, v)) for u, v in e.tolist()}
        if len(canon) != len(e):
            raise InvalidGraph("duplicate edge")
        object.__setattr__(self, "edges", tuple(sorted(canon)))
        if self.strict:
            rep = analyze_structure(self)
            if not rep.semi_regular:
                raise InvalidGraph("graph is not semi-regular per layer")
            if not rep.connected:
                raise NotConnected("graph is not connected")

    @property
    def n_vertices(self) -> int:
        return self.layer1_size + self.layer2_size

    def layer_of(self, v: int) -> int:
        return 1 if v < self.layer1_size else 2

    @cached_property
    def layer_labels(self) -> np.ndarray:
        lab = np.full(self.n_vertices, 2)
        lab[:self.layer1_size] = 1
        return lab

    @cached_property
    def adjacency(self) -> np.ndarray:
        """0/1 symmetric adjacency."""
        a = np.zeros((self.n_vertices, self.n_vertices))
        if self.edges:
            e = np.asarray(self.edges)
            a[e[:, 0], e[:, 1]] = 1.0
            a[e[:, 1], e[:, 0]] = 1.0
        return a

    @cached_property
    def _counts(self):
        """Per-vertex (same-layer, cross-layer) neighbour counts."""
        a = self.adjacency
        same = self.layer_labels[:, None] == self.layer_labels[None, :]
        return (a * same).sum(1).astype(int), (a * ~same).sum(1).astype(int)

    @property
    def degree_profile(self) -> Optional[DegreeProfile]:
        same, cross = self._counts
        k1, k2 = self.layer1_size, self.layer2_size
        vals = []
        for sl in (slice(0, k1), slice(k1, k1 + k2)):
            s, c = same[sl], cross[sl]
            if s.size == 0 or np.any(s != s[0]) or np.any(c != c[0]):
                return None
            vals += [int(s[0]), int(c[0])]
        return DegreeProfile(*vals)

    def edges_csv(self) -> str:
        lines = ["u,v"] + [f"{u},{v}" for u, v in self.edges]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class StructureReport:
    connected: bool
    bipartite: bool
    bipartition: Optional[tuple]
    degree_profile: Optional[DegreeProfile]
    semi_regular: bool

    def as_dict(self):
        return {
            "connected": self.connected,
            "bipartite": self.bipartite,
            "bipartition": [list(map(int, s)) for s in self.bipartition] if self.bipartition else None,
            "degree_profile": list(self.degree_profile) if self.degree_profile else None,
            "semi_regular": self.semi_regular,
        }


def _neighbours(g: BilayerGraph):
    nb = [[] for _ in range(g.n_vertices)]
    for u, v in g.edges:
        nb[u].append(v)
        nb[v].append(u)
    return nb


def analyze_structure(g: BilayerGraph) -> StructureReport:
    """Connectivity, BFS 2-colouring and per-layer degree regularity."""
    n = g.n_vertices
    nb = _neighbours(g)
    colour = [-1] * n
    bipartite = True
    components = 0
    for s in range(n):
        if colour[s] >= 0:
            continue
        components += 1
        colour[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in nb[u]:
                if colour[v] < 0:
                    colour[v] = 1 - colour[u]
                    queue.append(v)
                elif colour[v] == colour[u]:
                    bipartite = False
    part = None
    if bipartite:
        part = (tuple(i for i in range(n) if colour[i] == 0),
                tuple(i for i in range(n) if colour[i] == 1))
    prof = g.degree_profile
    # a missing layer is allowed in non-strict graphs (degenerate single-layer case)
    semi = prof is not None
    return StructureReport(components <= 1, bipartite, part, prof, semi)


def build_semi_regular_ring(layer_size: int, profile, cross_offsets: Optional[Sequence[int]] = None,
                            label: str = "") -> BilayerGraph:
    """Two rings of ``layer_size`` vertices joined by shifted cross edges.

    ``profile`` is either ``(n1, n2)`` (both layers alike) or a full
    ``DegreeProfile``. Each vertex links to its ``n1/2`` nearest ring
    neighbours on each side; vertex ``i`` of layer 1 links to vertices
    ``i + o (mod layer_size)`` of layer 2 for each cross offset ``o``.
    """
    if len(profile) == 2:
        profile = DegreeProfile(profile[0], profile[1], profile[0], profile[1])
    prof = DegreeProfile(*map(int, profile))
    m = int(layer_size)
    if m < 3:
        raise ProfileInfeasible("layer_size must be at least 3")
    if prof.n2_L1 != prof.n2_L2:
        raise ProfileInfeasible("equal layer sizes force n2_L1 == n2_L2")
    for n1 in (prof.n1_L1, prof.n1_L2):
        if n1 % 2 or n1 < 0:
            raise ProfileInfeasible(f"n1={n1} must be even and non-negative")
        if n1 > m - 1:
            raise ProfileInfeasible(f"n1={n1} exceeds layer capacity {m - 1}")
    n2 = prof.n2_L1
    if n2 < 1 or n2 > m:
        raise ProfileInfeasible(f"n2={n2} must lie in [1, {m}]")
    offs = list(default_offsets(n2) if cross_offsets is None else cross_offsets)
    if len(offs) != n2 or len({o % m for o in offs}) != n2:
        raise ProfileInfeasible("cross offsets must be n2 distinct residues")

    edges = set()
    for base, n1 in ((0, prof.n1_L1), (m, prof.n1_L2)):
        for i in range(m):
            for d in range(1, n1 // 2 + 1):
                j = (i + d) % m
                edges.add((min(base + i, base + j), max(base + i, base + j)))
    for i in range(m):
        for o in offs:
            edges.add((i, m + (i + o) % m))
    try:
        g = BilayerGraph(m, m, tuple(edges), strict=True, label=label,
                         ring={"layer_size": m, "n1": (prof.n1_L1, prof.n1_L2), "cross_offsets": tuple(offs)})
    except InvalidGraph as exc:
        raise ProfileInfeasible(str(exc)) from exc
    if g.degree_profile != prof:
        raise ProfileInfeasible(f"built profile {g.degree_profile} differs from requested {prof}")
    return g


def build_bipartite_2d(layer_size: int, label: str = "bipartite2d") -> BilayerGraph:
    """Bipartite bilayer whose biadjacency is cyclic tridiagonal.

    The graph is assembled from the biadjacency pattern: diagonal entries are
    straight cross edges, the cyclic off-diagonals are same-layer ring edges.
    The colour classes interleave the layers, V1 = (L1_0, L2_1, L1_2, ...) and
    V2 = (L2_0, L1_1, L2_2, ...). The result is the ring with one straight
    rung per vertex, i.e. profile (2, 1, 2, 1).
    """
    m = int(layer_size)
    if m < 4 or m % 2:
        raise ProfileInfeasible("bipartite2d needs an even layer size of at least 4")
    v1 = [i if i % 2 == 0 else m + i for i in range(m)]
    v2 = [m + i if i % 2 == 0 else i for i in range(m)]
    edges = set()
    for a in range(m):
        for b in (a, (a + 1) % m, (a - 1) % m):
            u, v = v1[a], v2[b]
            edges.add((min(u, v), max(u, v)))
    return BilayerGraph(m, m, tuple(edges), strict=True, label=label,
                        ring={"layer_size": m, "n1": (2, 2), "cross_offsets": (0,)})


def biadjacency(w: np.ndarray, layer_size: int) -> np.ndarray:
    """Biadjacency block of a bipartite2d weighted adjacency in the V1/V2 order."""
    m = layer_size
    v1 = [i if i % 2 == 0 else m + i for i in range(m)]
    v2 = [m + i if i % 2 == 0 else i for i in range(m)]
    return np.asarray(w)[np.ix_(v1, v2)]


@dataclass(frozen=True)
class PolarityWeights:
    w1: float
    w2: float

    def __post_init__(self):
        if not (np.isfinite(self.w1) and np.isfinite(self.w2)):
            raise ValueError("polarity weights must be finite")
        if self.w1 <= 0 or self.w2 <= 0:
            raise ValueError(f"polarity weights must be positive, got ({self.w1}, {self.w2})")


@dataclass(frozen=True, eq=False)
class WeightedAdjacency:
    matrix: np.ndarray
    graph: BilayerGraph
    weights: PolarityWeights
    row_norm: np.ndarray  # per-row normaliser n1*w1 + n2*w2

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def symmetrized(self) -> np.ndarray:
        """D^{1/2} W D^{-1/2}: symmetric and similar to W."""
        d = np.sqrt(self.row_norm)
        return self.matrix * d[:, None] / d[None, :]

    @cached_property
    def spectrum(self) -> np.ndarray:
        """Ascending real spectrum via the symmetric similarity transform."""
        return eig_symmetric(self.symmetrized()).values

    def block_values(self):
        """(hat w1, hat w2) per layer."""
        out = {}
        for k in (1, 2):
            n1, n2 = self.graph.degree_profile.layer(k)
            den = n1 * self.weights.w1 + n2 * self.weights.w2
            out[k] = (self.weights.w1 / den, self.weights.w2 / den)
        return out


def weighted_adjacency(g: BilayerGraph, w: PolarityWeights) -> WeightedAdjacency:
    """Row-stochastic polarity-weighted adjacency.

    Same-layer edges carry ``w1 / (n1 w1 + n2 w2)``, cross-layer edges carry
    ``w2 / (n1 w1 + n2 w2)``, with ``(n1, n2)`` of the row vertex's layer.
    When the two layers have different normalisers the matrix is not
    symmetric but stays similar to a symmetric one (see ``symmetrized``).
    """
    if not isinstance(w, PolarityWeights):
        w = PolarityWeights(*w)
    prof = g.degree_profile
    if prof is None:
        raise InvalidGraph("weighted adjacency requires a semi-regular graph")
    lab = g.layer_labels
    raw = g.adjacency * np.where(lab[:, None] == lab[None, :], w.w1, w.w2)
    norm = np.array([prof.n1_L1 * w.w1 + prof.n2_L1 * w.w2,
                     prof.n1_L2 * w.w1 + prof.n2_L2 * w.w2])[lab - 1]
    mat = raw / norm[:, None]
    rs = mat.sum(1)
    if np.max(np.abs(rs - 1.0)) > ROW_SUM_TOL:
        raise InvalidGraph("weighted adjacency is not row-stochastic")
    return WeightedAdjacency(mat, g, w, norm)


def graph_from_spec(spec: dict) -> BilayerGraph:
    """Build a graph from the JSON graph spec (already schema-checked)."""
    preset = spec.get("preset")
    l1 = spec.get("layer1_size", 30)
    l2 = spec.get("layer2_size", l1)
    if l1 != l2:
        raise ProfileInfeasible("ring-built presets need equal layer sizes")
    offs = spec.get("cross_offsets")
    if preset == "bipartite2d":
        return build_bipartite_2d(l1)
    if preset is not None:
        n1, n2 = PRESETS[preset]
        prof = DegreeProfile(n1, n2, n1, n2)
    else:
        p = spec["profile"]
        prof = DegreeProfile(p["n1_L1"], p["n2_L1"], p["n1_L2"], p["n2_L2"])
    if "profile" in spec and preset is not None:
        p = spec["profile"]
        given = DegreeProfile(p["n1_L1"], p["n2_L1"], p["n1_L2"], p["n2_L2"])
        if given != prof:
            raise ProfileInfeasible(f"profile {tuple(given)} conflicts with preset {preset}")
    return build_semi_regular_ring(l1, prof, cross_offsets=offs, label=preset or "")


def is_reachable_all(m: np.ndarray) -> bool:
    """Strong connectivity of the nonzero pattern (forward + backward BFS)."""
    pattern = np.asarray(m) != 0
    n = pattern.shape[0]

    def reach(adj):
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        frontier = seen.copy()
        while frontier.any():
            nxt = adj[frontier].any(0) & ~seen
            seen |= nxt
            frontier = nxt
        return seen.all()

    return bool(n == 0 or (reach(pattern) and reach(pattern.T)))
