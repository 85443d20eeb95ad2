"""Coarse geometry of finite graphs: hyperbolicity, bottlenecks, quasi-convexity.

Everything here works on a :class:`FiniteGraph` (vertices ``0..n-1`` with
optional labels).  Distances come from breadth-first search through
``scipy.sparse.csgraph``.
"""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components, minimum_spanning_tree, shortest_path

from .cayley import DomainError, LabeledBall

FULL_MATRIX_LIMIT = 4000


@dataclass
class FiniteGraph:
    """Undirected simple graph on ``0..n-1``."""

    adjacency: list[list[int]]
    labels: list[str] = field(default_factory=list)
    _csr: csr_matrix | None = field(default=None, repr=False)
    _rows: dict = field(default_factory=dict, repr=False)
    _full: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        adj = [set(a) for a in self.adjacency]
        for i, a in enumerate(self.adjacency):
            for j in a:
                adj[j].add(i)  # kernels below treat the matrix as directed
        self.adjacency = [sorted(a - {i}) for i, a in enumerate(adj)]
        if not self.labels:
            self.labels = [str(i) for i in range(len(self.adjacency))]

    # -- constructors -------------------------------------------------------
    @classmethod
    def from_edges(cls, edges: Iterable[tuple[Hashable, Hashable]], vertices: Iterable[Hashable] = ()) -> "FiniteGraph":
        index: dict = {}
        for v in vertices:
            index.setdefault(v, len(index))
        pairs = []
        for u, v in edges:
            i = index.setdefault(u, len(index))
            j = index.setdefault(v, len(index))
            if i != j:
                pairs.append((i, j))
        adj: list[list[int]] = [[] for _ in index]
        for i, j in pairs:
            adj[i].append(j)
            adj[j].append(i)
        return cls(adj, [str(v) for v in index])

    @classmethod
    def from_ball(cls, ball: LabeledBall) -> "FiniteGraph":
        adj = [[j for j, _ in nbrs if j != i] for i, nbrs in enumerate(ball.adjacency)]
        return cls(adj, [ball.group.format(g) for g in ball.elements])

    @classmethod
    def on_elements(cls, group, elements: Sequence, letters: Sequence) -> "FiniteGraph":
        """Subgraph of the Cayley graph over ``letters`` induced on ``elements``."""
        index = {g: i for i, g in enumerate(elements)}
        adj: list[list[int]] = [[] for _ in elements]
        for i, g in enumerate(elements):
            for x in letters:
                j = index.get(group.multiply(g, x.element))
                if j is not None and j != i:
                    adj[i].append(j)
        return cls(adj, [group.format(g) for g in elements])

    @classmethod
    def from_edge_list(cls, text: str) -> "FiniteGraph":
        """Whitespace-separated ``u v`` pairs, one per line; ``#`` comments and
        single-token lines (isolated vertices) allowed."""
        verts, edges = [], []
        for line in text.splitlines():
            line = line.split("#", 1)[0].split()
            if len(line) == 1:
                verts.append(line[0])
            elif len(line) >= 2:
                edges.append((line[0], line[1]))
        return cls.from_edges(edges, verts)

    @classmethod
    def from_dot(cls, text: str) -> "FiniteGraph":
        """Node and edge statements of an undirected DOT graph (attributes ignored)."""
        body = text[text.index("{") + 1: text.rindex("}")]
        body = re.sub(r"\[[^\]]*\]", "", body)
        tok = r'("(?:[^"\\]|\\.)*"|[\w.]+)'
        verts, edges = [], []
        for stmt in re.split(r"[;\n]", body):
            stmt = stmt.strip()
            if not stmt or re.match(r"^(graph|node|edge)\b", stmt) or "=" in stmt and "--" not in stmt:
                continue
            names = [n.strip('"') for n in re.findall(tok, stmt)]
            if "--" in stmt:
                edges.extend(zip(names, names[1:]))
            elif names:
                verts.append(names[0])
        return cls.from_edges(edges, verts)

    # -- basic structure ------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.adjacency)

    @property
    def n_edges(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, a in enumerate(self.adjacency) for j in a if i < j]

    def csr(self) -> csr_matrix:
        if self._csr is None:
            rows = [i for i, a in enumerate(self.adjacency) for _ in a]
            cols = [j for a in self.adjacency for j in a]
            self._csr = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(self.n, self.n))
        return self._csr

    def connected(self) -> bool:
        return self.n <= 1 or connected_components(self.csr(), directed=False)[0] == 1

    def require_connected(self) -> None:
        if not self.connected():
            raise DomainError("graph is disconnected")

    def with_edges(self, extra: Iterable[tuple[int, int]]) -> "FiniteGraph":
        adj = [list(a) for a in self.adjacency]
        for i, j in extra:
            if i != j:
                adj[i].append(j)
                adj[j].append(i)
        return FiniteGraph(adj, list(self.labels))

    # -- distances ------------------------------------------------------------
    def dist_from(self, source: int) -> np.ndarray:
        if self._full is not None:
            return self._full[source]
        row = self._rows.get(source)
        if row is None:
            d = shortest_path(self.csr(), unweighted=True, directed=True, indices=source)
            row = np.where(np.isinf(d), -1, d).astype(np.int32)
            if len(self._rows) > 4096:
                self._rows = {k: v for k, v in self._rows.items() if isinstance(k, str)}
            self._rows[source] = row
        return row

    def distance_matrix(self) -> np.ndarray:
        if self._full is None:
            if self.n > FULL_MATRIX_LIMIT:
                raise DomainError(f"refusing an all-pairs matrix on {self.n} vertices")
            d = shortest_path(self.csr(), unweighted=True, directed=True)
            self._full = np.where(np.isinf(d), -1, d).astype(np.int32)
        return self._full

    def d(self, u: int, v: int) -> int:
        return int(self.dist_from(u)[v])

    def dist_to_set(self, sources: Iterable[int], removed: np.ndarray | None = None) -> np.ndarray:
        """Multi-source BFS distances (-1 when unreachable)."""
        out = np.full(self.n, -1, dtype=np.int32)
        frontier = [s for s in set(sources) if removed is None or not removed[s]]
        for s in frontier:
            out[s] = 0
        level = 0
        while frontier:
            level += 1
            nxt = []
            for u in frontier:
                for v in self.adjacency[u]:
                    if out[v] < 0 and (removed is None or not removed[v]):
                        out[v] = level
                        nxt.append(v)
            frontier = nxt
        return out

    def geodesic(self, u: int, v: int) -> list[int]:
        """The geodesic obtained by walking back from ``v`` through the
        smallest-index neighbour one step closer to ``u``."""
        du = self.dist_from(u)
        if du[v] < 0:
            raise DomainError("vertices are in different components")
        path = [v]
        while path[-1] != u:
            w = path[-1]
            path.append(next(y for y in self.adjacency[w] if du[y] == du[w] - 1))
        return path[::-1]

    def geodesic_vertices(self, u: int, v: int) -> np.ndarray:
        """Boolean mask of vertices lying on some geodesic from ``u`` to ``v``."""
        du, dv = self.dist_from(u), self.dist_from(v)
        return (du >= 0) & (dv >= 0) & (du + dv == du[v])

    def is_path(self, p: Sequence[int]) -> bool:
        return all(b in self.adjacency[a] for a, b in zip(p, p[1:]))

    def is_geodesic(self, p: Sequence[int]) -> bool:
        return len(p) > 0 and self.is_path(p) and self.d(p[0], p[-1]) == len(p) - 1

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from((i, {"label": s}) for i, s in enumerate(self.labels))
        g.add_edges_from(self.edges())
        return g


# -- hyperbolicity -----------------------------------------------------------------

def _delta_based(D: np.ndarray, w: int) -> float:
    """``max_{x,y,z} min((x|z)_w, (z|y)_w) - (x|y)_w`` for base point ``w``."""
    G = (D[w][:, None] + D[w][None, :] - D) / 2.0
    best = 0.0
    for z in range(D.shape[0]):
        m = np.minimum.outer(G[:, z], G[z, :]) - G
        best = max(best, float(m.max()))
    return best


def delta_hyperbolicity(
    graph: FiniteGraph,
    exact: bool = False,
    base: int = 0,
    sample: int | None = None,
    seed: int = 0,
) -> float:
    """Four-point ``δ`` (Gromov products based at ``base``).

    ``exact=True`` takes the maximum over all base points (intended for at most
    200 vertices).  ``sample`` restricts the quadruples to a random vertex
    subset, which gives a lower bound on large graphs.
    """
    graph.require_connected()
    if graph.n <= 1:
        return 0.0
    if sample is not None and sample < graph.n:
        rng = random.Random(seed)
        pts = sorted(rng.sample(range(graph.n), sample))
        if base not in pts:
            pts[0] = base
        D = np.array([graph.dist_from(u)[pts] for u in pts], dtype=np.float64)
        base = pts.index(base)
    else:
        D = graph.distance_matrix().astype(np.float64)
    if exact:
        return max(_delta_based(D, w) for w in range(D.shape[0]))
    return _delta_based(D, base)


# -- bottlenecks ------------------------------------------------------------------

def cut_test(graph: FiniteGraph, x: int, y: int, z: int, mu: int) -> bool:
    """True when every path from ``x`` to ``y`` meets the closed ball ``B(z, mu-1)``."""
    dz = graph.dist_from(z)
    removed = (dz >= 0) & (dz <= mu - 1)
    if removed[x] or removed[y]:
        return True
    order = breadth_first_order(_masked(graph, removed), x, directed=True, return_predecessors=False)
    return not bool((order == y).any())


def _masked(graph: FiniteGraph, removed: np.ndarray) -> csr_matrix:
    """The adjacency matrix with every edge touching a removed vertex dropped."""
    A = graph.csr()
    rows = graph._rows.get("csr-rows")
    if rows is None:
        rows = graph._rows["csr-rows"] = np.repeat(np.arange(graph.n), np.diff(A.indptr))
    keep = ~(removed[rows] | removed[A.indices])
    indptr = np.concatenate(([0], np.cumsum(np.bincount(rows[keep], minlength=graph.n))))
    return csr_matrix((A.data[keep], A.indices[keep], indptr), shape=A.shape)


def point_bottleneck(graph: FiniteGraph, x: int, y: int, z: int) -> int:
    """Least ``μ >= 1`` passing the cut test at ``z`` (binary search)."""
    dz = graph.dist_from(z)
    lo, hi = 1, int(max(dz[x], dz[y])) + 1  # hi always passes: x lies in the ball
    while lo < hi:
        mid = (lo + hi) // 2
        if cut_test(graph, x, y, z, mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


@dataclass
class BottleneckCertificate:
    mu: int
    sample: list[tuple[int, int, list[int], list[int]]]  # (x, y, geodesic, per-vertex μ)
    witness: tuple[int, int, int] | None = None

    def to_dict(self) -> dict:
        return {"mu": self.mu, "pairs": len(self.sample), "witness": list(self.witness) if self.witness else None}


def sample_pairs(graph: FiniteGraph, n_pairs: int | None = None, seed: int = 0) -> list[tuple[int, int]]:
    """All pairs when ``n_pairs`` is None, otherwise a seeded random sample."""
    if n_pairs is None:
        return list(itertools.combinations(range(graph.n), 2))
    rng = random.Random(seed)
    out = []
    for _ in range(n_pairs):
        x, y = rng.randrange(graph.n), rng.randrange(graph.n)
        if x != y:
            out.append((x, y))
    return out


def bottleneck_constant(
    graph: FiniteGraph,
    pairs: Sequence[tuple[int, int]] | None = None,
    n_pairs: int | None = None,
    seed: int = 0,
) -> BottleneckCertificate:
    """Smallest ``μ`` such that for every sampled pair and every vertex ``z`` of the
    chosen geodesic, all ``x``-``y`` paths meet ``B(z, μ-1)``.

    ``pairs`` defaults to all pairs for graphs with at most 60 vertices and to
    ``n_pairs`` (default 200) seeded random pairs above that.
    """
    graph.require_connected()
    if pairs is None:
        pairs = sample_pairs(graph, None if graph.n <= 60 and n_pairs is None else (n_pairs or 200), seed)
    mu, witness, sample = 1, None, []
    for x, y in pairs:
        geo = graph.geodesic(x, y)
        per = [point_bottleneck(graph, x, y, z) for z in geo]
        sample.append((x, y, geo, per))
        for z, m in zip(geo, per):
            if m > mu:
                mu, witness = m, (x, y, z)
    return BottleneckCertificate(mu, sample, witness)


# -- neighbourhoods and quasi-geodesics ---------------------------------------------

@dataclass
class NeighborhoodResult:
    hypothesis: bool
    conclusion: bool | None
    witness: int | None = None

    @property
    def ok(self) -> bool:
        return self.conclusion is not False


def neighborhood_check(graph: FiniteGraph, p: Sequence[int], q: Sequence[int], k: int) -> NeighborhoodResult:
    """If ``q ⊆ N_k(p)`` then ``p ⊆ N_{2k}(q)``; the hypothesis is checked first."""
    if not graph.is_geodesic(p):
        raise DomainError("p is not a geodesic")
    if not graph.is_path(q) or q[0] != p[0] or q[-1] != p[-1]:
        raise DomainError("q must be a path with the endpoints of p")
    dp = graph.dist_to_set(p)
    far = [v for v in q if dp[v] > k or dp[v] < 0]
    if far:
        return NeighborhoodResult(False, None, far[0])
    dq = graph.dist_to_set(q)
    bad = [v for v in p if dq[v] > 2 * k]
    return NeighborhoodResult(True, not bad, bad[0] if bad else None)


def hausdorff(graph: FiniteGraph, a: Sequence[int], b: Sequence[int]) -> int:
    da, db = graph.dist_to_set(a), graph.dist_to_set(b)
    return int(max(max(db[v] for v in a), max(da[v] for v in b)))


def quasigeodesic_stability(graph: FiniteGraph, qpath: Sequence[int], lam: float, C: float) -> int:
    """Hausdorff distance from a ``(λ, C)``-quasi-geodesic to the geodesic with
    the same endpoints; raises when ``qpath`` violates the inequality."""
    if not graph.is_path(qpath):
        raise DomainError("qpath is not a path")
    qp = list(qpath)
    for i in range(len(qp)):
        di = graph.dist_from(qp[i])
        if di[qp[-1]] < 0:
            raise DomainError("qpath endpoints are disconnected")
        for j in range(i + 1, len(qp)):
            d = di[qp[j]]
            if d < (j - i) / lam - C or d > lam * (j - i) + C:
                raise DomainError(f"not a ({lam}, {C})-quasi-geodesic on [{i}, {j}]: d = {d}")
    return hausdorff(graph, qp, graph.geodesic(qp[0], qp[-1]))


# -- quasi-convexity ----------------------------------------------------------------

@dataclass(frozen=True)
class QuasiConvexity:
    epsilon: int
    sigma: int
    exact: bool


def coarse_connectivity(graph: FiniteGraph, S: Sequence[int]) -> int:
    """Least ``ε`` chaining ``S`` with gaps ``<= ε`` (bottleneck of a minimum spanning tree)."""
    S = sorted(set(S))
    if len(S) <= 1:
        return 0
    D = np.array([graph.dist_from(s)[S] for s in S], dtype=np.float64)
    if (D < 0).any():
        raise DomainError("S meets several components")
    return int(minimum_spanning_tree(D).max())


def quasi_convexity(
    graph: FiniteGraph,
    S: Sequence[int],
    exhaustive: bool | None = None,
    n_pairs: int = 500,
    seed: int = 0,
) -> QuasiConvexity:
    """``(ε, σ)``: coarse connectivity of ``S`` and the least ``σ`` with every
    geodesic between points of ``S`` inside ``S^{+σ}``.

    Exhaustive mode (default for ``|S| <= 300``) covers all geodesics of all
    pairs; sampled mode follows one geodesic for random pairs and is a lower
    estimate.
    """
    S = sorted(set(S))
    if not S:
        raise DomainError("S is empty")
    eps = coarse_connectivity(graph, S)
    dS = graph.dist_to_set(S)
    if exhaustive is None:
        exhaustive = len(S) <= 300
    sigma = 0
    if exhaustive:
        for a, b in itertools.combinations(S, 2):
            mask = graph.geodesic_vertices(a, b)
            if mask.any():
                sigma = max(sigma, int(dS[mask].max()))
    else:
        rng = random.Random(seed)
        for _ in range(n_pairs):
            a, b = rng.choice(S), rng.choice(S)
            sigma = max(sigma, int(dS[graph.geodesic(a, b)].max()))
    return QuasiConvexity(eps, sigma, exhaustive)


# -- augmentation ------------------------------------------------------------------

@dataclass
class AugmentReport:
    hypothesis_ok: bool
    violations: list[tuple[int, int, int]]
    mu_sigma: int
    mu_delta: int
    added: int

    def to_dict(self) -> dict:
        return {
            "hypothesis_ok": self.hypothesis_ok,
            "violations": [list(v) for v in self.violations[:20]],
            "mu_sigma": self.mu_sigma,
            "mu_delta": self.mu_delta,
            "added": self.added,
        }


def augment_and_check(
    sigma: FiniteGraph,
    new_edges: Sequence[tuple[int, int]],
    M: int,
    pairs: Sequence[tuple[int, int]] | None = None,
    n_pairs: int | None = None,
    seed: int = 0,
) -> AugmentReport:
    """Add ``new_edges`` to ``Σ`` giving ``Δ``; check that each ``Σ``-geodesic
    between the ends of a new edge stays ``M``-close (in ``Δ``) to its start, and
    compare bottleneck constants on the same pairs."""
    sigma.require_connected()
    delta = sigma.with_edges(new_edges)
    violations = []
    for x, y in new_edges:
        dx = delta.dist_from(x)
        mask = sigma.geodesic_vertices(x, y)
        for v in np.nonzero(mask & (dx > M))[0]:
            violations.append((x, y, int(v)))
    if pairs is None:
        pairs = sample_pairs(sigma, None if sigma.n <= 60 and n_pairs is None else (n_pairs or 200), seed)
    mu_s = bottleneck_constant(sigma, pairs).mu
    mu_d = bottleneck_constant(delta, pairs).mu
    return AugmentReport(not violations, violations, mu_s, mu_d, len(new_edges))


# -- random test graphs --------------------------------------------------------------

def random_tree(n: int, rng: random.Random) -> FiniteGraph:
    adj: list[list[int]] = [[] for _ in range(n)]
    for v in range(1, n):
        u = rng.randrange(v)
        adj[u].append(v)
        adj[v].append(u)
    return FiniteGraph(adj)


def random_sparse_graph(n: int, chords: int, rng: random.Random) -> FiniteGraph:
    """A random tree plus ``chords`` extra random edges."""
    tree = random_tree(n, rng)
    extra = []
    for _ in range(chords):
        u, v = rng.randrange(n), rng.randrange(n)
        if u != v:
            extra.append((u, v))
    return tree.with_edges(extra)
