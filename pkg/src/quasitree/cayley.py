"""Truncated Cayley graphs over ``Z ⊔ H`` and truncation-aware distances.

A :class:`LabeledBall` is the ball of radius ``R`` around the identity in the
Cayley graph over a (finite) alphabet of :class:`~quasitree.groups.Letter`.
Parallel edges with different letters are kept.  Distances computed inside the
ball are reported as :class:`CensoredDistance` values: a path that leaves the
ball from ``u`` and returns to ``v`` is longer than ``(R - |u|) + (R - |v|)``,
so an in-ball distance not exceeding that escape bound is exact.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .groups import Group, GroupElement, Letter

DEFAULT_VERTEX_CAP = 400_000


class BallSizeError(RuntimeError):
    """The ball would exceed the configured vertex cap."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class CensoredResultError(RuntimeError):
    """A result depends on a distance that is not certified exact.

    ``partial`` carries whatever was computed before the censored value was hit.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class CensoredDistance:
    kind: str  # "exact", "lower" or "infinite"
    value: int | None = None

    @classmethod
    def exact(cls, n: int) -> "CensoredDistance":
        return cls("exact", int(n))

    @classmethod
    def lower(cls, n: int) -> "CensoredDistance":
        return cls("lower", int(n))

    @classmethod
    def infinite(cls) -> "CensoredDistance":
        return cls("infinite", None)

    @property
    def is_exact(self) -> bool:
        return self.kind == "exact"

    @property
    def is_infinite(self) -> bool:
        return self.kind == "infinite"

    @property
    def bound(self) -> float:
        """The value as a number (a lower bound unless exact)."""
        return float("inf") if self.kind == "infinite" else self.value

    def __str__(self) -> str:
        if self.kind == "exact":
            return f"Exact({self.value})"
        if self.kind == "lower":
            return f"LowerBound({self.value})"
        return "CertifiedInfinite"


@dataclass(frozen=True)
class Path:
    vertices: tuple[GroupElement, ...]
    letters: tuple[Letter, ...] = ()

    def __post_init__(self) -> None:
        if len(self.vertices) != len(self.letters) + 1:
            raise ValueError("a path has one more vertex than letters")

    def __len__(self) -> int:
        return len(self.letters)

    @property
    def closed(self) -> bool:
        return len(self.letters) > 0 and self.vertices[0] == self.vertices[-1]

    def reversed(self, group: Group) -> "Path":
        inv = {}
        letters = []
        for x in reversed(self.letters):
            key = (x.subgroup, x.element)
            if key not in inv:
                inv[key] = Letter(_inverse_name(x.name), group.inverse(x.element), x.subgroup)
            letters.append(inv[key])
        return Path(tuple(reversed(self.vertices)), tuple(letters))

    def __add__(self, other: "Path") -> "Path":
        if self.vertices[-1] != other.vertices[0]:
            raise ValueError("paths do not concatenate")
        return Path(self.vertices + other.vertices[1:], self.letters + other.letters)


def _inverse_name(name: str) -> str:
    return name[:-3] if name.endswith("^-1") else f"{name}^-1"


@dataclass
class LabeledBall:
    """Ball of radius ``radius`` around the identity with labelled multi-edges.

    Vertices are stored in BFS order; ``length[i]`` is the word length of
    ``elements[i]``; ``adjacency[i]`` lists ``(j, letter index)`` for every edge
    ``elements[i] -> elements[i] * letter`` that stays in the ball.
    """

    group: Group
    alphabet: tuple[Letter, ...]
    radius: int
    elements: list[GroupElement]
    index: dict[GroupElement, int]
    length: np.ndarray
    adjacency: list[list[tuple[int, int]]]
    letter_inverse: tuple[int, ...]
    _bfs_cache: dict = field(default_factory=dict, repr=False)
    _csr_cache: dict = field(default_factory=dict, repr=False)
    memo: dict = field(default_factory=dict, repr=False)

    # -- structure ----------------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return len(self.elements)

    @property
    def n_edges(self) -> int:
        """Number of undirected edges (each counted once per letter pair)."""
        return sum(len(a) for a in self.adjacency) // 2

    def __contains__(self, g) -> bool:
        return g in self.index

    def vid(self, g: Sequence) -> int:
        try:
            return self.index[g]
        except KeyError:
            raise DomainError(f"{self.group.format(g)} is not a vertex of the ball") from None

    def word_length(self, g: Sequence) -> int:
        return int(self.length[self.vid(g)])

    def boundary(self) -> list[GroupElement]:
        return [g for g, n in zip(self.elements, self.length) if n == self.radius]

    def core(self, radius: int) -> list[GroupElement]:
        return [g for g, n in zip(self.elements, self.length) if n <= radius]

    def edges(self) -> Iterator[tuple[GroupElement, GroupElement, Letter]]:
        for i, nbrs in enumerate(self.adjacency):
            for j, x in nbrs:
                yield self.elements[i], self.elements[j], self.alphabet[x]

    def escape_bound(self, u: Sequence, v: Sequence) -> int:
        return (self.radius - self.word_length(u)) + (self.radius - self.word_length(v))

    # -- graph kernels --------------------------------------------------------
    def csr(self, excluded_subgroup: int = 0) -> csr_matrix:
        """Simple-graph adjacency; with ``excluded_subgroup = λ`` the edges of
        the complete subgraph on ``H_λ`` carrying ``H_λ`` letters are dropped."""
        if excluded_subgroup in self._csr_cache:
            return self._csr_cache[excluded_subgroup]
        rows, cols = [], []
        lam = excluded_subgroup
        group = self.group
        for i, nbrs in enumerate(self.adjacency):
            inside = lam and group.in_subgroup(self.elements[i], lam)
            for j, x in nbrs:
                if inside and self.alphabet[x].subgroup == lam:
                    continue
                rows.append(i)
                cols.append(j)
        n = self.n_vertices
        data = np.ones(len(rows), dtype=np.int8)
        mat = csr_matrix((data, (np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64))), shape=(n, n))
        mat.sum_duplicates()
        mat.data[:] = 1
        self._csr_cache[excluded_subgroup] = mat
        return mat

    def bfs(self, source: int, excluded_subgroup: int = 0) -> np.ndarray:
        """In-ball BFS distances from vertex id ``source`` (-1 when unreachable)."""
        key = (source, excluded_subgroup)
        cached = self._bfs_cache.get(key)
        if cached is not None:
            return cached
        d = shortest_path(self.csr(excluded_subgroup), unweighted=True, directed=False, indices=source)
        out = np.where(np.isinf(d), -1, d).astype(np.int32)
        if len(self._bfs_cache) > 512:
            self._bfs_cache.clear()
        self._bfs_cache[key] = out
        return out

    def neighbours(self, i: int) -> list[int]:
        return sorted({j for j, _ in self.adjacency[i]})


def build_ball(
    group: Group,
    radius: int,
    alphabet: Sequence[Letter] | None = None,
    vertex_cap: int = DEFAULT_VERTEX_CAP,
) -> LabeledBall:
    """Breadth-first construction of the radius-``radius`` ball.

    ``alphabet`` defaults to ``group.alphabet()``, i.e. ``Z ⊔ H``.
    """
    if radius < 0:
        raise DomainError("radius must be nonnegative")
    letters = tuple(alphabet if alphabet is not None else group.alphabet())
    inv_index = {}
    for k, x in enumerate(letters):
        inv_index.setdefault((x.subgroup, x.element), k)
    letter_inverse = []
    for x in letters:
        key = (x.subgroup, group.inverse(x.element))
        if key not in inv_index:
            raise DomainError(f"alphabet is not symmetric: {x.label} has no inverse letter")
        letter_inverse.append(inv_index[key])

    mul = group.multiply
    elements = [group.identity]
    index = {group.identity: 0}
    length = [0]
    adjacency: list[list[tuple[int, int]]] = [[]]
    frontier = [0]
    level = 0
    while frontier:
        nxt = []
        for i in frontier:
            u = elements[i]
            row = adjacency[i]
            for k, x in enumerate(letters):
                v = mul(u, x.element)
                j = index.get(v)
                if j is None:
                    if level == radius:
                        continue
                    j = len(elements)
                    if j >= vertex_cap:
                        raise BallSizeError(f"ball of radius {radius} exceeds vertex cap {vertex_cap}")
                    index[v] = j
                    elements.append(v)
                    length.append(level + 1)
                    adjacency.append([])
                    nxt.append(j)
                row.append((j, k))
        frontier = nxt
        level += 1
    return LabeledBall(
        group=group,
        alphabet=letters,
        radius=radius,
        elements=elements,
        index=index,
        length=np.array(length, dtype=np.int32),
        adjacency=adjacency,
        letter_inverse=tuple(letter_inverse),
    )


def distance(ball: LabeledBall, u: Sequence, v: Sequence) -> CensoredDistance:
    """Graph distance with its truncation certificate."""
    i, j = ball.vid(u), ball.vid(v)
    if i == j:
        return CensoredDistance.exact(0)
    d = int(ball.bfs(i)[j])
    bound = ball.escape_bound(u, v)
    if d >= 0 and d <= bound:
        return CensoredDistance.exact(d)
    return CensoredDistance.lower(bound if d < 0 else min(d, bound))


def geodesics(ball: LabeledBall, u: Sequence, v: Sequence, limit: int = 16) -> list[Path]:
    """Up to ``limit`` distinct shortest paths from ``u`` to ``v`` (parallel
    edges give distinct paths).

    For finite ``H_λ`` the alphabet contains all of ``H_λ``, so a geodesic never
    uses two consecutive ``H_λ`` edges; this is asserted.
    """
    dist = distance(ball, u, v)
    if not dist.is_exact:
        raise CensoredResultError(f"distance is {dist}, geodesics are not certified", partial=dist)
    i, j = ball.vid(u), ball.vid(v)
    if i == j:
        return [Path((ball.elements[i],))]
    du = ball.bfs(i)
    dv = ball.bfs(j)
    n = dist.value
    out: list[Path] = []
    stack: list[tuple[int, list[int], list[int]]] = [(i, [i], [])]
    while stack and len(out) < limit:
        w, verts, lets = stack.pop()
        if w == j:
            out.append(Path(tuple(ball.elements[k] for k in verts), tuple(ball.alphabet[k] for k in lets)))
            continue
        step = du[w] + 1
        for y, x in reversed(ball.adjacency[w]):
            if du[y] == step and dv[y] == n - step:
                stack.append((y, verts + [y], lets + [x]))
    for p in out:
        _assert_single_edge_components(ball.group, p)
    return out


def _assert_single_edge_components(group: Group, path: Path) -> None:
    for a, b in zip(path.letters, path.letters[1:]):
        if a.subgroup and a.subgroup == b.subgroup and group.subgroup_finite(a.subgroup):
            raise AssertionError(f"geodesic has an H{a.subgroup}-component of length > 1")


def path_from_word(group: Group, start: Sequence, letters: Iterable[Letter]) -> Path:
    verts = [GroupElement(start)]
    lets = []
    for x in letters:
        verts.append(group.multiply(verts[-1], x.element))
        lets.append(x)
    return Path(tuple(verts), tuple(lets))


# -- path decomposition ------------------------------------------------------

@dataclass(frozen=True)
class Component:
    """A maximal ``H_λ``-subpath: edges ``start .. start + length - 1`` (mod the
    path length for closed paths)."""

    subgroup: int
    start: int
    length: int
    first: GroupElement
    last: GroupElement
    coset: GroupElement
    isolated: bool = True
    links: tuple[int, ...] = ()


@dataclass(frozen=True)
class PathDecomposition:
    path: Path
    components: tuple[Component, ...]

    def isolated(self) -> list[Component]:
        return [c for c in self.components if c.isolated]


def decompose(group: Group, path: Path, subgroup: int | None = None, closed: bool | None = None) -> PathDecomposition:
    """Maximal ``H_λ``-components of ``path`` with isolated/connected flags.

    For closed paths (loops) maximality is taken over cyclic shifts, i.e. a run
    at the end merges with a run at the start.
    """
    if closed is None:
        closed = path.closed
    lets = path.letters
    m = len(lets)
    runs: list[tuple[int, int, int]] = []  # (λ, start, length)
    k = 0
    while k < m:
        lam = lets[k].subgroup
        if not lam:
            k += 1
            continue
        s = k
        while k < m and lets[k].subgroup == lam:
            k += 1
        runs.append((lam, s, k - s))
    if closed and len(runs) > 1:
        lam0, s0, n0 = runs[0]
        lamz, sz, nz = runs[-1]
        if lam0 == lamz and s0 == 0 and sz + nz == m:
            runs = [(lamz, sz, nz + n0)] + runs[1:-1]
    if subgroup is not None:
        runs = [r for r in runs if r[0] == subgroup]
    verts = path.vertices
    raw = []
    for lam, s, n in runs:
        first = verts[s]
        last = verts[(s + n) % m] if closed else verts[s + n]
        raw.append((lam, s, n, first, last, group.coset_rep(first, lam)))
    comps = []
    for a, (lam, s, n, first, last, coset) in enumerate(raw):
        links = tuple(b for b, other in enumerate(raw) if b != a and other[0] == lam and other[5] == coset)
        comps.append(Component(lam, s, n, first, last, coset, not links, links))
    return PathDecomposition(path, tuple(comps))


def bfs_tree_path(adjacency: Sequence[Sequence[int]], source: int, target: int) -> list[int] | None:
    """One shortest path in a plain adjacency-list graph (deterministic)."""
    parent = {source: None}
    q = deque([source])
    while q:
        w = q.popleft()
        if w == target:
            break
        for y in adjacency[w]:
            if y not in parent:
                parent[y] = w
                q.append(y)
    if target not in parent:
        return None
    out = [target]
    while parent[out[-1]] is not None:
        out.append(parent[out[-1]])
    return out[::-1]
