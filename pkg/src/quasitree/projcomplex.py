"""The projection complex on a coset universe and the generating set read off it.

Vertices are cosets ``kH_i``; ``A ~ B`` when every third coset sees ``A`` and
``B`` within ``J`` of each other.  From the star of each ``H_i`` we pick one
shortest element of every double coset ``H_i k H_j`` and get a relative
generating set ``X`` of ``K`` whose Cayley graph ``Γ(K, X ⊔ H)`` is
quasi-isometric to the complex.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .cayley import CensoredResultError, DomainError, LabeledBall, build_ball
from .groups import Group, GroupElement, Letter
from .projection import Coset, ProjectionTable
from .relmetric import WeightTable, rel_distance

log = logging.getLogger(__name__)


class ParameterError(ValueError):
    """The chosen parameters do not support the construction."""


def default_J(C: float, xi: float) -> int:
    return math.floor(14 * C + 2 * xi) + 1


def default_alpha(J: float, xi: float, C: float) -> float:
    return max(J + 2 * xi, 6 * C)


# -- the coset universe -----------------------------------------------------------

def subgroup_closure(ball: LabeledBall, generators: Sequence[GroupElement] | None) -> set[GroupElement]:
    """Elements of ``K = <generators>`` reachable inside the ball by
    right-multiplying with generators (``None`` means ``K = G``)."""
    if generators is None:
        return set(ball.elements)
    group = ball.group
    gens = []
    for g in generators:
        if g not in ball:
            raise DomainError(f"K generator {group.format(g)} is not in the ball")
        gens.extend([g, group.inverse(g)])
    seen = {group.identity}
    frontier = [group.identity]
    while frontier:
        nxt = []
        for u in frontier:
            for g in gens:
                v = group.multiply(u, g)
                if v in ball and v not in seen:
                    seen.add(v)
                    nxt.append(v)
        frontier = nxt
    return seen


def enumerate_cosets(
    ball: LabeledBall,
    K: Sequence[GroupElement] | None = None,
    core_radius: int | None = None,
) -> list[Coset]:
    """All ``kH_i`` (``k ∈ K``) whose representative lies in the core of the ball,
    identity cosets first, then by representative length and shortlex."""
    group = ball.group
    core = ball.radius // 3 if core_radius is None else core_radius
    members = subgroup_closure(ball, K)
    found = set()
    for k in members:
        for lam in range(1, group.n_subgroups + 1):
            rep = group.coset_rep(k, lam)
            if rep in ball and ball.word_length(rep) <= core:
                found.add(Coset(lam, rep))
    ident = [Coset(lam, group.identity) for lam in range(1, group.n_subgroups + 1)]
    rest = sorted(found - set(ident), key=lambda c: (ball.word_length(c.rep), group.sort_key(c.rep), c.lam))
    return ident + rest


# -- the complex -----------------------------------------------------------------

def _edge_set(D: np.ndarray, threshold: float) -> set[tuple[int, int]]:
    n = D.shape[0]
    edges = set()
    for a in range(n):
        for b in range(a + 1, n):
            col = np.delete(D[:, a, b], [a, b])
            if not (col > threshold).any():
                edges.add((a, b))
    return edges


def _distances(n: int, edges: set[tuple[int, int]]) -> np.ndarray:
    if not edges:
        d = np.full((n, n), -1, dtype=np.int64)
        np.fill_diagonal(d, 0)
        return d
    rows, cols = zip(*edges)
    mat = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    d = shortest_path(mat, unweighted=True, directed=False)
    return np.where(np.isinf(d), -1, d).astype(np.int64)


@dataclass
class ProjectionComplex:
    universe: list[Coset]
    edges: set[tuple[int, int]]
    J: float
    xi: float
    C: float
    dist: np.ndarray
    strict_edges: set[tuple[int, int]] = field(default_factory=set)
    lenient_edges: set[tuple[int, int]] = field(default_factory=set)
    labels: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.position = {c: i for i, c in enumerate(self.universe)}

    @property
    def connected(self) -> bool:
        return bool((self.dist >= 0).all())

    @property
    def n_vertices(self) -> int:
        return len(self.universe)

    def adjacent(self, A: Coset, B: Coset) -> bool:
        a, b = sorted((self.position[A], self.position[B]))
        return (a, b) in self.edges

    def dP(self, A: Coset, B: Coset) -> int:
        """Edge-count distance (-1 when disconnected)."""
        return int(self.dist[self.position[A], self.position[B]])

    def star(self, A: Coset) -> list[Coset]:
        i = self.position[A]
        return [self.universe[j] for j in np.nonzero(self.dist[i] == 1)[0]]

    def sigma_diameter(self, group: Group) -> int:
        """``diam(Σ)`` for ``Σ = {H_1, ..., H_n}``."""
        ident = [Coset(lam, group.identity) for lam in range(1, group.n_subgroups + 1)]
        best = 0
        for A in ident:
            for B in ident:
                d = self.dP(A, B)
                if d < 0:
                    raise ParameterError(f"{A.label(group)} and {B.label(group)} are disconnected at J={self.J}")
                best = max(best, d)
        return best

    def to_dict(self) -> dict:
        return {
            "vertices": self.labels,
            "edges": sorted([list(e) for e in self.edges]),
            "n_edges": len(self.edges),
            "n_edges_strict": len(self.strict_edges),
            "n_edges_lenient": len(self.lenient_edges),
            "J": self.J,
            "xi": self.xi,
            "C": self.C,
            "connected": self.connected,
            "diameter": int(self.dist.max()) if self.connected else None,
        }


def build_complex(table: ProjectionTable, J: float | None = None, xi: float | None = None) -> ProjectionComplex:
    """Edge rule ``d^π_Y(A, B) <= J`` for all ``Y ∉ {A, B}``; the strict
    (``J - 2ξ``) and lenient (``J + 2ξ``) edge sets bracket the perturbed rule."""
    xi = table.xi if xi is None else xi
    J = default_J(table.C, xi) if J is None else J
    D = np.nan_to_num(table.values, nan=0.0)
    n = table.size
    edges = _edge_set(D, J)
    strict = _edge_set(D, J - 2 * xi)
    lenient = _edge_set(D, J + 2 * xi)
    cx = ProjectionComplex(list(table.universe), edges, J, xi, table.C, _distances(n, edges), strict, lenient, list(table.labels))
    if not cx.connected:
        log.warning("projection complex is disconnected at J=%s", J)
    return cx


# -- the generating set ------------------------------------------------------------

@dataclass
class GeneratingSet:
    elements: list[GroupElement]
    tags: dict[GroupElement, tuple[int, int]] = field(default_factory=dict)
    provenance: dict[GroupElement, str] = field(default_factory=dict)
    added: list[GroupElement] = field(default_factory=list)
    adjacency_checked: int = 0
    adjacency_unverified: int = 0

    def __contains__(self, g) -> bool:
        return g in set(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def is_symmetric(self, group: Group) -> bool:
        s = set(self.elements)
        return all(group.inverse(x) in s for x in s)

    def avoids_subgroups(self, group: Group, include_added: bool = False) -> bool:
        added = set(self.added)
        return all(
            x and not any(group.in_subgroup(x, lam) for lam in range(1, group.n_subgroups + 1))
            for x in self.elements
            if include_added or x not in added
        )

    def letters(self, group: Group) -> list[Letter]:
        return [Letter(group.format(x), x) for x in self.elements]

    def to_dict(self, group: Group) -> dict:
        return {
            "elements": [group.format(x) for x in self.elements],
            "tags": {group.format(x): list(t) for x, t in self.tags.items()},
            "added": [group.format(x) for x in self.added],
            "adjacency_checked": self.adjacency_checked,
            "adjacency_unverified": self.adjacency_unverified,
        }


def _minimal_double_coset_elements(ball: LabeledBall, i: int, j: int) -> dict[GroupElement, GroupElement]:
    """Double-coset key -> shortlex-least shortest element, over the ball."""
    key = ("dcoset", i, j)
    if key in ball.memo:
        return ball.memo[key]
    group = ball.group
    best: dict[GroupElement, GroupElement] = {}
    for g in ball.elements:  # BFS order: nondecreasing length
        k = group.double_coset_key(g, i, j)
        cur = best.get(k)
        if cur is None:
            best[k] = g
        elif ball.word_length(cur) == ball.word_length(g) and group.sort_key(g) < group.sort_key(cur):
            best[k] = g
    ball.memo[key] = best
    return best


def construct_generating_set(cx: ProjectionComplex, ball: LabeledBall) -> GeneratingSet:
    """One shortest element ``x_e`` of ``H_i k H_j`` per star edge ``H_i -- kH_j``,
    with ``x_ē = x_e^{-1}`` for the dual edge ``H_j -- k^{-1}H_i``."""
    group = ball.group
    chosen: dict[tuple[int, int, GroupElement], GroupElement] = {}
    for i in range(1, group.n_subgroups + 1):
        Hi = Coset(i, group.identity)
        if Hi not in cx.position:
            continue
        for B in cx.star(Hi):
            j, k = B.lam, B.rep
            dkey = group.double_coset_key(k, i, j)
            if (i, j, dkey) in chosen:
                continue
            table = _minimal_double_coset_elements(ball, i, j)
            if dkey not in table:
                raise CensoredResultError(f"double coset H{i}{group.format(k)}H{j} does not meet the ball")
            x = table[dkey]
            if ball.word_length(x) == ball.radius:
                raise CensoredResultError(f"shortest element of H{i}{group.format(k)}H{j} is not certified")
            inv = group.inverse(x)
            dual = (j, i, group.double_coset_key(inv, j, i))
            if dual in chosen:
                x = group.inverse(chosen[dual])
            else:
                # the dual edge takes the inverse; use whichever side is shortlex-least
                alt = _minimal_double_coset_elements(ball, j, i).get(dual[2])
                if alt is not None and group.sort_key(alt) < group.sort_key(x):
                    x = group.inverse(alt)
            chosen[(i, j, dkey)] = x
            chosen[dual] = group.inverse(x)
    gs = GeneratingSet([])
    elements = set()
    for (i, j, _), x in chosen.items():
        if not x or group.in_subgroup(x, i) or group.in_subgroup(x, j):
            continue
        elements.add(x)
        gs.tags.setdefault(x, (i, j))
        gs.provenance.setdefault(x, f"H{i} -- {Coset.of(group, x, j).label(group)}")
    gs.elements = group.sorted(elements)
    # property (a): H_i and x_e H_j are adjacent
    for x in gs.elements:
        i, j = gs.tags[x]
        B = Coset.of(group, x, j)
        Hi = Coset(i, group.identity)
        if B in cx.position:
            gs.adjacency_checked += 1
            if not cx.adjacent(Hi, B):
                raise AssertionError(f"H{i} and {B.label(group)} are not adjacent")
        else:
            gs.adjacency_unverified += 1
    return gs


@dataclass
class CompletionReport:
    added_h: list[GroupElement]
    added_other: list[GroupElement]
    symmetric_difference: int
    rho: int
    J_ok: bool

    def to_dict(self, group: Group) -> dict:
        return {
            "added_representing_H": [group.format(x) for x in self.added_h],
            "added_other": [group.format(x) for x in self.added_other],
            "symmetric_difference": self.symmetric_difference,
            "rho": self.rho,
            "within_rho": len(self.added_h) <= self.rho,
            "J_ok": self.J_ok,
        }


def z_cap_k(group: Group, ball: LabeledBall, K: Sequence[GroupElement] | None) -> list[GroupElement]:
    """Images of relative letters that lie in ``K`` (as far as the ball decides)."""
    members = subgroup_closure(ball, K)
    return group.sorted({x.element for x in group.relative_letters() if x.element in members})


def rho(weights: dict[int, WeightTable]) -> int:
    """Total size of the ``d̃``-balls of radius 1 over all subgroups."""
    return sum(wt.ball_count(1) for wt in weights.values())


def complete_generating_set(
    X: GeneratingSet,
    zk: Sequence[GroupElement],
    group: Group,
    weights: dict[int, WeightTable],
    J: float | None = None,
    C: float | None = None,
    xi: float | None = None,
) -> tuple[GeneratingSet, CompletionReport]:
    """``X' = X ∪ (Z ∩ K)`` with the added elements classified."""
    J_ok = True
    if J is not None and C is not None and xi is not None and J < 14 * C + 2 * xi + 1:
        log.warning("J=%s is below 14C + 2ξ + 1; completion bound not guaranteed", J)
        J_ok = False
    current = set(X.elements)
    added_h, added_other = [], []
    for z in zk:
        if z in current or not z:
            continue
        current.add(z)
        if any(group.in_subgroup(z, lam) for lam in range(1, group.n_subgroups + 1)):
            added_h.append(z)
        else:
            added_other.append(z)
    new = GeneratingSet(group.sorted(current), dict(X.tags), dict(X.provenance), X.added + added_h + added_other,
                        X.adjacency_checked, X.adjacency_unverified)
    for z in added_h + added_other:
        new.provenance[z] = "relative letter"
    report = CompletionReport(added_h, added_other, len(added_h) + len(added_other), rho(weights), J_ok)
    return new, report


# -- verification on the new Cayley graph ------------------------------------------

def alphabet_over(group: Group, X: GeneratingSet) -> list[Letter]:
    """The alphabet ``X' ⊔ H_1 ⊔ ... ⊔ H_n``."""
    letters = X.letters(group)
    for lam in range(1, group.n_subgroups + 1):
        letters.extend(group.subgroup_letters(lam))
    return letters


def build_ball_over(group: Group, X: GeneratingSet, radius: int, vertex_cap: int | None = None) -> LabeledBall:
    kwargs = {} if vertex_cap is None else {"vertex_cap": vertex_cap}
    return build_ball(group, radius, alphabet_over(group, X), **kwargs)


@dataclass
class EmbeddingReport:
    sigma_diameter: int
    checked: int
    skipped: int
    lower_failures: list[dict]
    upper_failures: list[dict]
    multiplicative_failures: int
    margins: list[dict]

    @property
    def ok(self) -> bool:
        return not (self.lower_failures or self.upper_failures)

    def to_dict(self) -> dict:
        return {
            "sigma_diameter": self.sigma_diameter,
            "checked": self.checked,
            "skipped": self.skipped,
            "dP_bound_failures": self.lower_failures,
            "length_bound_failures": self.upper_failures,
            "multiplicative_form_failures": self.multiplicative_failures,
            "margins": self.margins[:50],
            "ok": self.ok,
        }


def verify_embedding_bounds(
    cx: ProjectionComplex,
    ball_x: LabeledBall,
    samples: Sequence[GroupElement],
    lam: int = 1,
) -> EmbeddingReport:
    """``d_P(H, gH) <= (2 diam Σ + 1)|g|`` and ``|g| <= 3 d_P(H, gH) + 1`` with
    word length over ``X' ⊔ H`` (``ball_x``) and ``H = H_lam``."""
    group = ball_x.group
    sd = cx.sigma_diameter(group)
    base = Coset(lam, group.identity)
    checked = skipped = mult = 0
    low, up, margins = [], [], []
    for g in samples:
        B = Coset.of(group, g, lam)
        if g not in ball_x or B not in cx.position:
            skipped += 1
            continue
        n = ball_x.word_length(g)
        d = cx.dP(base, B)
        if d < 0:
            skipped += 1
            continue
        checked += 1
        row = {"g": group.format(g), "length": n, "dP": d}
        margins.append(row)
        if d > (2 * sd + 1) * n:
            low.append(row)
        if n > 3 * d + 1:
            up.append(row)
        if n > 3 * d:
            mult += 1
    return EmbeddingReport(sd, checked, skipped, low, up, mult, margins)


@dataclass
class AlphaReport:
    alpha: float
    checked: int
    skipped: int
    violations: list[dict]
    margins: list[dict]

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "checked": self.checked,
            "skipped": self.skipped,
            "violations": self.violations,
            "margins": self.margins[:50],
            "ok": self.ok,
        }


def verify_alpha_bound(ball_x: LabeledBall, weights: dict[int, WeightTable], alpha: float) -> AlphaReport:
    """``α d̂^X_i(1, h) >= d̃_i(1, h)`` for every ``h`` in the truncated ``H_i``.

    A lower bound ``L`` on ``d̂^X`` already decides the inequality when
    ``α L >= d̃``; otherwise the pair is skipped unless ``d̂^X`` is exact.
    """
    group = ball_x.group
    checked = skipped = 0
    violations, margins = [], []
    for lam, wt in weights.items():
        for h in group.subgroup_elements(lam):
            if h not in ball_x:
                skipped += 1
                continue
            dx = rel_distance(ball_x, lam, group.identity, h)
            dt = wt.norm(h)
            row = {"h": group.format(h), "subgroup": lam, "rel_X": str(dx), "dtilde": dt}
            if dx.is_infinite or alpha * dx.value >= dt:
                checked += 1
                margins.append(row)
            elif dx.is_exact:
                checked += 1
                violations.append(row)
            else:
                skipped += 1
    return AlphaReport(alpha, checked, skipped, violations, margins)


def check_generation(ball_x: LabeledBall, targets: Sequence[GroupElement]) -> list[GroupElement]:
    """Targets not reachable in the ball over ``X' ⊔ H`` (empty when ``X' ∪ H``
    generates them)."""
    return [g for g in targets if g not in ball_x]
