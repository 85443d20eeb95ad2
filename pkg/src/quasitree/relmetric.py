"""Relative metrics on the designated subgroups and their proper modification.

``rel_distance`` is the length of the shortest path avoiding the complete
subgraph on ``H_λ`` (edges of ``H_λ`` provenance joining two elements of
``H_λ``).  ``modified_metric`` turns a possibly infinite relative metric into a
finite word metric ``d_w`` over the whole subgroup, weighting each element by
its relative distance from 1 when that is finite and by its position in an
exhaustion by finite symmetric sets otherwise.
"""

from __future__ import annotations

import heapq
import logging
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .cayley import (
    CensoredDistance,
    CensoredResultError,
    DomainError,
    LabeledBall,
    Path,
    decompose,
    geodesics,
)
from .groups import Group, GroupElement

log = logging.getLogger(__name__)

C_FLOOR = 1.0


def rel_distance(ball: LabeledBall, lam: int, h: Sequence, k: Sequence) -> CensoredDistance:
    group = ball.group
    if not (group.in_subgroup(h, lam) and group.in_subgroup(k, lam)):
        raise DomainError(f"relative distance on H{lam} needs two elements of H{lam}")
    i, j = ball.vid(h), ball.vid(k)
    if i == j:
        return CensoredDistance.exact(0)
    dist = ball.bfs(i, excluded_subgroup=lam)
    d = int(dist[j])
    bound = ball.escape_bound(h, k)
    if 0 <= d <= bound:
        return CensoredDistance.exact(d)
    if d < 0:
        reached = dist >= 0
        if not (ball.length[reached] == ball.radius).any():
            return CensoredDistance.infinite()
        return CensoredDistance.lower(bound)
    return CensoredDistance.lower(min(d, bound))


def rel_from_identity(ball: LabeledBall, lam: int) -> dict[GroupElement, CensoredDistance]:
    """``d̂_λ(1, h)`` for every ``h`` in the (truncated) subgroup."""
    group = ball.group
    return {h: rel_distance(ball, lam, group.identity, h) for h in group.subgroup_elements(lam)}


def rel_between(ball: LabeledBall, lam: int, y: Sequence, y2: Sequence) -> CensoredDistance:
    """``d̂_λ`` between two points of one coset ``gH_λ``, by left-invariance."""
    group = ball.group
    h = group.multiply(group.inverse(y), y2)
    if not group.in_subgroup(h, lam):
        raise DomainError("points lie in different cosets")
    if h not in ball:
        raise CensoredResultError("translate leaves the ball", partial=h)
    return rel_distance(ball, lam, group.identity, h)


# -- the isolated-component constant ---------------------------------------

@dataclass(frozen=True)
class PolygonSample:
    n_polygons: int = 200
    min_sides: int = 2
    max_sides: int = 4
    core_radius: int | None = None
    seed: int = 0
    geodesic_limit: int = 4


@dataclass
class CEstimate:
    value: float
    sample_size: int
    isolated_components: int
    censored: int = 0
    warning: str | None = None
    witness: dict | None = None
    unbounded: bool = False

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "sample_size": self.sample_size,
            "isolated_components": self.isolated_components,
            "censored": self.censored,
            "warning": self.warning,
            "witness": self.witness,
            "unbounded": self.unbounded,
        }


def random_polygons(ball: LabeledBall, sample: PolygonSample) -> Iterable[list[Path]]:
    """Random geodesic polygons with corners in the core of the ball."""
    core_r = sample.core_radius if sample.core_radius is not None else ball.radius // 3
    core = ball.core(core_r)
    rng = random.Random(sample.seed)
    for _ in range(sample.n_polygons):
        n = rng.randint(sample.min_sides, sample.max_sides)
        corners = [rng.choice(core) for _ in range(n)]
        sides = []
        for a, b in zip(corners, corners[1:] + corners[:1]):
            try:
                options = geodesics(ball, a, b, sample.geodesic_limit)
            except CensoredResultError:
                sides = None
                break
            sides.append(rng.choice(options))
        if sides is not None:
            yield sides


def estimate_C(
    ball: LabeledBall,
    sample: PolygonSample | Iterable[Sequence[Path]] = PolygonSample(),
    floor: float = C_FLOOR,
) -> CEstimate:
    """Lower estimate of the isolated-component constant: the largest ratio
    ``d̂_λ(a-, a+) / n`` over isolated components ``a`` of sampled geodesic
    ``n``-gons, floored at ``floor``.  ``sample`` is either a
    :class:`PolygonSample` or an explicit iterable of polygons (lists of sides).
    """
    group = ball.group
    polygons = random_polygons(ball, sample) if isinstance(sample, PolygonSample) else sample
    best, witness = floor, None
    count = isolated = censored = 0
    unbounded = False
    for sides in polygons:
        sides = list(sides)
        n = len(sides)
        loop = sides[0]
        for s in sides[1:]:
            loop = loop + s
        count += 1
        for comp in decompose(group, loop, closed=True).isolated():
            isolated += 1
            try:
                d = rel_between(ball, comp.subgroup, comp.first, comp.last)
            except CensoredResultError:
                censored += 1
                continue
            if d.is_infinite:
                unbounded = True
                witness = {"n": n, "component": group.format(comp.first) + " -> " + group.format(comp.last), "rel": str(d)}
                continue
            if not d.is_exact:
                censored += 1
            ratio = d.value / n
            if ratio > best:
                best = ratio
                witness = {"n": n, "component": group.format(comp.first) + " -> " + group.format(comp.last), "rel": str(d)}
    warning = None
    if count == 0:
        warning = "no geodesic polygons constructible"
        log.warning("estimate_C: %s; returning floor %s", warning, floor)
    return CEstimate(best, count, isolated, censored, warning, witness, unbounded)


# -- the modified metric --------------------------------------------------------

@dataclass
class WeightTable:
    """Weights ``w`` on ``H_λ`` and the induced word metric ``d_w``.

    ``classes[i]`` is the ``i``-th symmetric block of the exhaustion, so that
    ``F_i = {1} ∪ classes[0] ∪ ... ∪ classes[i-1]``.
    """

    group: Group
    subgroup: int
    elements: list[GroupElement]
    classes: list[frozenset]
    h0: frozenset
    weights: dict[GroupElement, int]
    _settled: dict = field(default_factory=dict, repr=False)
    _heap: list = field(default_factory=list, repr=False)

    def __post_init__(self) -> None:
        self._letters = [(w, h) for h, w in self.weights.items() if h]
        self._heap = [(0, self.group.identity)]

    def weight(self, h: Sequence) -> int:
        return self.weights[h]

    def exhaustion(self, i: int) -> frozenset:
        out = {self.group.identity}
        for c in self.classes[:i]:
            out |= c
        return frozenset(out)

    def norm(self, g: Sequence) -> int:
        """``|g|_w``: cheapest word in the weighted alphabet representing ``g``."""
        settled = self._settled
        if g in settled:
            return settled[g]
        mul = self.group.multiply
        heap = self._heap
        while heap:
            d, u = heapq.heappop(heap)
            if u in settled:
                continue
            settled[u] = d
            for w, h in self._letters:
                v = mul(u, h)
                if v not in settled:
                    heapq.heappush(heap, (d + w, v))
            if u == g:
                return d
        raise DomainError(f"{self.group.format(g)} is not generated by the weighted alphabet")

    def d(self, g: Sequence, h: Sequence) -> int:
        return self.norm(self.group.multiply(self.group.inverse(g), h))

    def ball_count(self, radius: float) -> int:
        return sum(1 for h in self.elements if self.norm(h) <= radius)


def shortlex_enumeration(group: Group, lam: int) -> list[GroupElement]:
    return [h for h in group.subgroup_elements(lam) if h]


def modified_metric(
    group: Group,
    lam: int,
    enumeration: Sequence[GroupElement] | None,
    rel: Callable[[GroupElement], CensoredDistance] | dict,
) -> WeightTable:
    """Build ``w`` from the prefix exhaustion of ``enumeration`` and ``d̂(1, ·)``.

    Elements with an exact relative distance form ``H_0`` and are weighted by
    it; everything else gets the index of the first exhaustion set containing
    it.  Lower bounds are not treated as finite.
    """
    if enumeration is None:
        enumeration = shortlex_enumeration(group, lam)
    enumeration = list(enumeration)
    if not enumeration:
        raise DomainError("empty enumeration")
    lookup = rel.get if isinstance(rel, dict) else rel
    elements = group.subgroup_elements(lam)
    classes: list[frozenset] = []
    seen = {group.identity}
    for h in enumeration:
        if h in seen:
            continue
        block = frozenset({h, group.inverse(h)})
        seen |= block
        classes.append(block)
    index = {h: i + 1 for i, block in enumerate(classes) for h in block}
    missing = [h for h in elements if h not in seen]
    if missing:
        raise DomainError(f"enumeration misses {len(missing)} elements of H{lam}, e.g. {group.format(missing[0])}")
    h0, weights = set(), {group.identity: 0}
    for h in elements:
        if not h:
            continue
        d = lookup(h)
        if d is not None and d.is_exact:
            h0.add(h)
            weights[h] = d.value
        else:
            weights[h] = index[h]
    return WeightTable(group, lam, elements, classes, frozenset(h0 | {group.identity}), weights)


@dataclass(frozen=True)
class ProfileRow:
    radius: float
    count: int
    truncated: bool
    ambiguous: int = 0


def properness_profile(
    metric: Callable[[GroupElement], float | CensoredDistance],
    radii: Sequence[float],
    elements: Sequence[GroupElement],
    group: Group | None = None,
    lam: int | None = None,
) -> list[ProfileRow]:
    """Cardinalities of ``{h : d(1, h) <= r}`` over the truncated subgroup.

    ``truncated`` is set when a counted element sits on the truncation boundary
    ``|k| = K_H``; ``ambiguous`` counts lower bounds that do not decide
    membership.
    """
    values = {h: metric(h) for h in elements}
    rows = []
    for r in radii:
        count = ambiguous = 0
        touched = False
        for h, d in values.items():
            if isinstance(d, CensoredDistance):
                if d.is_exact and d.value <= r:
                    inside = True
                elif not d.is_exact and not d.is_infinite and d.value <= r:
                    ambiguous += 1
                    inside = False
                else:
                    inside = False
            else:
                inside = d <= r
            if inside:
                count += 1
                if group is not None and lam is not None and group.is_truncated_boundary(h, lam):
                    touched = True
        rows.append(ProfileRow(r, count, touched, ambiguous))
    return rows
