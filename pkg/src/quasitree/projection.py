"""Nearest-point projections onto cosets and the projection distances ``d^π_Y``.

Projections are computed inside a :class:`~quasitree.cayley.LabeledBall` and
are only returned when the truncation cannot change them: every competing coset
element, inside or outside the ball, must be provably no closer than the
minimum found.  Otherwise :class:`~quasitree.cayley.CensoredResultError` is
raised.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .cayley import CensoredResultError, DomainError, LabeledBall
from .groups import Group, GroupElement
from .relmetric import WeightTable, rel_between

log = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class Coset:
    """The left coset ``rep · H_λ`` (``rep`` is the shortlex-least element)."""

    lam: int
    rep: GroupElement

    @classmethod
    def of(cls, group: Group, g: Sequence, lam: int) -> "Coset":
        return cls(lam, group.coset_rep(g, lam))

    def label(self, group: Group) -> str:
        return f"{group.format(self.rep)}H{self.lam}"

    def contains(self, group: Group, g: Sequence) -> bool:
        return group.coset_rep(g, self.lam) == self.rep

    def translate(self, group: Group, g: Sequence) -> "Coset":
        return Coset.of(group, group.multiply(g, self.rep), self.lam)


def coset_members(ball: LabeledBall, Y: Coset) -> tuple[list[GroupElement], bool]:
    """Elements of ``Y`` inside the ball, and whether that is all of ``Y``."""
    key = ("members", Y)
    if key in ball.memo:
        return ball.memo[key]
    group = ball.group
    f = group.subgroup_factor(Y.lam)
    order = group.spec.factors[f].order
    mul = group.multiply
    out = []
    if order is not None:
        for k in range(order):
            g = mul(Y.rep, group._syllable(f, k))
            if g in ball:
                out.append(g)
        complete = len(out) == order
    else:
        if Y.rep in ball:
            out.append(Y.rep)
        for step in (1, -1):
            k = step
            while True:
                g = mul(Y.rep, group._syllable(f, k))
                if g not in ball:
                    break
                out.append(g)
                k += step
        complete = False
    result = (group.sorted(out), complete)
    ball.memo[key] = result
    return result


def project_point(ball: LabeledBall, Y: Coset, a: Sequence) -> frozenset:
    """``proj_Y(a)``, certified against truncation."""
    key = ("proj", Y, a)
    if key in ball.memo:
        return ball.memo[key]
    members, complete = coset_members(ball, Y)
    if not members:
        raise DomainError(f"coset {Y.label(ball.group)} does not meet the ball")
    dist = ball.bfs(ball.vid(a))
    d = np.array([dist[ball.index[y]] for y in members])
    reached = d >= 0
    if not reached.any():
        raise CensoredResultError("no coset element reachable inside the ball", partial={})
    m = int(d[reached].min())
    # a path leaving the ball from a and re-entering at y has length at least
    # (R + 1 - |a|) + (R + 1 - |y|); an element outside the ball is at least
    # R + 1 - |a| away.  Minimizers must be exact and nobody else may tie.
    R, la = ball.radius, ball.word_length(a)
    ly = np.array([ball.length[ball.index[y]] for y in members])
    escape = (R + 1 - la) + (R + 1 - ly)
    ok = bool((escape[d == m] >= m).all()) and bool((escape[d != m] > m).all())
    if not complete:
        ok = ok and m < R + 1 - la
    if not ok:
        raise CensoredResultError(
            f"projection of {ball.group.format(a)} to {Y.label(ball.group)} is censored",
            partial={"min": m, "candidates": [y for y, v in zip(members, d) if v == m]},
        )
    out = frozenset(y for y, v in zip(members, d) if v == m)
    ball.memo[key] = out
    return out


def project_set(ball: LabeledBall, Y: Coset, A: Coset | Iterable[GroupElement]) -> frozenset:
    """``proj_Y(A)`` as the union of point projections over ``A`` in the ball."""
    if isinstance(A, Coset):
        if A == Y:
            return frozenset(coset_members(ball, Y)[0])
        points, _ = coset_members(ball, A)
    else:
        points = list(A)
    out: set = set()
    for a in points:
        out |= project_point(ball, Y, a)
    return frozenset(out)


def dtilde_diameter(group: Group, weights: WeightTable, points: Iterable[GroupElement]) -> int:
    """``d̃``-diameter of a set of points of one coset (0 for empty sets)."""
    pts = list(points)
    best = 0
    for y, z in itertools.combinations(pts, 2):
        best = max(best, weights.d(y, z))
    return best


def dhat_diameter(ball: LabeledBall, lam: int, points: Iterable[GroupElement]) -> float:
    """``d̂``-diameter; censored values contribute their lower bound."""
    pts = list(points)
    best = 0.0
    for y, z in itertools.combinations(pts, 2):
        best = max(best, rel_between(ball, lam, y, z).bound)
    return best


def dpi(ball: LabeledBall, weights: dict[int, WeightTable], Y: Coset, A: Coset, B: Coset) -> int:
    """``d^π_Y(A, B) = d̃diam(proj_Y(A) ∪ proj_Y(B))``."""
    if A == Y or B == Y:
        raise DomainError("d^π_Y(A, B) needs A ≠ Y ≠ B")
    pts = project_set(ball, Y, A) | project_set(ball, Y, B)
    return dtilde_diameter(ball.group, weights[Y.lam], pts)


@dataclass
class ProjectionTable:
    """All ``d^π`` values on a finite universe.

    ``values[y, a, b]`` is ``d^π_Y(A, B)`` (NaN where ``A = Y`` or ``B = Y``).
    """

    universe: list[Coset]
    values: np.ndarray
    C: float
    xi: float
    labels: list[str] = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.universe)

    def get(self, Y: Coset, A: Coset, B: Coset) -> float:
        pos = {c: i for i, c in enumerate(self.universe)}
        return float(self.values[pos[Y], pos[A], pos[B]])


def default_xi(C: float) -> int:
    """Smallest integer above ``14 C``."""
    return math.floor(14 * C) + 1


def build_projection_table(
    ball: LabeledBall,
    universe: Sequence[Coset],
    weights: dict[int, WeightTable],
    C: float,
    xi: float | None = None,
) -> ProjectionTable:
    n = len(universe)
    values = np.full((n, n, n), np.nan)
    for y, Y in enumerate(universe):
        projs = [None if A == Y else project_set(ball, Y, A) for A in universe]
        wt = weights[Y.lam]
        for a in range(n):
            if projs[a] is None:
                continue
            for b in range(a, n):
                if projs[b] is None:
                    continue
                v = dtilde_diameter(ball.group, wt, projs[a] | projs[b])
                values[y, a, b] = values[y, b, a] = v
    xi = default_xi(C) if xi is None else xi
    return ProjectionTable(list(universe), values, C, xi, [Y.label(ball.group) for Y in universe])


# -- verification --------------------------------------------------------------

@dataclass
class BoundsReport:
    C_initial: float
    C_final: float
    max_point_diameter: float
    max_set_diameter: float
    rounds: int
    violations: list[dict]
    censored: int
    point_samples: int
    set_samples: int

    @property
    def ok(self) -> bool:
        return self.max_point_diameter <= 3 * self.C_final and self.max_set_diameter <= 4 * self.C_final

    def to_dict(self) -> dict:
        return {
            "C_initial": self.C_initial,
            "C_final": self.C_final,
            "max_point_diameter": self.max_point_diameter,
            "max_set_diameter": self.max_set_diameter,
            "rounds": self.rounds,
            "violations": self.violations,
            "censored": self.censored,
            "point_samples": self.point_samples,
            "set_samples": self.set_samples,
            "ok": self.ok,
        }


def verify_projection_bounds(
    ball: LabeledBall,
    universe: Sequence[Coset],
    C: float,
    points: Sequence[GroupElement] | None = None,
    max_rounds: int = 8,
) -> BoundsReport:
    """Compare observed ``d̂``-diameters of projections with ``3C`` and ``4C``.

    ``points`` defaults to the members of the universe cosets.  A violation
    against the working ``C`` raises ``C`` to the smallest value that absorbs
    it and the check is repeated (at most ``max_rounds`` times).
    """
    group = ball.group
    if points is None:
        points = sorted({g for A in universe for g in coset_members(ball, A)[0]}, key=group.sort_key)
    censored = 0
    point_diams: list[tuple[float, Coset, GroupElement]] = []
    for Y in universe:
        for a in points:
            try:
                p = project_point(ball, Y, a)
            except CensoredResultError:
                censored += 1
                continue
            point_diams.append((dhat_diameter(ball, Y.lam, p), Y, a))
    set_diams: list[tuple[float, Coset, Coset]] = []
    for Y in universe:
        for A in universe:
            if A == Y:
                continue
            try:
                p = project_set(ball, Y, A)
            except CensoredResultError:
                censored += 1
                continue
            set_diams.append((dhat_diameter(ball, Y.lam, p), Y, A))
    max_pt = max((d for d, *_ in point_diams), default=0.0)
    max_set = max((d for d, *_ in set_diams), default=0.0)

    current, rounds, violations = C, 0, []
    while rounds < max_rounds:
        rounds += 1
        bad = [
            {"kind": "point", "diameter": d, "Y": Y.label(group), "a": group.format(a), "C": current}
            for d, Y, a in point_diams if d > 3 * current
        ] + [
            {"kind": "set", "diameter": d, "Y": Y.label(group), "A": A.label(group), "C": current}
            for d, Y, A in set_diams if d > 4 * current
        ]
        if not bad:
            break
        violations.extend(bad[:20])
        current = max(current, max_pt / 3, max_set / 4)
        log.info("projection bounds: raising C estimate to %s", current)
    return BoundsReport(C, current, max_pt, max_set, rounds, violations, censored, len(point_diams), len(set_diams))


@dataclass
class AxiomReport:
    xi: float
    a1_failures: list[tuple]
    a2_failures: list[tuple]
    a3_failures: list[tuple]
    a4_max_count: int
    a4_witness: tuple | None
    triples_checked: int

    @property
    def ok(self) -> bool:
        return not (self.a1_failures or self.a2_failures or self.a3_failures)

    def to_dict(self) -> dict:
        return {
            "xi": self.xi,
            "A1": {"pass": not self.a1_failures, "witnesses": [list(w) for w in self.a1_failures[:10]]},
            "A2": {"pass": not self.a2_failures, "witnesses": [list(w) for w in self.a2_failures[:10]]},
            "A3": {"pass": not self.a3_failures, "witnesses": [list(w) for w in self.a3_failures[:10]]},
            "A4": {"max_count": self.a4_max_count, "witness": list(self.a4_witness) if self.a4_witness else None},
            "triples_checked": self.triples_checked,
        }


def a4_count(table: ProjectionTable, xi: float) -> tuple[int, tuple | None]:
    """``max_{A,B} #{Y : d^π_Y(A, B) >= ξ}`` with a maximizing pair."""
    with np.errstate(invalid="ignore"):
        counts = (table.values >= xi).sum(axis=0)
    idx = np.unravel_index(int(np.argmax(counts)), counts.shape)
    best = int(counts[idx])
    return best, (table.labels[idx[0]], table.labels[idx[1]]) if best else None


def check_axioms(table: ProjectionTable, xi: float | None = None, limit: int = 50) -> AxiomReport:
    """A1 and A2 on all triples, A3 on ordered triples of distinct cosets, A4 as
    the maximal count.  Failures carry index witnesses (at most ``limit``)."""
    xi = table.xi if xi is None else xi
    D = table.values
    n = table.size
    L = table.labels
    valid = ~np.isnan(D)

    a1 = []
    asym = valid & (D != np.transpose(D, (0, 2, 1)))
    for y, a, b in zip(*np.nonzero(asym)):
        if a < b:
            a1.append((L[y], L[a], L[b]))
            if len(a1) >= limit:
                break

    a2 = []
    for y in range(n):
        M = D[y]
        # M[a, c] <= M[a, b] + M[b, c] for all a, b, c != y
        rhs = M[:, :, None] + M[None, :, :]  # rhs[a, b, c]
        lhs = M[:, None, :]
        with np.errstate(invalid="ignore"):
            bad = lhs > rhs + 1e-9
        for a, b, c in zip(*np.nonzero(bad)):
            a2.append((L[y], L[a], L[b], L[int(c)]))
            if len(a2) >= limit:
                break

    a3 = []
    for y, a, b in itertools.permutations(range(n), 3):
        if min(D[y, a, b], D[b, a, y]) >= xi:
            a3.append((L[y], L[a], L[b]))
            if len(a3) >= limit:
                break

    count, witness = a4_count(table, xi)
    return AxiomReport(xi, a1, a2, a3, count, witness, int(valid.sum()))


def check_equivariance(
    ball: LabeledBall, g: Sequence, Y: Coset, a: Sequence
) -> bool | None:
    """``proj_{gY}(ga) == g · proj_Y(a)``; None when either side is censored."""
    group = ball.group
    ga = group.multiply(g, a)
    if ga not in ball:
        return None
    try:
        left = project_point(ball, Y.translate(group, g), ga)
        right = project_point(ball, Y, a)
    except (CensoredResultError, DomainError):
        return None
    return left == frozenset(group.multiply(g, y) for y in right)
