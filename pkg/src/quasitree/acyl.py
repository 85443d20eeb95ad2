"""Empirical acylindricity profile of the left action on a Cayley ball.

For pairs ``x, y`` with ``d(x, y) >= R`` we count the group elements ``g`` of
bounded length (in the factor generators) with ``d(x, gx) <= ε`` and
``d(y, gy) <= ε``.  Acylindrical actions keep this count bounded; a count that
keeps growing with the search radius is the opposite signal.
"""

from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass, field
from typing import Sequence

from .cayley import CensoredDistance, DomainError, LabeledBall, distance
from .groups import Group, GroupElement


def search_set(group: Group, cap: int) -> list[GroupElement]:
    """All elements of length ``<= cap`` in the factor generators, shortlex-sorted."""
    gens = []
    for f, factor in enumerate(group.spec.factors):
        gens.append(group._syllable(f, 1))
        gens.append(group.inverse(group._syllable(f, 1)))
    seen = {group.identity}
    frontier = [group.identity]
    for _ in range(cap):
        nxt = []
        for u in frontier:
            for s in gens:
                v = group.multiply(u, s)
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        frontier = nxt
    return group.sorted(seen)


@dataclass(frozen=True)
class PairSample:
    x: GroupElement
    y: GroupElement
    d: int
    count: int
    censored: bool


@dataclass
class AcylProfile:
    epsilon: int
    R: int
    g_cap: int
    samples: list[PairSample] = field(default_factory=list)
    search_size: int = 0

    @property
    def max_count(self) -> int:
        return max((s.count for s in self.samples), default=0)

    @property
    def censored(self) -> int:
        return sum(s.censored for s in self.samples)

    def to_dict(self, group: Group) -> dict:
        return {
            "epsilon": self.epsilon,
            "R": self.R,
            "g_cap": self.g_cap,
            "search_size": self.search_size,
            "max_count": self.max_count,
            "censored_pairs": self.censored,
            "pairs": [
                {"x": group.format(s.x), "y": group.format(s.y), "d": s.d, "count": s.count, "censored": s.censored}
                for s in self.samples
            ],
        }

    def to_csv(self, group: Group) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epsilon", "R", "g_cap", "x", "y", "d", "count", "censored"])
        for s in self.samples:
            w.writerow([self.epsilon, self.R, self.g_cap, group.format(s.x), group.format(s.y), s.d, s.count, int(s.censored)])
        return buf.getvalue()


def candidate_pairs(ball: LabeledBall, n: int, core_radius: int | None = None, seed: int = 0) -> list[tuple]:
    """A seeded list of candidate pairs from the core of the ball; filtering by
    ``R`` happens later, so one candidate list serves every ``R``."""
    core = ball.core(ball.radius // 2 if core_radius is None else core_radius)
    rng = random.Random(seed)
    return [(rng.choice(core), rng.choice(core)) for _ in range(n)]


def _displacement_ok(ball: LabeledBall, dist_row, p: GroupElement, gp: GroupElement, eps: int) -> tuple[bool, bool]:
    """(qualifies, censored) for ``d(p, gp) <= eps``."""
    j = ball.index.get(gp)
    lp = ball.word_length(p)
    if j is None:
        # gp lies outside the ball: d(p, gp) >= R + 1 - |p|
        return False, ball.radius + 1 - lp <= eps
    d = int(dist_row[j])
    bound = (ball.radius - lp) + (ball.radius - int(ball.length[j]))
    if 0 <= d <= bound:
        return d <= eps, False
    lower = bound if d < 0 else min(d, bound)
    return False, lower <= eps


def acylindricity_profile(
    ball: LabeledBall,
    epsilon: int,
    R: int,
    g_cap: int,
    pairs: Sequence[tuple] | None = None,
    n_pairs: int = 40,
    seed: int = 0,
    elements: Sequence[GroupElement] | None = None,
) -> AcylProfile:
    """Count ``#{g : |g| <= g_cap, d(x, gx) <= ε, d(y, gy) <= ε}`` per pair.

    Pairs (given, or seeded candidates from the core) are kept when
    ``d(x, y)`` is exact and at least ``R``.  ``elements`` replaces the search
    set of elements of length at most ``g_cap``.
    """
    if g_cap < 1:
        raise DomainError("g_cap must be at least 1")
    group = ball.group
    if pairs is None:
        pairs = candidate_pairs(ball, n_pairs, seed=seed)
    valid = []
    for x, y in pairs:
        if x not in ball or y not in ball:
            continue
        d: CensoredDistance = distance(ball, x, y)
        if d.is_exact and d.value >= R:
            valid.append((x, y, d.value))
    if not valid:
        raise DomainError(f"no pair with exact distance >= {R} in a ball of radius {ball.radius}; use a larger ball")
    gs = search_set(group, g_cap) if elements is None else list(elements)
    profile = AcylProfile(epsilon, R, g_cap, search_size=len(gs))
    mul = group.multiply
    for x, y, dxy in valid:
        rx, ry = ball.bfs(ball.vid(x)), ball.bfs(ball.vid(y))
        count, censored = 0, False
        for g in gs:
            okx, cx = _displacement_ok(ball, rx, x, mul(g, x), epsilon)
            if not okx:
                censored |= cx
                continue
            oky, cy = _displacement_ok(ball, ry, y, mul(g, y), epsilon)
            if oky:
                count += 1
            censored |= cy
        profile.samples.append(PairSample(x, y, dxy, count, censored))
    return profile
