from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasitree.cayley import CensoredDistance, DomainError, build_ball, distance, geodesics
from quasitree.fixtures import get_fixture
from quasitree.groups import Factor, Group, GroupSpec
from quasitree.relmetric import (
    PolygonSample,
    estimate_C,
    modified_metric,
    properness_profile,
    rel_distance,
    rel_from_identity,
)


def admissible_bfs(group, lam, h, k, radius):
    """Oracle: BFS over the whole ball, recomputed from scratch, skipping
    H-letter edges that join two elements of H."""
    from collections import deque

    letters = group.alphabet()
    dist = {h: 0}
    q = deque([h])
    while q:
        u = q.popleft()
        for x in letters:
            v = group.multiply(u, x.element)
            if v in dist or group.letter_length(v) > 10 * radius:
                continue
            if x.subgroup == lam and group.in_subgroup(u, lam) and group.in_subgroup(v, lam):
                continue
            dist[v] = dist[u] + 1
            if v == k:
                return dist[v]
            if dist[v] < radius:
                q.append(v)
    return None


class TestRelDistance:
    def test_same_point(self, free, free_ball6):
        a = free.normal_form("a")
        assert rel_distance(free_ball6, 1, a, a) == CensoredDistance.exact(0)

    def test_direct_product_is_three(self, direct, direct_ball6):
        a = direct.normal_form("a")
        assert rel_distance(direct_ball6, 1, direct.identity, a) == CensoredDistance.exact(3)
        assert admissible_bfs(direct, 1, direct.identity, a, 6) == 3

    def test_free_product_lower_bounds_grow(self, free):
        a = free.normal_form("a")
        values = []
        for radius in (4, 6, 8):
            d = rel_distance(build_ball(free, radius), 1, free.identity, a)
            assert d.kind == "lower" and d.value >= radius - 2
            values.append(d.value)
        assert values == sorted(values) and len(set(values)) == 3

    def test_outside_subgroup(self, free, free_ball6):
        with pytest.raises(DomainError):
            rel_distance(free_ball6, 1, free.identity, free.normal_form("t"))

    def test_dominates_ambient(self, direct, direct_ball6):
        for h, d in rel_from_identity(direct_ball6, 1).items():
            assert d.value >= distance(direct_ball6, direct.identity, h).value

    def test_bigon_letter_shortens(self):
        g = Group(get_fixture("direct-product-c5-z-bigon"))
        ball = build_ball(g, 4)
        assert rel_distance(ball, 1, g.identity, g.normal_form("a")) == CensoredDistance.exact(1)


class TestEstimateC:
    def test_floor_without_isolated_components(self, free, free_ball6):
        t = next(x for x in free_ball6.alphabet if x.label == "t")
        from quasitree.cayley import path_from_word

        side = path_from_word(free, free.identity, [t])
        back = side.reversed(free)
        est = estimate_C(free_ball6, [[side, back]])
        assert est.value == 1.0 and est.isolated_components == 0

    def test_no_polygons_warns(self, free_ball6):
        est = estimate_C(free_ball6, [])
        assert est.value == 1.0 and est.warning

    def test_direct_product_square_bigon(self, direct, direct_ball6):
        # exhaustive oracle over all bigons 1 -> g with |g| <= 3 and all their geodesic pairs
        best = 1.0
        polygons = []
        for g in direct_ball6.core(3):
            if not g:
                continue
            paths = geodesics(direct_ball6, direct.identity, g, limit=64)
            for p, q in itertools.product(paths, repeat=2):
                polygons.append([p, q.reversed(direct)])
        est = estimate_C(direct_ball6, polygons)
        for sides in polygons:
            from quasitree.cayley import decompose

            loop = sides[0] + sides[1]
            for c in decompose(direct, loop, closed=True).isolated():
                d = rel_distance(direct_ball6, 1, direct.identity, direct.multiply(direct.inverse(c.first), c.last))
                best = max(best, d.value / 2)
        assert est.value == best >= 1.5

    def test_random_sample_reports_size(self, free_ball6):
        est = estimate_C(free_ball6, PolygonSample(n_polygons=30, seed=1))
        assert est.sample_size > 0 and est.value >= 1.0
        assert set(est.to_dict()) >= {"value", "sample_size", "warning"}


def c4_group():
    return Group(GroupSpec("free-product", (Factor("a", 4), Factor("t")), subgroups=(1,), relative=(("t", "t"),)))


def word_search_dw(weights, group, target, max_len):
    """Oracle: cheapest word of length <= max_len in the weighted alphabet."""
    best = 0 if not target else None
    letters = [h for h in weights if h]
    for n in range(1, max_len + 1):
        for word in itertools.product(letters, repeat=n):
            if group.product(word) == target:
                cost = sum(weights[h] for h in word)
                best = cost if best is None else min(best, cost)
    return best


class TestModifiedMetric:
    def test_c4_example(self):
        g = c4_group()
        a, a2 = g.normal_form("a"), g.normal_form("a^2")
        wt = modified_metric(g, 1, [a, a2], lambda h: CensoredDistance.infinite())
        assert wt.exhaustion(1) == {g.identity, a, g.normal_form("a^3")}
        assert wt.weight(a) == 1 and wt.weight(a2) == 2
        assert wt.d(g.identity, a2) == 2 == word_search_dw(wt.weights, g, a2, 2)

    def test_empty_enumeration(self):
        g = c4_group()
        with pytest.raises(DomainError):
            modified_metric(g, 1, [], lambda h: None)

    def test_incomplete_enumeration(self):
        g = c4_group()
        with pytest.raises(DomainError):
            modified_metric(g, 1, [g.normal_form("a")], lambda h: None)

    def test_direct_product_bounded_by_rel(self, direct, direct_ball6):
        rel = rel_from_identity(direct_ball6, 1)
        wt = modified_metric(direct, 1, None, rel)
        assert wt.h0 == frozenset(direct.subgroup_elements(1))
        a = direct.normal_form("a")
        assert wt.d(direct.identity, a) <= 3

    def test_weights_symmetric_and_positive(self, free, free_ball6):
        wt = modified_metric(free, 1, None, rel_from_identity(free_ball6, 1))
        assert wt.weight(free.identity) == 0
        for h in wt.elements:
            assert wt.weight(h) == wt.weight(free.inverse(h))
            if h:
                assert wt.weight(h) >= 1


F2 = Group(get_fixture("free-group-f2"), hcap=4)
F2_BALL = build_ball(F2, 5)
F2_WT = modified_metric(F2, 1, None, rel_from_identity(F2_BALL, 1))
F2_H = F2.subgroup_elements(1)


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(F2_H), st.sampled_from(F2_H), st.sampled_from(F2_H))
def test_dw_is_a_metric(x, y, z):
    d = F2_WT.d
    assert d(x, x) == 0
    assert d(x, y) == d(y, x)
    assert (d(x, y) == 0) == (x == y)
    assert d(x, z) <= d(x, y) + d(y, z)


@pytest.mark.parametrize("fixture", ["direct-product-c5-z", "free-product-c5-z", "direct-product-c5-z-bigon"])
def test_dw_below_weight_and_rel(fixture):
    g = Group(get_fixture(fixture))
    ball = build_ball(g, 5)
    rel = rel_from_identity(ball, 1)
    wt = modified_metric(g, 1, None, rel)
    for h in wt.elements:
        assert wt.norm(h) <= wt.weight(h)
        if rel[h].is_exact:
            assert wt.norm(h) <= rel[h].value
    for h, k in itertools.product(wt.elements, repeat=2):
        r = rel_distance(ball, 1, h, k)
        if r.is_exact:
            assert wt.d(h, k) <= r.value


class TestProfile:
    def test_radius_zero(self):
        rows = properness_profile(F2_WT.norm, [0], F2_H)
        assert rows[0].count == 1

    def test_free_group_linear_growth(self):
        rows = properness_profile(F2_WT.norm, [1, 2, 3], F2_H, F2, 1)
        assert [r.count for r in rows] == [3, 5, 7]
        assert not any(r.truncated for r in rows)
        assert properness_profile(F2_WT.norm, [4], F2_H, F2, 1)[0].truncated

    def test_free_product_rel_radius_one(self, free, free_ball6):
        rel = rel_from_identity(free_ball6, 1)
        rows = properness_profile(rel.__getitem__, [0, 1], free.subgroup_elements(1))
        assert [r.count for r in rows] == [1, 1]

    def test_monotone(self, free, free_ball6):
        wt = modified_metric(free, 1, None, rel_from_identity(free_ball6, 1))
        counts = [r.count for r in properness_profile(wt.norm, range(6), wt.elements)]
        assert counts == sorted(counts) and counts[-1] == 5
