from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasitree.cayley import (
    BallSizeError,
    CensoredDistance,
    CensoredResultError,
    DomainError,
    build_ball,
    decompose,
    distance,
    geodesics,
    path_from_word,
)


def free_product_count(radius: int, order: int = 5) -> int:
    """Independent count of C_order * Z elements of Z⊔H-length <= radius.

    A normal form alternates H-syllables (order - 1 choices, cost 1) with
    t-syllables (two choices for each cost k >= 1).
    """
    # ends[c][kind]: number of normal forms of cost c ending with a syllable of kind (0 = H, 1 = t)
    ends = [[0, 0] for _ in range(radius + 1)]
    for c in range(1, radius + 1):
        ends[c][0] = (order - 1) * ((1 if c == 1 else 0) + ends[c - 1][1])
        total = 0
        for k in range(1, c + 1):
            prev = 1 if c == k else ends[c - k][0]
            total += 2 * prev
        ends[c][1] = total
    return 1 + sum(e[0] + e[1] for e in ends)


class TestBallSize:
    @pytest.mark.parametrize("radius", [4, 6, 8])
    def test_direct_product(self, direct, radius):
        assert build_ball(direct, radius).n_vertices == 5 * (2 * radius - 1) + 2

    @pytest.mark.parametrize("radius", [1, 2, 4, 6])
    def test_free_product(self, free, radius):
        assert build_ball(free, radius).n_vertices == free_product_count(radius)

    def test_radius_zero(self, free):
        ball = build_ball(free, 0)
        assert ball.n_vertices == 1 and ball.n_edges == 0

    def test_negative_radius(self, free):
        with pytest.raises(DomainError):
            build_ball(free, -1)

    def test_vertex_cap(self, free):
        with pytest.raises(BallSizeError):
            build_ball(free, 8, vertex_cap=100)

    def test_parallel_edges_from_extra_letter(self):
        from quasitree.fixtures import get_fixture
        from quasitree.groups import Group

        g = Group(get_fixture("free-product-c5-z-extra"))
        ball = build_ball(g, 1)
        a = ball.vid(g.normal_form("a"))
        assert sum(1 for j, _ in ball.adjacency[0] if j == a) == 2


class TestDistance:
    def test_example(self, direct, direct_ball6):
        assert distance(direct_ball6, direct.identity, direct.normal_form("a^2 x^3")) == CensoredDistance.exact(4)

    def test_same_vertex(self, free, free_ball6):
        u = free.normal_form("t a")
        assert distance(free_ball6, u, u) == CensoredDistance.exact(0)

    def test_boundary_pair_is_censored(self, free):
        ball = build_ball(free, 3)
        u, v = free.normal_form("t^3"), free.normal_form("t^-3")
        d = distance(ball, u, v)
        assert d.kind == "lower" and d.value <= ball.escape_bound(u, v)

    def test_outside_ball(self, free):
        ball = build_ball(free, 2)
        with pytest.raises(DomainError):
            distance(ball, free.identity, free.normal_form("t^5"))

    def test_string_forms(self):
        assert str(CensoredDistance.exact(3)) == "Exact(3)"
        assert str(CensoredDistance.lower(3)) == "LowerBound(3)"
        assert str(CensoredDistance.infinite()) == "CertifiedInfinite"

    @settings(max_examples=40, deadline=None)
    @given(i=st.integers(0, 10**6), j=st.integers(0, 10**6))
    def test_certified_values_agree_with_larger_ball(self, free, i, j):
        small, big = _big(free)
        core = small.elements
        u, v = core[i % len(core)], core[j % len(core)]
        ds, db = distance(small, u, v), distance(big, u, v)
        assert db.is_exact
        if ds.is_exact:
            assert ds.value == db.value
        else:
            assert ds.value <= db.value


_BIG = {}


def _big(group):
    key = group.spec.name
    if key not in _BIG:
        _BIG[key] = (build_ball(group, 4), build_ball(group, 8))
    return _BIG[key]


class TestGeodesics:
    def test_geodesic_lengths(self, direct, direct_ball6):
        target = direct.normal_form("a^2 x^3")
        paths = geodesics(direct_ball6, direct.identity, target, limit=50)
        assert paths and all(len(p) == 4 for p in paths)
        assert all(p.vertices[-1] == target for p in paths)
        # the H-letter can sit at any of the 4 positions along x^3
        assert len(paths) == 4

    def test_censored_geodesic(self, free):
        ball = build_ball(free, 3)
        with pytest.raises(CensoredResultError) as exc:
            geodesics(ball, free.normal_form("t^3"), free.normal_form("t^-3"))
        assert exc.value.partial is not None

    def test_no_double_h_component(self, free, free_ball6):
        for p in geodesics(free_ball6, free.identity, free.normal_form("a t a^2 t^-1 a^3"), limit=20):
            for x, y in zip(p.letters, p.letters[1:]):
                assert not (x.subgroup and y.subgroup)


class TestDecompose:
    def _letter(self, ball, name):
        return next(x for x in ball.alphabet if x.label == name)

    def test_isolated_components(self, free, free_ball6):
        t, a = self._letter(free_ball6, "t"), self._letter(free_ball6, "a[H1]")
        path = path_from_word(free, free.identity, [a, t, a])
        dec = decompose(free, path, 1)
        assert len(dec.components) == 2 and len(dec.isolated()) == 2

    def test_connected_components(self, free, free_ball6):
        t, ti = self._letter(free_ball6, "t"), self._letter(free_ball6, "t^-1")
        a = self._letter(free_ball6, "a[H1]")
        # a t t^-1 a: both a-edges lie in the coset H
        path = path_from_word(free, free.identity, [a, t, ti, a])
        dec = decompose(free, path, 1)
        assert len(dec.components) == 2 and not dec.isolated()

    def test_closed_path_merges_wraparound(self, direct):
        ball = build_ball(direct, 2)
        a = next(x for x in ball.alphabet if x.label == "a[H1]")
        a4 = next(x for x in ball.alphabet if x.label == "a^4[H1]")
        x = next(y for y in ball.alphabet if y.label == "x")
        xi = next(y for y in ball.alphabet if y.label == "x^-1")
        # a x a^4 x^-1 is a loop; the two H-runs lie in different cosets
        path = path_from_word(direct, direct.identity, [a, x, a4, xi])
        assert path.closed
        dec = decompose(direct, path, 1)
        assert len(dec.components) == 2 and len(dec.isolated()) == 2
