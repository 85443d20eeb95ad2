from __future__ import annotations

import pytest

from quasitree.cayley import build_ball
from quasitree.fixtures import get_fixture
from quasitree.groups import Group
from quasitree.projcomplex import (
    GeneratingSet,
    ParameterError,
    build_ball_over,
    build_complex,
    check_generation,
    complete_generating_set,
    construct_generating_set,
    default_alpha,
    default_J,
    enumerate_cosets,
    rho,
    verify_alpha_bound,
    verify_embedding_bounds,
    z_cap_k,
)
from quasitree.projection import Coset, build_projection_table, default_xi
from quasitree.relmetric import estimate_C, modified_metric, rel_from_identity


def setup(name, radius=6):
    group = Group(get_fixture(name))
    ball = build_ball(group, radius)
    weights = {1: modified_metric(group, 1, None, rel_from_identity(ball, 1))}
    C = estimate_C(ball).value
    xi = default_xi(C)
    universe = enumerate_cosets(ball)
    table = build_projection_table(ball, universe, weights, C, xi)
    cx = build_complex(table)
    return group, ball, weights, C, xi, table, cx


@pytest.fixture(scope="module")
def free_setup():
    return setup("free-product-c5-z")


class TestParameters:
    def test_defaults(self):
        assert default_J(1.0, 15) == 45
        assert default_alpha(45, 15, 1.0) == 75
        assert default_alpha(1, 0, 2.0) == 12


class TestEnumerateCosets:
    def test_radius_zero(self, free):
        assert enumerate_cosets(build_ball(free, 0)) == [Coset(1, free.identity)]

    def test_free_product_count(self, free, free_ball6):
        # reps of length <= 2 ending in a t-syllable: t^±1, t^±2, a^k t^±1 (k = 1..4), plus H
        cosets = enumerate_cosets(free_ball6, core_radius=2)
        assert len(cosets) == 1 + 2 + 2 + 8
        assert cosets[0] == Coset(1, free.identity)
        assert Coset(1, free.normal_form("a^3 t^-1")) in cosets

    def test_subgroup_k(self):
        g = Group(get_fixture("free-group-f2"), hcap=4)
        ball = build_ball(g, 6)
        K = [g.normal_form("a"), g.normal_form("t^2")]
        cosets = enumerate_cosets(ball, K, core_radius=2)
        assert Coset.of(g, g.normal_form("t"), 1) not in cosets
        assert Coset.of(g, g.normal_form("t^2"), 1) in cosets


class TestComplex:
    def test_single_vertex(self, free, free_setup):
        table = free_setup[5]
        one = build_projection_table(free_setup[1], [Coset(1, free.identity)], free_setup[2], table.C)
        cx = build_complex(one)
        assert cx.n_vertices == 1 and not cx.edges and cx.connected

    def test_h_adjacent_to_th(self, free, free_setup):
        cx = free_setup[6]
        assert cx.connected
        assert cx.adjacent(Coset(1, free.identity), Coset(1, free.normal_form("t")))
        assert cx.strict_edges <= cx.edges <= cx.lenient_edges

    def test_zero_threshold(self, free_setup):
        table = free_setup[5]
        cx = build_complex(table, J=0, xi=0)
        assert isinstance(cx.connected, bool)
        assert cx.to_dict()["J"] == 0

    def test_sigma_diameter_disconnected(self, free, free_setup):
        group, ball, weights = free_setup[:3]
        table = build_projection_table(ball, [Coset(1, group.identity)], weights, 1.0)
        cx = build_complex(table)
        assert cx.sigma_diameter(group) == 0
        # a universe without the identity coset cannot support diam(Σ)
        cx2 = build_complex(build_projection_table(ball, [Coset(1, group.normal_form("t"))], weights, 1.0))
        with pytest.raises(KeyError):
            cx2.sigma_diameter(group)

    def test_action_maps_edges_to_edges(self, free, free_setup):
        cx = free_setup[6]
        pos = cx.position
        checked = 0
        for g in free_setup[1].core(1):
            for a, b in cx.edges:
                A, B = cx.universe[a].translate(free, g), cx.universe[b].translate(free, g)
                if A in pos and B in pos:
                    checked += 1
                    assert cx.adjacent(A, B)
        assert checked > 0

    def test_disconnected_sigma_raises(self):
        from quasitree.groups import Factor, GroupSpec
        from quasitree.projcomplex import ProjectionComplex, _distances

        group = Group(GroupSpec("free-product", (Factor("a", 5), Factor("b", 3), Factor("t")), subgroups=(1, 2)))
        sigma = [Coset(1, group.identity), Coset(2, group.identity)]
        cx = ProjectionComplex(sigma, set(), 1, 1, 1, _distances(2, set()))
        assert not cx.connected and cx.dP(*sigma) == -1
        with pytest.raises(ParameterError):
            cx.sigma_diameter(group)


class TestGeneratingSet:
    def test_free_product_x(self, free, free_setup):
        X = construct_generating_set(free_setup[6], free_setup[1])
        t = free.normal_form("t")
        assert t in X and free.inverse(t) in X
        assert X.is_symmetric(free) and X.avoids_subgroups(free)
        assert free.identity not in X
        assert set(X.elements) == {free.normal_form(w) for w in ("t", "t^-1", "t^2", "t^-2")}
        assert X.adjacency_checked > 0

    def test_completion_no_additions(self, free, free_setup):
        group, ball, weights = free_setup[:3]
        X = construct_generating_set(free_setup[6], ball)
        Xc, rep = complete_generating_set(X, z_cap_k(group, ball, None), group, weights)
        assert Xc.elements == X.elements and rep.symmetric_difference == 0

    def test_completion_empty(self, free, free_setup):
        X = construct_generating_set(free_setup[6], free_setup[1])
        Xc, rep = complete_generating_set(X, [], free, free_setup[2])
        assert Xc.elements == X.elements and not rep.added_h

    def test_completion_extra_letter(self):
        group, ball, weights, C, xi, table, cx = setup("free-product-c5-z-extra")
        X = construct_generating_set(cx, ball)
        Xc, rep = complete_generating_set(X, z_cap_k(group, ball, None), group, weights, cx.J, C, xi)
        assert {group.format(x) for x in rep.added_h} == {"a", "a^4"}
        assert not rep.added_other
        assert rep.rho == rho(weights) == 3
        assert len(rep.added_h) <= rep.rho
        assert Xc.is_symmetric(group)
        assert rep.to_dict(group)["within_rho"]

    def test_low_j_flagged(self, free, free_setup):
        X = construct_generating_set(free_setup[6], free_setup[1])
        _, rep = complete_generating_set(X, [], free, free_setup[2], J=1, C=1.0, xi=15)
        assert not rep.J_ok


class TestEmbedding:
    def test_identity_and_subgroup(self, free, free_setup):
        group, ball, weights, C, xi, table, cx = free_setup
        X = construct_generating_set(cx, ball)
        ball_x = build_ball_over(group, X, 3)
        rep = verify_embedding_bounds(cx, ball_x, [group.identity, group.normal_form("a")])
        assert rep.ok and rep.checked == 2
        assert [(m["length"], m["dP"]) for m in rep.margins] == [(0, 0), (1, 0)]
        assert rep.multiplicative_failures == 1

    def test_tat(self, free, free_setup):
        group, ball, weights = free_setup[:3]
        tat = group.normal_form("t a t")
        universe = [Coset(1, group.identity), Coset(1, group.normal_form("t")), Coset(1, tat)]
        table = build_projection_table(ball, universe, weights, free_setup[3])
        cx = build_complex(table)
        X = construct_generating_set(cx, ball)
        ball_x = build_ball_over(group, X, 4)
        rep = verify_embedding_bounds(cx, ball_x, [tat])
        row = rep.margins[0]
        # every pair is adjacent in this three-vertex complex, so tat itself is an x_e
        assert tat in X
        assert row["length"] == 1 and row["dP"] == 1 and rep.sigma_diameter == 0
        assert row["dP"] <= (2 * rep.sigma_diameter + 1) * row["length"]
        assert row["length"] <= 3 * row["dP"] + 1
        assert rep.ok

    def test_generation(self, free, free_setup):
        group, ball, weights, C, xi, table, cx = free_setup
        X = construct_generating_set(cx, ball)
        ball_x = build_ball_over(group, X, 4)
        assert check_generation(ball_x, ball.core(2)) == []


class TestAlpha:
    def test_free_product_default_alpha(self, free, free_setup):
        group, ball, weights, C, xi, table, cx = free_setup
        X = construct_generating_set(cx, ball)
        ball_x = build_ball_over(group, X, 4)
        rep = verify_alpha_bound(ball_x, weights, default_alpha(cx.J, xi, C))
        assert rep.ok and rep.checked == 5
        assert any(m["h"] == "1" and m["dtilde"] == 0 for m in rep.margins)

    def test_shrunken_alpha_violation(self, direct, direct_ball6):
        weights = {1: modified_metric(direct, 1, None, rel_from_identity(direct_ball6, 1))}
        x, xa = direct.normal_form("x"), direct.normal_form("x a")
        X = GeneratingSet([x, direct.inverse(x), xa, direct.inverse(xa)])
        ball_x = build_ball_over(direct, X, 4)
        rep = verify_alpha_bound(ball_x, weights, 1)
        witness = next(v for v in rep.violations if v["h"] == "a")
        assert witness["rel_X"] == "Exact(2)" and witness["dtilde"] == 3
        assert verify_alpha_bound(ball_x, weights, 2).ok
