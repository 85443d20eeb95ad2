from __future__ import annotations

import pytest

from quasitree.acyl import acylindricity_profile, candidate_pairs, search_set
from quasitree.cayley import DomainError, build_ball, distance
from quasitree.fixtures import get_fixture
from quasitree.groups import Group


@pytest.fixture(scope="module")
def zz():
    g = Group(get_fixture("direct-product-z-z"), hcap=8)
    return g, build_ball(g, 8)


@pytest.fixture(scope="module")
def free_pairs(free_ball6):
    return candidate_pairs(free_ball6, 30, seed=2)


def test_search_set_size(free, direct):
    # C5 * Z, length <= 1 in the factor generators: 1, a^±1, t^±1
    assert len(search_set(free, 1)) == 5
    # C5 x Z: a^i x^j with min(i, 5 - i) + |j| <= 2
    expected = sum(1 for i in range(5) for j in range(-2, 3) if min(i, 5 - i) + abs(j) <= 2)
    assert len(search_set(direct, 2)) == expected == 13


def test_identity_always_counted(free_ball6, free_pairs):
    prof = acylindricity_profile(free_ball6, 0, 2, 2, pairs=free_pairs)
    assert prof.samples and all(s.count >= 1 for s in prof.samples)
    assert all(s.d >= 2 for s in prof.samples)


def test_monotone_in_epsilon_cap_and_R(free_ball6, free_pairs):
    def counts(eps, R, cap):
        return {(s.x, s.y): s.count for s in acylindricity_profile(free_ball6, eps, R, cap, pairs=free_pairs).samples}

    base = counts(1, 2, 2)
    wider = counts(2, 2, 2)
    longer = counts(1, 2, 3)
    assert all(wider[k] >= v for k, v in base.items())
    assert all(longer[k] >= v for k, v in base.items())
    farther = counts(1, 4, 2)
    assert set(farther) <= set(base)
    assert all(farther[k] == base[k] for k in farther)


def test_equivariance(free, free_ball6):
    x, y = free.identity, free.normal_form("t a t")
    base = acylindricity_profile(free_ball6, 2, 3, 2, pairs=[(x, y)])
    for word in ("a", "t", "a^2 t^-1"):
        h = free.normal_form(word)
        hi = free.inverse(h)
        conj = [free.multiply(free.multiply(h, g), hi) for g in search_set(free, 2)]
        moved = acylindricity_profile(free_ball6, 2, 3, 2, pairs=[(free.multiply(h, x), free.multiply(h, y))],
                                      elements=conj)
        assert moved.samples[0].count == base.samples[0].count


def test_no_valid_pairs(free):
    ball = build_ball(free, 2)
    with pytest.raises(DomainError):
        acylindricity_profile(ball, 1, 10, 2)


def test_g_cap_must_be_positive(free_ball6):
    with pytest.raises(DomainError):
        acylindricity_profile(free_ball6, 1, 1, 0)


def test_contrast(free, zz):
    group, ball = zz
    x, y = group.identity, group.normal_form("x^6")
    assert distance(ball, x, y).value == 6
    zz_counts = [acylindricity_profile(ball, 2, 6, cap, pairs=[(x, y)]).max_count for cap in (2, 4, 6)]
    # abelian: g = a^k x^j moves every point by |g| = |j| + [k != 0] in Z⊔H, and
    # lies in the search set when |k| + |j| <= cap
    oracle = [
        sum(1 for k in range(-cap, cap + 1) for j in range(-cap, cap + 1)
            if abs(k) + abs(j) <= cap and abs(j) + (k != 0) <= 2)
        for cap in (2, 4, 6)
    ]
    assert zz_counts == oracle == [13, 25, 37]
    fb = build_ball(free, 8)
    fx, fy = free.identity, free.normal_form("t^3 a t^3")
    free_counts = [acylindricity_profile(fb, 2, 6, cap, pairs=[(fx, fy)]).max_count for cap in (2, 4, 6)]
    assert len(set(free_counts)) == 1


def test_serialisation(free, free_ball6, free_pairs):
    prof = acylindricity_profile(free_ball6, 1, 2, 2, pairs=free_pairs)
    d = prof.to_dict(free)
    assert d["max_count"] == prof.max_count and len(d["pairs"]) == len(prof.samples)
    lines = prof.to_csv(free).splitlines()
    assert lines[0].startswith("epsilon,R,g_cap") and len(lines) == len(prof.samples) + 1
