from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasitree.fixtures import FIXTURES, UnknownFixture, get_fixture
from quasitree.groups import AlphabetError, Factor, Group, GroupError, GroupSpec, Letter


def stack_reduce(word, orders, commuting):
    """Independent oracle: reduce a list of (factor, exponent) letters.

    Free products cancel adjacent syllables with a stack; direct products just
    add exponents per factor.
    """
    if commuting:
        acc = {}
        for f, e in word:
            acc[f] = acc.get(f, 0) + e
        out = []
        for f in sorted(acc):
            e = acc[f] % orders[f] if orders[f] else acc[f]
            if e:
                out.append((f, e))
        return tuple(out)
    stack = []
    for f, e in word:
        if stack and stack[-1][0] == f:
            e += stack.pop()[1]
        if orders[f]:
            e %= orders[f]
        if e:
            stack.append((f, e))
    return tuple(stack)


def words(n_factors):
    return st.lists(st.tuples(st.integers(0, n_factors - 1), st.integers(-6, 6).filter(bool)), max_size=12)


GROUPS = {name: Group(spec) for name, spec in FIXTURES.items()}


def _build(group, word):
    return group.product(group._syllable(f, e) for f, e in word)


class TestNormalForm:
    def test_order_relation(self, free):
        assert free.normal_form("a^5") == free.identity

    def test_cancellation(self, free):
        assert free.normal_form("a t t^-1 a") == free.normal_form("a^2")

    def test_free_group_reduction(self):
        g = GROUPS["free-group-f2"]
        assert g.normal_form("a t t^-1 a^-1 t") == g.normal_form("t")
        assert g.letter_length(g.normal_form("a^2 t^-3")) == 5

    def test_direct_product_commutes(self, direct):
        assert direct.normal_form("a x") == direct.normal_form("x a")
        assert direct.normal_form("a x a^4 x^-1") == direct.identity

    def test_relative_letter_image(self):
        g = GROUPS["free-product-c5-z-extra"]
        assert g.normal_form("s^2") == g.normal_form("a^2")

    def test_unknown_letter(self, free):
        with pytest.raises(AlphabetError):
            free.normal_form("a q")

    def test_format_round_trip(self, free):
        g = free.normal_form("a^2 t^-1 a")
        assert free.normal_form(free.format(g)) == g
        assert free.format(free.identity) == "1"

    def test_letter_length_uses_short_exponent(self, free):
        assert free.letter_length(free.normal_form("a^4")) == 1

    def test_shortlex_order(self, free):
        elems = [free.normal_form(w) for w in ["t", "a", "1", "a^2", "t a"]]
        ordered = free.sorted(elems)
        assert ordered[0] == free.identity
        assert [free.letter_length(x) for x in ordered] == [0, 1, 1, 2, 2]


@pytest.mark.parametrize("name", sorted(FIXTURES))
@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_group_axioms(name, data):
    g = GROUPS[name]
    n = len(g.spec.factors)
    orders = [f.order for f in g.spec.factors]
    commuting = g.spec.family == "direct-product-with-Z"
    w1, w2, w3 = (data.draw(words(n)) for _ in range(3))
    a, b, c = (_build(g, w) for w in (w1, w2, w3))
    assert tuple(a) == stack_reduce(w1, orders, commuting)
    assert tuple(g.multiply(a, b)) == stack_reduce(w1 + w2, orders, commuting)
    assert g.multiply(g.multiply(a, b), c) == g.multiply(a, g.multiply(b, c))
    assert g.multiply(a, g.inverse(a)) == g.identity
    assert g.multiply(g.inverse(a), a) == g.identity
    assert g.multiply(a, g.identity) == a == g.multiply(g.identity, a)
    assert g.is_normal_form(a)


class TestSubgroups:
    def test_subgroup_elements_finite(self, free):
        assert len(free.subgroup_elements(1)) == 5

    def test_subgroup_elements_truncated(self):
        g = Group(get_fixture("direct-product-z-z"), hcap=3)
        assert len(g.subgroup_elements(1)) == 7
        assert g.is_truncated_boundary(g.normal_form("a^3"), 1)

    def test_coset_rep(self, free, direct):
        assert free.coset_rep(free.normal_form("t a^2"), 1) == free.normal_form("t")
        assert direct.coset_rep(direct.normal_form("a x^2"), 1) == direct.normal_form("x^2")

    def test_double_coset_key(self, free):
        g = free.normal_form("a t a^2")
        assert free.double_coset_key(g, 1, 1) == free.normal_form("t")

    def test_alphabet_provenance(self, free):
        letters = free.alphabet()
        assert {x.provenance for x in letters} == {"relative", 1}
        assert free.letter_provenance("t^-1") == "relative"
        assert free.letter_provenance("a^2[H1]") == 1
        with pytest.raises(AlphabetError):
            free.letter_provenance("q")
        assert Letter("a", free.normal_form("a"), 1).label == "a[H1]"


class TestSpecValidation:
    def test_bad_family(self):
        with pytest.raises(GroupError):
            GroupSpec("semi-direct", (Factor("a", 5),))

    def test_bad_order(self):
        with pytest.raises(GroupError):
            GroupSpec("free-product", (Factor("a", 1), Factor("t")))

    def test_bad_subgroup_index(self):
        with pytest.raises(GroupError):
            GroupSpec("free-product", (Factor("a", 5), Factor("t")), subgroups=(3,))

    def test_free_group_requires_infinite(self):
        with pytest.raises(GroupError):
            GroupSpec("free-group", (Factor("a", 3),))

    def test_from_dict_round_trip(self):
        spec = get_fixture("free-product-c5-z")
        again = GroupSpec.from_dict(spec.to_dict())
        assert again == spec

    def test_unknown_fixture(self):
        with pytest.raises(UnknownFixture) as exc:
            get_fixture("nope")
        assert "free-product-c5-z" in str(exc.value)
