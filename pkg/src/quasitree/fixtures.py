"""Built-in group fixtures used by the experiments and the test-suite."""

from __future__ import annotations

from .groups import Factor, GroupSpec

FIXTURES: dict[str, GroupSpec] = {
    # H * Z with H = C5: H is hyperbolically embedded, relative metric infinite.
    "free-product-c5-z": GroupSpec(
        family="free-product",
        factors=(Factor("a", 5), Factor("t")),
        subgroups=(1,),
        relative=(("t", "t"),),
        name="free-product-c5-z",
    ),
    # Same group with an extra relative letter s representing a in H.
    "free-product-c5-z-extra": GroupSpec(
        family="free-product",
        factors=(Factor("a", 5), Factor("t")),
        subgroups=(1,),
        relative=(("t", "t"), ("s", "a")),
        name="free-product-c5-z-extra",
    ),
    # H x Z with H = C5: relative distances bounded by 3.
    "direct-product-c5-z": GroupSpec(
        family="direct-product-with-Z",
        factors=(Factor("a", 5), Factor("x")),
        subgroups=(1,),
        relative=(("x", "x"),),
        name="direct-product-c5-z",
    ),
    # H x Z with a relative letter z representing a: produces bigons 1 - a.
    "direct-product-c5-z-bigon": GroupSpec(
        family="direct-product-with-Z",
        factors=(Factor("a", 5), Factor("x")),
        subgroups=(1,),
        relative=(("x", "x"), ("z", "a")),
        name="direct-product-c5-z-bigon",
    ),
    # <a> x <x> with H = <a> infinite (truncated): the non-embedded contrast.
    "direct-product-z-z": GroupSpec(
        family="direct-product-with-Z",
        factors=(Factor("a"), Factor("x")),
        subgroups=(1,),
        relative=(("x", "x"),),
        name="direct-product-z-z",
    ),
    # F2 = <a, t> with H = <a> (truncated); the K = <a, t^2> scenario lives here.
    "free-group-f2": GroupSpec(
        family="free-group",
        factors=(Factor("a"), Factor("t")),
        subgroups=(1,),
        relative=(("t", "t"),),
        name="free-group-f2",
    ),
}


class UnknownFixture(KeyError):
    def __str__(self) -> str:
        return f"unknown fixture {self.args[0]!r}; valid fixtures: {', '.join(sorted(FIXTURES))}"


def get_fixture(name: str) -> GroupSpec:
    try:
        return FIXTURES[name]
    except KeyError:
        raise UnknownFixture(name) from None
