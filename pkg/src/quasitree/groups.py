"""Normal forms and the word problem for the built-in group families.

Three families are supported, all built from cyclic factors:

* ``free-product``: a free product of cyclic groups (finite or infinite),
* ``direct-product-with-Z``: a direct product of cyclic groups,
* ``free-group``: a free group, i.e. a free product of infinite cyclic factors.

Elements are stored as tuples of syllables ``(factor, exponent)`` with 0-based
factor indices.  For free products adjacent syllables live in distinct factors;
for direct products the syllables are sorted by factor and each factor occurs at
most once.  Exponents of a finite factor of order ``m`` lie in ``[1, m - 1]``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

FAMILIES = ("free-product", "direct-product-with-Z", "free-group")
RELATIVE = "relative"

_TOKEN = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)(?:\^\(?(-?\d+)\)?)?$")


class GroupError(ValueError):
    """Invalid group specification or element."""


class AlphabetError(GroupError):
    """A word uses a letter outside the alphabet."""


@dataclass(frozen=True)
class Factor:
    name: str
    order: int | None = None  # None means infinite cyclic

    @property
    def finite(self) -> bool:
        return self.order is not None


@dataclass(frozen=True)
class GroupSpec:
    """A group in one of the supported families together with its designated
    subgroups and relative generators.

    ``subgroups`` lists 1-based factor indices; the ``λ``-th entry names the
    factor that is ``H_λ``.  ``relative`` maps each relative letter to its image
    word in the factor letters.  Every relative letter implicitly comes with its
    formal inverse, so the relative alphabet is symmetric.
    """

    family: str
    factors: tuple[Factor, ...]
    subgroups: tuple[int, ...] = ()
    relative: tuple[tuple[str, str], ...] = ()
    name: str = ""

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise GroupError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if not self.factors:
            raise GroupError("at least one factor is required")
        names = [f.name for f in self.factors]
        if len(set(names)) != len(names):
            raise GroupError(f"factor names must be distinct: {names}")
        for f in self.factors:
            if not _TOKEN.match(f.name) or "^" in f.name:
                raise GroupError(f"bad factor name {f.name!r}")
            if f.order is not None and f.order < 2:
                raise GroupError(f"factor {f.name} has order {f.order} < 2")
            if self.family == "free-group" and f.order is not None:
                raise GroupError("free-group factors must be infinite cyclic")
        for lam in self.subgroups:
            if not 1 <= lam <= len(self.factors):
                raise GroupError(f"designated subgroup index {lam} refers to no factor")
        if len(set(self.subgroups)) != len(self.subgroups):
            raise GroupError("designated subgroups must be distinct factors")
        seen = set()
        for letter, _ in self.relative:
            if letter in seen:
                raise GroupError(f"relative letter {letter!r} declared twice")
            seen.add(letter)

    @classmethod
    def from_dict(cls, data: dict) -> "GroupSpec":
        factors = []
        for item in data["factors"]:
            if isinstance(item, dict):
                order = item.get("order")
                factors.append(Factor(item["name"], None if order in (None, "inf", "infinite") else int(order)))
            else:
                name, order = item
                factors.append(Factor(name, None if order in (None, "inf", "infinite") else int(order)))
        relative = data.get("relative", {})
        if isinstance(relative, dict):
            rel = tuple((str(k), str(v)) for k, v in relative.items())
        else:
            rel = tuple((str(k), str(v)) for k, v in relative)
        return cls(
            family=data["family"],
            factors=tuple(factors),
            subgroups=tuple(int(s) for s in data.get("subgroups", ())),
            relative=rel,
            name=data.get("name", ""),
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "family": self.family,
            "factors": [{"name": f.name, "order": f.order if f.order is not None else "inf"} for f in self.factors],
            "subgroups": list(self.subgroups),
            "relative": {k: v for k, v in self.relative},
        }


class GroupElement(tuple):
    """Normal form of a group element: a tuple of ``(factor, exponent)`` pairs."""

    __slots__ = ()

    def __repr__(self) -> str:
        return f"GroupElement({tuple(self)!r})"


IDENTITY = GroupElement()


@dataclass(frozen=True)
class Letter:
    """One letter of the alphabet ``Z ⊔ H``.

    ``subgroup`` is the 1-based index ``λ`` for letters of ``H_λ`` and 0 for
    relative letters.  Two letters may represent the same element; they are
    still different letters and give parallel edges.
    """

    name: str
    element: GroupElement
    subgroup: int = 0

    @property
    def provenance(self) -> int | str:
        return self.subgroup if self.subgroup else RELATIVE

    @property
    def label(self) -> str:
        return f"{self.name}[H{self.subgroup}]" if self.subgroup else self.name


def parse_word(text: str | Sequence) -> list[tuple[str, int]]:
    """Parse ``"a t t^-1 a"`` (also ``*`` or ``·`` separated) into ``(letter, power)`` pairs."""
    if not isinstance(text, str):
        out = []
        for tok in text:
            if isinstance(tok, str):
                out.extend(parse_word(tok))
            else:
                name, power = tok
                out.append((str(name), int(power)))
        return out
    out = []
    for tok in re.split(r"[\s*·.]+", text.strip()):
        if not tok or tok == "1":
            continue
        m = _TOKEN.match(tok)
        if not m:
            raise AlphabetError(f"cannot parse token {tok!r}")
        out.append((m.group(1), int(m.group(2)) if m.group(2) is not None else 1))
    return out


@dataclass
class Group:
    """Arithmetic for a :class:`GroupSpec`.

    ``hcap`` is the truncation ``K_H`` applied to infinite designated subgroups:
    their alphabet only contains ``h^k`` with ``1 <= |k| <= hcap``.
    """

    spec: GroupSpec
    hcap: int = 8
    _rel_images: dict = field(init=False, repr=False)
    _factor_index: dict = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._factor_index = {f.name: i for i, f in enumerate(self.spec.factors)}
        self._rel_images = {}
        for letter, image in self.spec.relative:
            elem = self._word_from_factors(parse_word(image))
            if letter in self._factor_index:
                fi = self._factor_index[letter]
                if elem != self._syllable(fi, 1):
                    raise GroupError(f"relative letter {letter!r} clashes with factor {letter!r}")
            self._rel_images[letter] = elem

    # -- basic arithmetic -------------------------------------------------
    @property
    def identity(self) -> GroupElement:
        return IDENTITY

    @property
    def abelian(self) -> bool:
        return self.spec.family == "direct-product-with-Z" or len(self.spec.factors) == 1

    def _reduce(self, f: int, e: int) -> int:
        order = self.spec.factors[f].order
        return e % order if order is not None else e

    def _syllable(self, f: int, e: int) -> GroupElement:
        e = self._reduce(f, e)
        return GroupElement(((f, e),)) if e else IDENTITY

    def multiply(self, a: Sequence, b: Sequence) -> GroupElement:
        if not a:
            return b if isinstance(b, GroupElement) else GroupElement(b)
        if not b:
            return a if isinstance(a, GroupElement) else GroupElement(a)
        if self.spec.family == "direct-product-with-Z":
            acc = dict(a)
            for f, e in b:
                acc[f] = self._reduce(f, acc.get(f, 0) + e)
            return GroupElement(sorted((f, e) for f, e in acc.items() if e))
        out = list(a)
        for f, e in b:
            if out and out[-1][0] == f:
                e2 = self._reduce(f, out.pop()[1] + e)
                if e2:
                    out.append((f, e2))
            else:
                out.append((f, e))
        return GroupElement(out)

    def inverse(self, a: Sequence) -> GroupElement:
        if self.spec.family == "direct-product-with-Z":
            return GroupElement((f, self._reduce(f, -e)) for f, e in a)
        return GroupElement((f, self._reduce(f, -e)) for f, e in reversed(a))

    def product(self, elems: Iterable[Sequence]) -> GroupElement:
        out = IDENTITY
        for g in elems:
            out = self.multiply(out, g)
        return out

    def power(self, g: Sequence, n: int) -> GroupElement:
        base = g if n >= 0 else self.inverse(g)
        out = IDENTITY
        for _ in range(abs(n)):
            out = self.multiply(out, base)
        return out

    def is_normal_form(self, a: Sequence) -> bool:
        fam = self.spec.family
        prev = None
        for f, e in a:
            if not 0 <= f < len(self.spec.factors) or e == 0:
                return False
            order = self.spec.factors[f].order
            if order is not None and not 1 <= e <= order - 1:
                return False
            if prev is not None and (f == prev if fam != "direct-product-with-Z" else f <= prev):
                return False
            prev = f
        return True

    # -- words ------------------------------------------------------------
    def _word_from_factors(self, word: list[tuple[str, int]]) -> GroupElement:
        out = IDENTITY
        for name, power in word:
            if name not in self._factor_index:
                raise AlphabetError(f"{name!r} is not a factor letter")
            out = self.multiply(out, self._syllable(self._factor_index[name], power))
        return out

    def normal_form(self, word: str | Sequence) -> GroupElement:
        """Normal form of a word over factor letters and relative letters."""
        out = IDENTITY
        for name, power in parse_word(word):
            if name in self._factor_index:
                piece = self._syllable(self._factor_index[name], power)
            elif name in self._rel_images:
                piece = self.power(self._rel_images[name], power)
            else:
                raise AlphabetError(f"unknown letter {name!r}")
            out = self.multiply(out, piece)
        return out

    def format(self, g: Sequence) -> str:
        if not g:
            return "1"
        parts = []
        for f, e in g:
            name = self.spec.factors[f].name
            parts.append(name if e == 1 else f"{name}^{e}")
        return "·".join(parts)

    def letter_length(self, g: Sequence) -> int:
        """Length of ``g`` as a reduced word in the factor generators."""
        total = 0
        for f, e in g:
            order = self.spec.factors[f].order
            total += min(e, order - e) if order is not None else abs(e)
        return total

    def sort_key(self, g: Sequence) -> tuple:
        """Shortlex key: letter length first, then syllables with signed exponents."""
        signed = []
        for f, e in g:
            order = self.spec.factors[f].order
            if order is not None and e > order - e:
                e = e - order
            signed.append((f, e))
        return (self.letter_length(g), tuple(signed))

    def sorted(self, elems: Iterable[GroupElement]) -> list[GroupElement]:
        return sorted(elems, key=self.sort_key)

    # -- subgroups and cosets ---------------------------------------------
    @property
    def n_subgroups(self) -> int:
        return len(self.spec.subgroups)

    def subgroup_factor(self, lam: int) -> int:
        return self.spec.subgroups[lam - 1] - 1

    def subgroup_finite(self, lam: int) -> bool:
        return self.spec.factors[self.subgroup_factor(lam)].finite

    def in_subgroup(self, g: Sequence, lam: int) -> bool:
        return not g or (len(g) == 1 and g[0][0] == self.subgroup_factor(lam))

    def subgroup_elements(self, lam: int) -> list[GroupElement]:
        """All elements of ``H_λ`` (the truncation ``|k| <= hcap`` for infinite ``H_λ``)."""
        f = self.subgroup_factor(lam)
        order = self.spec.factors[f].order
        exps = range(1, order) if order is not None else [k for k in range(-self.hcap, self.hcap + 1) if k]
        return self.sorted([IDENTITY] + [self._syllable(f, k) for k in exps])

    def subgroup_exponent(self, h: Sequence, lam: int) -> int:
        """Signed exponent of ``h`` in the cyclic group ``H_λ``."""
        if not h:
            return 0
        (f, e), = h
        order = self.spec.factors[f].order
        if order is not None and e > order - e:
            e -= order
        return e

    def is_truncated_boundary(self, h: Sequence, lam: int) -> bool:
        return not self.subgroup_finite(lam) and abs(self.subgroup_exponent(h, lam)) >= self.hcap

    def coset_rep(self, g: Sequence, lam: int) -> GroupElement:
        """Shortlex-least element of the left coset ``g H_λ``."""
        f = self.subgroup_factor(lam)
        if self.spec.family == "direct-product-with-Z":
            return GroupElement(s for s in g if s[0] != f)
        if g and g[-1][0] == f:
            return GroupElement(g[:-1])
        return g if isinstance(g, GroupElement) else GroupElement(g)

    def double_coset_key(self, g: Sequence, i: int, j: int) -> GroupElement:
        """Invariant of the double coset ``H_i g H_j``."""
        fi, fj = self.subgroup_factor(i), self.subgroup_factor(j)
        if self.spec.family == "direct-product-with-Z":
            return GroupElement(s for s in g if s[0] not in (fi, fj))
        g = tuple(g)
        if g and g[0][0] == fi:
            g = g[1:]
        if g and g[-1][0] == fj:
            g = g[:-1]
        return GroupElement(g)

    # -- alphabet -----------------------------------------------------------
    def relative_letters(self) -> list[Letter]:
        letters = []
        for name, _ in self.spec.relative:
            elem = self._rel_images[name]
            inv = self.inverse(elem)
            letters.append(Letter(name, elem))
            if inv != elem:
                letters.append(Letter(f"{name}^-1", inv))
        return letters

    def subgroup_letters(self, lam: int) -> list[Letter]:
        return [Letter(self.format(h), h, lam) for h in self.subgroup_elements(lam) if h]

    def alphabet(self) -> list[Letter]:
        """The alphabet ``Z ⊔ H_1 ⊔ ... ⊔ H_n`` (relative letters first)."""
        letters = self.relative_letters()
        for lam in range(1, self.n_subgroups + 1):
            letters.extend(self.subgroup_letters(lam))
        return letters

    def relative_image(self, name: str) -> GroupElement:
        return self._rel_images[name]

    def letter_provenance(self, letter: str | Letter) -> int | str:
        """``λ`` for a letter of ``H_λ``, ``"relative"`` for a relative letter.

        A bare string names a relative letter (or its ``^-1``) when one exists;
        subgroup letters are addressed as ``"<name>[H<λ>]"``.
        """
        if isinstance(letter, Letter):
            return letter.provenance
        m = re.match(r"^(.*)\[H(\d+)\]$", letter)
        if m:
            lam = int(m.group(2))
            if not 1 <= lam <= self.n_subgroups:
                raise AlphabetError(f"no subgroup H{lam}")
            names = {x.name for x in self.subgroup_letters(lam)}
            if m.group(1) not in names:
                raise AlphabetError(f"{m.group(1)!r} is not a letter of H{lam}")
            return lam
        base = letter[:-3] if letter.endswith("^-1") else letter
        if base in self._rel_images:
            return RELATIVE
        for lam in range(1, self.n_subgroups + 1):
            if letter in {x.name for x in self.subgroup_letters(lam)}:
                return lam
        raise AlphabetError(f"unknown letter {letter!r}")


# Module-level conveniences mirroring the operation names used in reports.

def normal_form(spec: GroupSpec, word: str | Sequence, hcap: int = 8) -> GroupElement:
    return Group(spec, hcap).normal_form(word)


def multiply(spec: GroupSpec, a: Sequence, b: Sequence) -> GroupElement:
    return Group(spec).multiply(a, b)


def inverse(spec: GroupSpec, a: Sequence) -> GroupElement:
    return Group(spec).inverse(a)


def letter_provenance(spec: GroupSpec, letter: str | Letter) -> int | str:
    return Group(spec).letter_provenance(letter)
