"""Workbench for hyperbolically embedded subgroups, projection complexes and
quasi-tree certification on small concrete groups."""

__version__ = "0.1.0"

from .cayley import CensoredDistance, LabeledBall, build_ball, distance  # noqa: E402
from .fixtures import FIXTURES, get_fixture  # noqa: E402
from .groups import Group, GroupElement, GroupSpec  # noqa: E402

__all__ = [
    "CensoredDistance",
    "FIXTURES",
    "Group",
    "GroupElement",
    "GroupSpec",
    "LabeledBall",
    "build_ball",
    "distance",
    "get_fixture",
]
