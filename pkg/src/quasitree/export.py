"""DOT and GraphML export for balls, projection complexes and finite graphs."""

from __future__ import annotations

from pathlib import Path

import networkx as nx

from .cayley import LabeledBall
from .coarse import FiniteGraph
from .projcomplex import ProjectionComplex

FORMATS = ("dot", "graphml")


class ExportError(ValueError):
    pass


def to_multigraph(obj, group=None) -> nx.MultiGraph:
    """A networkx multigraph with ``label`` on nodes and ``label``/``provenance`` on edges."""
    g = nx.MultiGraph()
    if isinstance(obj, LabeledBall):
        fmt = obj.group.format
        for i, e in enumerate(obj.elements):
            g.add_node(i, label=fmt(e), length=int(obj.length[i]))
        for i, nbrs in enumerate(obj.adjacency):
            for j, k in nbrs:
                if i < j:
                    x = obj.alphabet[k]
                    g.add_edge(i, j, label=x.label, provenance=str(x.provenance))
    elif isinstance(obj, ProjectionComplex):
        for i, name in enumerate(obj.labels):
            g.add_node(i, label=name, subgroup=obj.universe[i].lam)
        for i, j in sorted(obj.edges):
            g.add_edge(i, j, label="", provenance="complex")
    elif isinstance(obj, FiniteGraph):
        for i, name in enumerate(obj.labels):
            g.add_node(i, label=name)
        for i, j in obj.edges():
            g.add_edge(i, j, label="", provenance="")
    else:
        raise ExportError(f"cannot export {type(obj).__name__}")
    return g


def _quote(s: str) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(obj) -> str:
    g = to_multigraph(obj)
    lines = ["graph G {"]
    for n, data in g.nodes(data=True):
        lines.append(f"  {n} [label={_quote(data['label'])}];")
    for u, v, data in g.edges(data=True):
        attrs = f"label={_quote(data['label'])}, provenance={_quote(data['provenance'])}"
        lines.append(f"  {u} -- {v} [{attrs}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_graph(obj, fmt: str, path: str | Path) -> Path:
    fmt = fmt.lower()
    if fmt not in FORMATS:
        raise ExportError(f"unsupported format {fmt!r}; choose one of {', '.join(FORMATS)}")
    path = Path(path)
    try:
        if fmt == "dot":
            path.write_text(to_dot(obj))
        else:
            nx.write_graphml(to_multigraph(obj), str(path))
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc}") from exc
    return path
