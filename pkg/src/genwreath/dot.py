"""Graphviz DOT text for down-set lattices and subgroup chains."""

from __future__ import annotations

from typing import Sequence

from .poset import DownSet, Poset, downsets


def _quote(text: str) -> str:
    return '"' + text.replace('"', '\\"') + '"'


def _covering_pairs(sets: Sequence[frozenset[int]]) -> list[tuple[int, int]]:
    out = []
    for i, a in enumerate(sets):
        for j, b in enumerate(sets):
            if a < b and not any(a < c < b for c in sets):
                out.append((i, j))
    return out


def lattice_dot(nodes: Sequence[DownSet], labels: Sequence[str] | None = None, name: str = "downsets") -> str:
    """Hasse diagram of down-sets; node order follows ``nodes``."""
    sets = [d.members for d in nodes]
    lines = [f"digraph {name} {{", "  rankdir=BT;", "  node [shape=box];"]
    for i, d in enumerate(nodes):
        label = d.label() if labels is None else f"{d.label()}\\n{labels[i]}"
        lines.append(f"  n{i} [label={_quote(label)}];")
    for i, j in _covering_pairs(sets):
        lines.append(f"  n{i} -> n{j};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def downset_lattice_dot(p: Poset) -> str:
    return lattice_dot(downsets(p))
