"""Finite trees, their Kleene-Brouwer linearization, and the tree-to-group pipeline.

The Kleene-Brouwer order is a stand-in for a tree-to-order reduction: it turns
an infinite branch into an infinite descending sequence, which at finite
scale is only visible as a declared, eventually periodic branch.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .config import RunConfig
from .errors import CapExceeded, ValidationError
from .group_core import FiniteGroup, builtin_group
from .hopf import hopfian_report
from .perm import set_degree_cap
from .poset import Poset, is_linear, linear_sequence

KB_NODE_LIMIT = 20
REDUCTION_TAG = "kleene-brouwer (stand-in)"

Node = tuple[int, ...]


class Tree:
    """A finite prefix-closed set of finite sequences of naturals."""

    def __init__(self, nodes: Iterable[Sequence[int]]) -> None:
        cleaned = set()
        for node in nodes:
            if not isinstance(node, (list, tuple)) or not all(isinstance(x, int) and not isinstance(x, bool) for x in node):
                raise ValidationError(f"tree node {node!r} is not a list of integers")
            if any(x < 0 for x in node):
                raise ValidationError(f"tree node {list(node)} has a negative entry")
            cleaned.add(tuple(node))
        for node in cleaned:
            for k in range(len(node)):
                if node[:k] not in cleaned:
                    missing = "root" if k == 0 else f"prefix {list(node[:k])}"
                    raise ValidationError(f"tree is not prefix closed: missing {missing} of {list(node)}")
        if () not in cleaned:
            raise ValidationError("tree is not prefix closed: missing root")
        self.nodes: tuple[Node, ...] = tuple(sorted(cleaned))

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, node: Sequence[int]) -> bool:
        return tuple(node) in set(self.nodes)

    def to_json(self) -> list[list[int]]:
        return [list(n) for n in self.nodes]


def parse_tree(text: str) -> Tree:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"tree file is not JSON: {exc}") from None
    if not isinstance(data, list):
        raise ValidationError("tree file must be a JSON list of integer arrays")
    return Tree(data)


def kb_less(s: Node, t: Node) -> bool:
    """Strict Kleene-Brouwer comparison: extensions come first, then left-to-right."""
    for a, b in zip(s, t):
        if a != b:
            return a < b
    return len(s) > len(t)


def node_label(node: Node) -> str:
    return "(" + ",".join(map(str, node)) + ")"


@dataclass(frozen=True)
class KBOrder:
    poset: Poset
    nodes: tuple[Node, ...]

    def index_of(self, node: Sequence[int]) -> int:
        return self.nodes.index(tuple(node))

    def ascending(self) -> list[Node]:
        return [self.nodes[i] for i in linear_sequence(self.poset)]


def kb_order(t: Tree) -> KBOrder:
    """Kleene-Brouwer order on the nodes.

    Element ``i`` of the poset is the ``i``-th smallest node, so the poset is
    the standard chain with node labels as names.  The relation is still built
    pairwise from ``kb_less`` and checked to be linear.
    """
    if len(t) > KB_NODE_LIMIT:
        raise CapExceeded(f"Kleene-Brouwer order limited to {KB_NODE_LIMIT} nodes", cap="tree-size", requested=len(t), limit=KB_NODE_LIMIT)
    rank = {s: sum(kb_less(u, s) for u in t.nodes) for s in t.nodes}
    nodes = tuple(sorted(t.nodes, key=rank.__getitem__))
    n = len(nodes)
    leq = np.eye(n, dtype=bool)
    for i, s in enumerate(nodes):
        for j, u in enumerate(nodes):
            if kb_less(s, u):
                leq[i, j] = True
    poset = Poset(leq, [node_label(s) for s in nodes])
    if not is_linear(poset) or sorted(rank.values()) != list(range(n)):
        raise AssertionError("Kleene-Brouwer comparison is not a strict total order on these nodes")
    return KBOrder(poset, nodes)


@dataclass(frozen=True)
class Branch:
    """Eventually periodic sequence: ``prefix`` followed by ``period`` forever."""

    prefix: tuple[int, ...] = ()
    period: tuple[int, ...] = (0,)

    def __post_init__(self) -> None:
        if not self.period:
            raise ValidationError("branch period must be non-empty")
        if any(x < 0 for x in (*self.prefix, *self.period)):
            raise ValidationError("branch entries must be non-negative")

    def take(self, length: int) -> Node:
        out = list(self.prefix[:length])
        while len(out) < length:
            out.append(self.period[(len(out) - len(self.prefix)) % len(self.period)])
        return tuple(out)


@dataclass(frozen=True)
class TruncatedTree:
    tree: Tree
    depth: int
    branch: Branch | None = None


def descending_witness(tt: TruncatedTree) -> list[Node]:
    """Prefixes of the declared branch of lengths ``1..depth``, checked KB-descending."""
    if tt.branch is None:
        raise ValidationError("no declared branch")
    if tt.depth < 1:
        raise ValidationError("depth must be at least 1")
    nodes = set(tt.tree.nodes)
    out = []
    for length in range(1, tt.depth + 1):
        node = tt.branch.take(length)
        if node not in nodes:
            raise ValidationError(f"declared branch leaves the tree at {list(node)}")
        out.append(node)
    for a, b in zip(out, out[1:]):
        if not kb_less(b, a):
            raise AssertionError(f"branch prefixes {a} and {b} are not KB-descending")
    return out


def tree_to_group(t: Tree, factor: FiniteGroup | None = None, config: RunConfig | None = None) -> dict:
    """Tree -> Kleene-Brouwer order -> wreath group report.

    Raises before producing anything if a cap would be exceeded.
    """
    config = config or RunConfig()
    factor = factor or builtin_group("A5")
    order = kb_order(t)
    needed = factor.size ** order.poset.n
    if needed > config.degree_cap:
        raise CapExceeded(
            f"group for a {order.poset.n}-element order over {factor.label} needs degree {needed}",
            cap="degree",
            requested=needed,
            limit=config.degree_cap,
        )
    previous = set_degree_cap(config.degree_cap)
    try:
        report = hopfian_report(
            order.poset,
            factor,
            oracle_limit=config.oracle_cap,
            threads=config.threads,
            memory_budget=config.memory_budget,
            randomized=not config.deterministic,
            seed=config.seed,
        )
    finally:
        set_degree_cap(previous)
    return {
        "reduction": REDUCTION_TAG,
        "tree": t.to_json(),
        "kb_order": [node_label(s) for s in order.ascending()],
        "hopf": report.to_json(),
        "dot": report.dot(),
        "caps": config.provenance(),
    }
