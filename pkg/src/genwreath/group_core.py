"""Small finite groups as multiplication tables, plus brute-force oracles.

Index 0 is always the identity.  ``mul[i, j]`` is the index of ``i * j``;
for groups built from permutations the product is composition with the right
factor applied first, matching :mod:`genwreath.perm`.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CapExceeded, ValidationError

CLASS_SIZE_LIMIT = 10**4
CLASS_COUNT_LIMIT = 25
ENDOMORPHISM_SEARCH_LIMIT = 10**8
_ASSOC_EXHAUSTIVE = 200
_ASSOC_SAMPLES = 20000

BUILTIN_NAMES = ("A5", "Z2", "Z3", "Z4", "S3", "V4", "D4")


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    mul: np.ndarray
    label: str = "table"
    inv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        mul = np.array(self.mul, dtype=np.int64)
        n = mul.shape[0] if mul.ndim == 2 else 0
        if mul.ndim != 2 or mul.shape != (n, n) or n == 0:
            raise ValidationError("group table must be a non-empty square table")
        if mul.min() < 0 or mul.max() >= n:
            raise ValidationError("group table entries out of range")
        ar = np.arange(n)
        if not (np.array_equal(mul[0], ar) and np.array_equal(mul[:, 0], ar)):
            raise ValidationError("index 0 must be the identity")
        for row in (mul, mul.T):
            if not all(np.array_equal(np.sort(r), ar) for r in row):
                raise ValidationError("group table is not a Latin square")
        inv = np.argmax(mul == 0, axis=1)
        if not np.array_equal(mul[ar, inv], np.zeros(n, dtype=np.int64)):
            raise ValidationError("missing inverses")
        _check_associative(mul)
        mul.setflags(write=False)
        inv.setflags(write=False)
        object.__setattr__(self, "mul", mul)
        object.__setattr__(self, "inv", inv)

    @property
    def size(self) -> int:
        return int(self.mul.shape[0])

    @property
    def identity(self) -> int:
        return 0

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.mul, self.mul.T))

    def element_orders(self) -> np.ndarray:
        orders = np.ones(self.size, dtype=np.int64)
        power = np.arange(self.size)
        k = 1
        pending = power != 0
        while pending.any():
            power = self.mul[power, np.arange(self.size)]
            k += 1
            hit = pending & (power == 0)
            orders[hit] = k
            pending &= ~hit
        orders[0] = 1
        return orders

    def closure(self, seeds: Sequence[int]) -> np.ndarray:
        """Membership flags of the subgroup generated by ``seeds``."""
        gens = np.unique(np.asarray(list(seeds), dtype=np.int64))
        members = np.zeros(self.size, dtype=bool)
        members[0] = True
        frontier = np.array([0])
        while frontier.size and gens.size:
            products = np.unique(self.mul[np.ix_(frontier, gens)])
            new = products[~members[products]]
            members[new] = True
            frontier = new
        return members

    def generators(self) -> list[int]:
        """A generating set chosen greedily in index order."""
        gens: list[int] = []
        members = self.closure([])
        for i in range(self.size):
            if not members[i]:
                gens.append(i)
                members = self.closure(gens)
        return gens

    def to_json(self) -> dict:
        if self.label in BUILTIN_NAMES:
            return {"builtin": self.label}
        return {"table": self.mul.tolist()}


def _check_associative(mul: np.ndarray) -> None:
    n = mul.shape[0]
    if n <= _ASSOC_EXHAUSTIVE:
        left = mul[mul[:, :, None], np.arange(n)[None, None, :]]
        right = mul[np.arange(n)[:, None, None], mul[None, :, :]]
        ok = np.array_equal(left, right)
    else:
        rng = np.random.default_rng(0)
        a, b, c = rng.integers(0, n, size=(3, _ASSOC_SAMPLES))
        ok = np.array_equal(mul[mul[a, b], c], mul[a, mul[b, c]])
    if not ok:
        raise ValidationError("group table is not associative")


def group_from_permutations(perms: Sequence[Sequence[int]], label: str) -> FiniteGroup:
    """Table of a permutation group; elements sorted by image tuple.

    The identity must be the lexicographically least tuple, which holds for
    permutations of ``0..d-1``.
    """
    elems = sorted(tuple(p) for p in perms)
    index = {p: i for i, p in enumerate(elems)}
    if elems[0] != tuple(range(len(elems[0]))):
        raise ValidationError("identity permutation missing")
    arr = np.array(elems)
    mul = np.empty((len(elems), len(elems)), dtype=np.int64)
    for i, p in enumerate(arr):
        for j, q in enumerate(arr):
            mul[i, j] = index[tuple(p[q])]
    return FiniteGroup(mul, label)


def _parity(p: Sequence[int]) -> int:
    return sum(1 for i in range(len(p)) for j in range(i) if p[j] > p[i]) % 2


def builtin_group(name: str) -> FiniteGroup:
    if name == "A5":
        return group_from_permutations([p for p in itertools.permutations(range(5)) if _parity(p) == 0], "A5")
    if name in ("Z2", "Z3", "Z4"):
        n = int(name[1])
        ar = np.arange(n)
        return FiniteGroup((ar[:, None] + ar[None, :]) % n, name)
    if name == "S3":
        return group_from_permutations(list(itertools.permutations(range(3))), "S3")
    if name == "V4":
        ar = np.arange(4)
        return FiniteGroup(ar[:, None] ^ ar[None, :], "V4")
    if name == "D4":
        # symmetries of a square with vertices 0,1,2,3 in cyclic order
        rot = (1, 2, 3, 0)
        ref = (0, 3, 2, 1)
        elems = {tuple(range(4))}
        frontier = list(elems)
        while frontier:
            nxt = []
            for e in frontier:
                for g in (rot, ref):
                    x = tuple(g[e[i]] for i in range(4))
                    if x not in elems:
                        elems.add(x)
                        nxt.append(x)
            frontier = nxt
        return group_from_permutations(elems, "D4")
    raise ValidationError(f"unknown builtin group {name!r}", known=list(BUILTIN_NAMES))


def group_from_spec(spec: dict | str) -> FiniteGroup:
    """``"A5"``, ``{"builtin": "A5"}`` or ``{"table": [[...], ...]}``."""
    if isinstance(spec, str):
        return builtin_group(spec)
    if not isinstance(spec, dict):
        raise ValidationError(f"bad group spec {spec!r}")
    if "builtin" in spec:
        return builtin_group(str(spec["builtin"]))
    if "table" in spec:
        return FiniteGroup(np.array(spec["table"]), str(spec.get("label", "table")))
    raise ValidationError("group spec needs 'builtin' or 'table'")


def parse_group_arg(text: str) -> FiniteGroup:
    """Builtin name or path to a group file."""
    if text in BUILTIN_NAMES:
        return builtin_group(text)
    try:
        with open(text, encoding="utf-8") as fh:
            return group_from_spec(json.load(fh))
    except OSError:
        raise ValidationError(f"unknown group {text!r}", known=list(BUILTIN_NAMES)) from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"group file {text!r} is not JSON: {exc}") from None


# -- oracles ----------------------------------------------------------------


def conjugacy_classes(g: FiniteGroup) -> list[list[int]]:
    if g.size > CLASS_SIZE_LIMIT:
        raise CapExceeded("conjugacy classes limited by group size", cap="oracle-order", requested=g.size, limit=CLASS_SIZE_LIMIT)
    assigned = np.full(g.size, -1, dtype=np.int64)
    classes = []
    ar = np.arange(g.size)
    for x in range(g.size):
        if assigned[x] >= 0:
            continue
        orbit = np.unique(g.mul[g.mul[ar, x], g.inv])
        assigned[orbit] = len(classes)
        classes.append(orbit.tolist())
    return classes


def is_normal_subgroup(g: FiniteGroup, members: np.ndarray) -> bool:
    idx = np.flatnonzero(members)
    if not members[0]:
        return False
    if not members[g.mul[np.ix_(idx, idx)]].all() or not members[g.inv[idx]].all():
        return False
    conj = g.mul[g.mul[:, idx], g.inv[:, None]]
    return bool(members[conj].all())


def normal_subgroups_bruteforce(g: FiniteGroup) -> list[np.ndarray]:
    """Every normal subgroup, as membership flags, sorted by size.

    Each normal subgroup is a union of conjugacy classes, hence the subgroup
    generated by that union; it is therefore a join of the subgroups
    generated by single classes, which is how the search proceeds.
    """
    classes = conjugacy_classes(g)
    if len(classes) > CLASS_COUNT_LIMIT:
        raise CapExceeded("too many conjugacy classes for the normal-subgroup oracle", cap="classes", requested=len(classes), limit=CLASS_COUNT_LIMIT)
    atoms = {}
    for cls in classes:
        flags = g.closure(cls)
        atoms[flags.tobytes()] = flags
    trivial = g.closure([])
    found = {trivial.tobytes(): trivial}
    frontier = [trivial]
    while frontier:
        nxt = []
        for n in frontier:
            for a in atoms.values():
                joined = g.closure(np.flatnonzero(n | a))
                key = joined.tobytes()
                if key not in found:
                    found[key] = joined
                    nxt.append(joined)
        frontier = nxt
    result = sorted(found.values(), key=lambda f: (int(f.sum()), tuple(np.flatnonzero(f))))
    for flags in result:
        assert is_normal_subgroup(g, flags)
    return result


def word_table(g: FiniteGroup, gens: Sequence[int]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Breadth-first spanning tree of the right Cayley graph.

    Returns ``(order, parent, via)``: elements in discovery order, and for each
    element ``e != 0`` the tree edge ``e = parent[e] * gens[via[e]]``.
    """
    parent = np.full(g.size, -1, dtype=np.int64)
    via = np.full(g.size, -1, dtype=np.int64)
    seen = np.zeros(g.size, dtype=bool)
    seen[0] = True
    order = [0]
    k = 0
    while k < len(order):
        e = order[k]
        for gi, s in enumerate(gens):
            x = int(g.mul[e, s])
            if not seen[x]:
                seen[x] = True
                parent[x], via[x] = e, gi
                order.append(x)
        k += 1
    if len(order) != g.size:
        raise ValidationError("given elements do not generate the group", generated=len(order), size=g.size)
    return np.array(order), parent, via


def endomorphisms(g: FiniteGroup, gens: Sequence[int] | None = None) -> list[np.ndarray]:
    """All homomorphisms ``g -> g`` as index maps, sorted lexicographically.

    Generator images are assigned in bulk; each assignment is extended along
    the word table and kept only if it respects ``phi(a s) = phi(a) phi(s)``
    for every element ``a`` and generator ``s``.
    """
    gens = list(g.generators() if gens is None else gens)
    order, parent, via = word_table(g, gens)
    if g.size ** len(gens) > ENDOMORPHISM_SEARCH_LIMIT:
        raise CapExceeded("endomorphism search space too large", cap="endomorphisms", requested=g.size ** len(gens), limit=ENDOMORPHISM_SEARCH_LIMIT)
    orders = g.element_orders()
    # an image's order must divide the generator's order
    choices = [np.flatnonzero(orders[s] % orders == 0) for s in gens]
    tree_edges = {(int(parent[e]), int(via[e])) for e in order[1:]}
    relations = [(a, si) for a in range(g.size) for si in range(len(gens)) if (a, si) not in tree_edges]
    rel_a = np.array([a for a, _ in relations], dtype=np.int64)
    rel_s = np.array([si for _, si in relations], dtype=np.int64)
    rel_as = g.mul[rel_a, np.asarray(gens, dtype=np.int64)[rel_s]] if relations else np.zeros(0, dtype=np.int64)

    found = []
    chunk = max(1, 2**22 // g.size)
    combos = itertools.product(*choices)
    while True:
        block = np.array(list(itertools.islice(combos, chunk)), dtype=np.int64)
        if block.size == 0:
            break
        block = block.reshape(-1, len(gens))
        phi = np.zeros((block.shape[0], g.size), dtype=np.int64)
        for e in order[1:]:
            phi[:, e] = g.mul[phi[:, parent[e]], block[:, via[e]]]
        alive = np.ones(block.shape[0], dtype=bool)
        for k in range(0, len(relations), 64):
            sl = slice(k, k + 64)
            lhs = phi[:, rel_as[sl]]
            rhs = g.mul[phi[:, rel_a[sl]], block[:, rel_s[sl]]]
            alive &= (lhs == rhs).all(axis=1)
            if not alive.any():
                break
        found.extend(phi[alive])
    for phi in found:
        if not np.array_equal(phi[g.mul], g.mul[phi[:, None], phi[None, :]]):
            raise AssertionError("endomorphism search produced a non-homomorphism")
    return sorted(found, key=lambda m: tuple(m.tolist()))


@dataclass
class HopfianCertificate:
    hopfian: bool
    endomorphism_count: int
    surjective: list[np.ndarray]
    non_injective_surjections: list[np.ndarray]


def hopfian_check_bruteforce(g: FiniteGroup, gens: Sequence[int] | None = None) -> HopfianCertificate:
    endos = endomorphisms(g, gens)
    surj = [phi for phi in endos if np.unique(phi).size == g.size]
    # for a finite group this is the same as surj, but check injectivity independently
    bad = [phi for phi in surj if np.count_nonzero(phi == 0) != 1]
    return HopfianCertificate(not bad, len(endos), surj, bad)
