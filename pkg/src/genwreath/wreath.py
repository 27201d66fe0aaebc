"""Generalized wreath products over a finite poset.

A configuration assigns to every poset element ``lam`` an element of the
factor ``H_lam``; configurations are numbered in mixed radix with poset
element 0 as the least significant digit.  The generator ``xi(lam, h)``
left-multiplies coordinate ``lam`` by ``h``, except on configurations where
some coordinate strictly above ``lam`` is non-identity (those are frozen).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import bsgs
from .bsgs import GroupHandle
from .errors import CapExceeded, ValidationError, WellDefinednessViolation
from .group_core import FiniteGroup, normal_subgroups_bruteforce
from .perm import POINT_DTYPE, Permutation, degree_cap
from .poset import DownSet, Poset, downsets, is_down_closed, is_linear, restrict

ORACLE_ORDER_LIMIT = 10**4


class ConfigSpace:
    """The finite configuration set ``S`` for a poset and its factors."""

    def __init__(self, lam: Poset, factors: Sequence[FiniteGroup]) -> None:
        if len(factors) != lam.n:
            raise ValidationError(f"{lam.n} poset elements but {len(factors)} factors")
        self.lam = lam
        self.factors = tuple(factors)
        self.radices = tuple(f.size for f in factors)
        self.total = math.prod(self.radices)
        if self.total > degree_cap():
            product = " * ".join(str(r) for r in self.radices)
            raise CapExceeded(
                f"configuration space {product} = {self.total} exceeds the degree cap {degree_cap()}",
                cap="degree",
                requested=self.total,
                limit=degree_cap(),
                radices=list(self.radices),
            )
        strides = [1]
        for r in self.radices[:-1]:
            strides.append(strides[-1] * r)
        self.strides = tuple(strides[: lam.n])

    @cached_property
    def coords(self) -> np.ndarray:
        """``total × n`` table; row ``i`` is the configuration with index ``i``."""
        idx = np.arange(self.total, dtype=np.int64)
        cols = [(idx // s) % r for s, r in zip(self.strides, self.radices)]
        out = np.stack(cols, axis=1) if cols else np.zeros((self.total, 0), dtype=np.int64)
        out.setflags(write=False)
        return out

    def encode(self, coords: Sequence[int]) -> int:
        if len(coords) != self.lam.n:
            raise ValidationError("wrong number of coordinates")
        for c, r in zip(coords, self.radices):
            if not 0 <= c < r:
                raise ValidationError(f"coordinate {c} outside factor of size {r}")
        return int(sum(c * s for c, s in zip(coords, self.strides)))

    def decode(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.total:
            raise ValidationError(f"configuration index {index} out of range")
        return tuple(int(index // s % r) for s, r in zip(self.strides, self.radices))

    def frozen(self, lam: int) -> np.ndarray:
        """Configurations on which coordinate ``lam`` cannot move."""
        mask = np.zeros(self.total, dtype=bool)
        for eta in self.lam.above(lam):
            mask |= self.coords[:, eta] != 0
        return mask

    def outside_key(self, gamma: Iterable[int]) -> np.ndarray:
        """Index with every coordinate in ``gamma`` reset to the identity."""
        key = np.arange(self.total, dtype=np.int64)
        for g in set(gamma):
            key -= self.coords[:, g] * self.strides[g]
        return key


def config_space(lam: Poset, factors: Sequence[FiniteGroup]) -> ConfigSpace:
    return ConfigSpace(lam, factors)


def xi(space: ConfigSpace, lam: int, h: int) -> Permutation:
    if not 0 <= lam < space.lam.n:
        raise ValidationError(f"no poset element {lam}")
    factor = space.factors[lam]
    if not 0 <= h < factor.size:
        raise ValidationError(f"factor element {h} out of range for {factor.label}")
    return Permutation(_xi_array(space, lam, h), check=False)


def _xi_array(space: ConfigSpace, lam: int, h: int) -> np.ndarray:
    col = space.coords[:, lam]
    moved = np.where(space.frozen(lam), col, space.factors[lam].mul[h, col])
    return (np.arange(space.total, dtype=np.int64) + (moved - col) * space.strides[lam]).astype(POINT_DTYPE)


@dataclass(frozen=True)
class ClassPartition:
    """Classes of configurations agreeing outside ``gamma``.

    Classes are numbered by their least member, which is the member with
    identity coordinates on ``gamma``.
    """

    gamma: frozenset[int]
    class_of: np.ndarray
    representatives: np.ndarray

    @property
    def count(self) -> int:
        return int(self.representatives.size)

    def members(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.count)]
        for x, c in enumerate(self.class_of.tolist()):
            out[c].append(x)
        return out


def classes_mod_gamma(space: ConfigSpace, gamma: Iterable[int], *, require_down_closed: bool = True) -> ClassPartition:
    gamma = frozenset(gamma)
    if require_down_closed and not is_down_closed(space.lam, gamma):
        raise ValidationError(f"{sorted(gamma)} is not downward closed")
    key = space.outside_key(gamma)
    reps, class_of = np.unique(key, return_inverse=True)
    return ClassPartition(gamma, class_of.reshape(-1), reps)


def _members(gamma: DownSet | Iterable[int]) -> frozenset[int]:
    return gamma.members if isinstance(gamma, DownSet) else frozenset(gamma)


class WreathGroup:
    """Wreath product of ``space.factors`` over ``space.lam``.

    ``generators()`` lists every ``xi(lam, h)`` with ``h`` non-identity; the
    stabilizer chain is built from the sub-list with ``h`` ranging over a
    generating set of each factor, which generates the same group because
    ``h -> xi(lam, h)`` is a homomorphism.
    """

    def __init__(
        self,
        space: ConfigSpace,
        *,
        threads: int = 1,
        memory_budget: int = bsgs.DEFAULT_MEMORY_BUDGET,
        randomized: bool = False,
        seed: int = 0,
    ) -> None:
        self.space = space
        self.threads = max(1, threads)
        self.memory_budget = memory_budget
        self.randomized = randomized
        self.seed = seed
        self._xi: dict[tuple[int, int], Permutation] = {}
        self._d_cache: dict[frozenset[int], GroupHandle] = {}
        self.factor_gens = tuple(tuple(f.generators()) for f in space.factors)

    @property
    def degree(self) -> int:
        return self.space.total

    def xi(self, lam: int, h: int) -> Permutation:
        key = (lam, h)
        if key not in self._xi:
            self._xi[key] = xi(self.space, lam, h)
        return self._xi[key]

    def _prefetch(self, keys: list[tuple[int, int]]) -> None:
        todo = [k for k in keys if k not in self._xi]
        if self.threads > 1 and len(todo) > 1:
            with ThreadPoolExecutor(self.threads) as pool:
                perms = list(pool.map(lambda k: xi(self.space, *k), todo))
        else:
            perms = [xi(self.space, *k) for k in todo]
        self._xi.update(zip(todo, perms))

    def generator_keys(self, gamma: Iterable[int] | None = None) -> list[tuple[int, int]]:
        lams = range(self.space.lam.n) if gamma is None else sorted(set(gamma))
        return [(lam, h) for lam in lams for h in range(1, self.space.radices[lam])]

    def generators(self, gamma: Iterable[int] | None = None) -> list[Permutation]:
        keys = self.generator_keys(gamma)
        self._prefetch(keys)
        return [self._xi[k] for k in keys]

    def engine_keys(self, gamma: Iterable[int] | None = None) -> list[tuple[int, int]]:
        lams = range(self.space.lam.n) if gamma is None else sorted(set(gamma))
        return [(lam, h) for lam in lams for h in self.factor_gens[lam]]

    def engine_generators(self, gamma: Iterable[int] | None = None) -> list[Permutation]:
        keys = self.engine_keys(gamma)
        self._prefetch(keys)
        return [self._xi[k] for k in keys]

    @cached_property
    def handle(self) -> GroupHandle:
        return bsgs.build_group(
            self.engine_generators(),
            self.degree,
            memory_budget=self.memory_budget,
            randomized=self.randomized,
            seed=self.seed,
        )

    @cached_property
    def _upset_blocks(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """(lift, projection) per minimal element ``mu``, for the action on ``S_U``, ``U`` = elements >= mu.

        The new value of coordinate ``lam`` under any generator depends only on
        coordinates at or above ``lam``, so the group acts on the projection to
        any up-set; together the up-sets of the minimal elements see every
        coordinate, which makes the disjoint union of these actions faithful.
        """
        lam, space = self.space.lam, self.space
        blocks = []
        for mu in range(lam.n):
            if any(lam.lt(nu, mu) for nu in range(lam.n)):
                continue
            upset = [i for i in range(lam.n) if lam.leq[mu, i]]
            sizes = [space.radices[i] for i in upset]
            digits = np.indices(sizes[::-1]).reshape(len(upset), -1)[::-1]
            lift = sum(d.astype(np.int64) * space.strides[i] for d, i in zip(digits, upset))
            proj = np.zeros(space.total, dtype=np.int64)
            step = 1
            for i, size in zip(upset, sizes):
                proj += space.coords[:, i].astype(np.int64) * step
                step *= size
            blocks.append((np.asarray(lift, dtype=np.int64), proj))
        return blocks

    @property
    def upset_degree(self) -> int:
        return sum(len(lift) for lift, _ in self._upset_blocks)

    def upset_image(self, g: Permutation) -> Permutation:
        """``g`` acting on the disjoint union of the minimal elements' up-set projections."""
        parts, offset = [], 0
        for lift, proj in self._upset_blocks:
            parts.append(proj[g.images[lift]] + offset)
            offset += len(lift)
        return Permutation(np.concatenate(parts).astype(POINT_DTYPE), check=False)

    @cached_property
    def order_handle(self) -> GroupHandle:
        """Chain used for ``order()``: the up-set action when it has smaller degree, else ``handle``."""
        if self.space.lam.n == 0 or self.upset_degree >= self.degree:
            return self.handle
        return bsgs.build_group(
            [self.upset_image(g) for g in self.engine_generators()],
            self.upset_degree,
            memory_budget=self.memory_budget,
            randomized=self.randomized,
            seed=self.seed,
        )

    def order(self) -> int:
        return self.order_handle.order()

    def d_gamma(self, gamma: DownSet | Iterable[int]) -> GroupHandle:
        return d_gamma_group(self, gamma)


def wreath_group(space: ConfigSpace, **kwargs) -> WreathGroup:
    return WreathGroup(space, **kwargs)


def subgroup_h_gamma(w: WreathGroup, gamma: Iterable[int]) -> list[Permutation]:
    gamma = set(gamma)
    for g in gamma:
        if not 0 <= g < w.space.lam.n:
            raise ValidationError(f"no poset element {g}")
    return w.generators(gamma)


def quotient_action(
    w: WreathGroup, g: Permutation, gamma: DownSet | Iterable[int], partition: ClassPartition | None = None
) -> Permutation:
    """The permutation ``g`` induces on the classes of ``~gamma``.

    ``gamma`` is not required to be downward closed; if it is not, the
    induced map may fail to exist, which is reported rather than assumed away.
    """
    if g.degree != w.degree:
        raise ValidationError(f"degree mismatch: {g.degree} vs {w.degree}")
    part = partition or classes_mod_gamma(w.space, _members(gamma), require_down_closed=False)
    image = part.class_of[g.images]
    induced = np.empty(part.count, dtype=np.int64)
    induced[part.class_of] = image
    split = np.flatnonzero(induced[part.class_of] != image)
    if split.size:
        x = int(split[0])
        raise WellDefinednessViolation(
            "permutation splits an equivalence class",
            gamma=sorted(part.gamma),
            config=list(w.space.decode(x)),
            class_index=int(part.class_of[x]),
        )
    return Permutation(induced, check=False)


def d_gamma_membership(w: WreathGroup, g: Permutation, gamma: DownSet | Iterable[int]) -> bool:
    """True iff ``g`` fixes every coordinate outside ``gamma`` of every configuration."""
    if g.degree != w.degree:
        raise ValidationError(f"degree mismatch: {g.degree} vs {w.degree}")
    key = w.space.outside_key(_members(gamma))
    return bool(np.array_equal(key[g.images], key))


def d_gamma_group(w: WreathGroup, gamma: DownSet | Iterable[int]) -> GroupHandle:
    """Normal closure of ``H_gamma`` in the whole group."""
    members = _members(gamma)
    if not is_down_closed(w.space.lam, members):
        raise ValidationError(f"{sorted(members)} is not downward closed")
    if members not in w._d_cache:
        if len(members) == w.space.lam.n:
            handle = w.handle
        else:
            handle = bsgs.normal_closure_group(
                w.engine_generators(), w.engine_generators(members), w.degree, memory_budget=w.memory_budget
            )
        for gen in handle.gens:
            if not d_gamma_membership(w, gen, members):
                raise AssertionError(f"normal closure generator leaves the kernel for {sorted(members)}")
        w._d_cache[members] = handle
    return w._d_cache[members]


# -- independent order formulas ----------------------------------------------


def kernel_order_formula(space: ConfigSpace, gamma: Iterable[int]) -> int | None:
    """Order of ``D_gamma`` where a closed form is known, else ``None``.

    Known cases: antichains (direct sum, product of the factors in gamma)
    and the two-element chain (restricted wreath product ``H_0 wr H_1``).
    """
    gamma = set(gamma)
    lam = space.lam
    sizes = space.radices
    if not lam.leq[~np.eye(lam.n, dtype=bool)].any():
        return math.prod(sizes[g] for g in gamma)
    if lam.n == 2 and is_linear(lam):
        bottom, top = (0, 1) if lam.leq[0, 1] else (1, 0)
        if not gamma:
            return 1
        base = sizes[bottom] ** sizes[top]
        return base if gamma == {bottom} else base * sizes[top]
    return None


def order_formula(space: ConfigSpace) -> int | None:
    return kernel_order_formula(space, range(space.lam.n))


# -- kernel verification -----------------------------------------------------


@dataclass
class KernelCheck:
    gamma: list[int]
    order: int
    method: str
    verified: bool
    detail: str = ""


def element_flags(w: WreathGroup, handle: GroupHandle, elements: np.ndarray) -> np.ndarray:
    """Flags over ``elements`` (rows) marking membership in ``handle``."""
    return np.array([handle.chain.contains_array(row) for row in elements], dtype=bool)


def verify_kernel(w: WreathGroup, gamma: DownSet | Iterable[int], oracle_limit: int = ORACLE_ORDER_LIMIT) -> KernelCheck:
    """Compare the normal closure with the coordinate-fixing kernel.

    Small groups: the kernel is found by scanning every element.  Larger
    groups: inclusion via generators plus an order formula when one exists.
    """
    members = _members(gamma)
    d = d_gamma_group(w, members)
    gens_ok = all(d_gamma_membership(w, g, members) for g in d.gens)
    if w.order() <= oracle_limit:
        elements = w.handle.element_arrays(oracle_limit)
        key = w.space.outside_key(members)
        kernel = (key[elements] == key[None, :]).all(axis=1)
        closure = element_flags(w, d, elements)
        ok = gens_ok and bool(np.array_equal(kernel, closure))
        return KernelCheck(sorted(members), d.order(), "element-scan", ok, f"kernel size {int(kernel.sum())}")
    expected = kernel_order_formula(w.space, members)
    if expected is not None:
        ok = gens_ok and expected == d.order()
        return KernelCheck(sorted(members), d.order(), "order-formula", ok, f"expected {expected}")
    return KernelCheck(sorted(members), d.order(), "inclusion-verified only", gens_ok)


# -- quotient isomorphism ----------------------------------------------------


@dataclass
class QuotientCheck:
    ok: bool
    gamma: list[int]
    relabeling: list[int] = field(default_factory=list)
    mismatch: dict | None = None


def complement_wreath(w: WreathGroup, gamma: Iterable[int]) -> tuple[WreathGroup, list[int]]:
    """Wreath group on the complement of ``gamma`` with inherited factors.

    Also returns the complement's elements in increasing order, i.e. the map
    from the new poset's indices to the old ones.
    """
    rest = [i for i in range(w.space.lam.n) if i not in set(gamma)]
    sub = ConfigSpace(restrict(w.space.lam, rest), [w.space.factors[i] for i in rest])
    return WreathGroup(sub, threads=w.threads, memory_budget=w.memory_budget), rest


def quotient_iso_check(w: WreathGroup, gamma: DownSet | Iterable[int]) -> QuotientCheck:
    """Match the action on classes of ``~gamma`` with the complement's wreath group.

    The witness maps class index to configuration index of the complement.
    """
    members = _members(gamma)
    part = classes_mod_gamma(w.space, members)
    quotient, rest = complement_wreath(w, members)
    reps = w.space.coords[part.representatives]
    relabel = np.zeros(part.count, dtype=np.int64)
    for new_index, old in enumerate(rest):
        relabel += reps[:, old] * quotient.space.strides[new_index]
    if not np.array_equal(np.sort(relabel), np.arange(quotient.degree)):
        return QuotientCheck(False, sorted(members), mismatch={"reason": "relabeling is not a bijection"})
    for lam, h in w.generator_keys():
        induced = quotient_action(w, w.xi(lam, h), members, part)
        if lam in members:
            expected = np.arange(part.count)
            target = induced.images
        else:
            expected = quotient.xi(rest.index(lam), h).images[relabel]
            target = relabel[induced.images]
        bad = np.flatnonzero(target != expected)
        if bad.size:
            c = int(bad[0])
            return QuotientCheck(
                False,
                sorted(members),
                relabeling=relabel.tolist(),
                mismatch={"lam": lam, "h": h, "config": list(w.space.decode(int(part.representatives[c])))},
            )
    return QuotientCheck(True, sorted(members), relabeling=relabel.tolist())


# -- normal subgroups of small instances --------------------------------------


def element_table(w: WreathGroup, limit: int = ORACLE_ORDER_LIMIT) -> tuple[FiniteGroup, np.ndarray]:
    """Multiplication table of the whole group (identity at index 0).

    Elements are told apart by their images of the chain's base points.
    Returns the table and the element rows in table order.
    """
    elements = w.handle.element_arrays(limit)
    base = np.array(w.handle.base, dtype=np.int64)
    if base.size == 0:
        return FiniteGroup(np.zeros((1, 1), dtype=np.int64), "trivial"), elements
    keys = np.ascontiguousarray(elements[:, base])
    void = np.dtype((np.void, keys.dtype.itemsize * keys.shape[1]))
    flat = keys.view(void).reshape(-1)
    order = np.argsort(flat, kind="stable")
    sorted_keys = flat[order]
    n = elements.shape[0]
    mul = np.empty((n, n), dtype=np.int64)
    for j in range(n):
        # row i of products: elements[i] ∘ elements[j], read on the base
        prod = np.ascontiguousarray(elements[:, elements[j, base]]).view(void).reshape(-1)
        mul[:, j] = order[np.searchsorted(sorted_keys, prod)]
    return FiniteGroup(mul, "wreath"), elements


def generator_indices(w: WreathGroup, elements: np.ndarray) -> list[int]:
    """Table indices of the engine generators."""
    lookup = {row.tobytes(): i for i, row in enumerate(elements)}
    return [lookup[g.images.tobytes()] for g in w.engine_generators()]


@dataclass
class NormalSubgroupReport:
    group_order: int
    normal_subgroup_count: int
    downset_count: int
    matched: list[dict]
    unmatched: list[dict]
    collisions: list[list[list[int]]]

    def to_json(self) -> dict:
        return {
            "group_order": str(self.group_order),
            "normal_subgroup_count": self.normal_subgroup_count,
            "downset_count": self.downset_count,
            "matched": self.matched,
            "unmatched": self.unmatched,
            "collisions": self.collisions,
        }


def classify_normal_subgroups_small(w: WreathGroup, limit: int = ORACLE_ORDER_LIMIT) -> NormalSubgroupReport:
    if w.order() > limit:
        raise CapExceeded(
            f"group order {w.order()} exceeds the oracle limit {limit}", cap="oracle-order", requested=w.order(), limit=limit
        )
    table, elements = element_table(w, limit)
    normals = normal_subgroups_bruteforce(table)
    by_key = {flags.tobytes(): k for k, flags in enumerate(normals)}
    ds_by_key: dict[bytes, list[list[int]]] = {}
    matched = []
    for ds in downsets(w.space.lam):
        flags = element_flags(w, d_gamma_group(w, ds), elements)
        ds_by_key.setdefault(flags.tobytes(), []).append(ds.sorted_members())
        k = by_key.get(flags.tobytes())
        if k is not None:
            matched.append({"downset": ds.sorted_members(), "normal_subgroup": k, "order": int(flags.sum())})
    unmatched = [
        {"normal_subgroup": k, "order": int(flags.sum())} for k, flags in enumerate(normals) if flags.tobytes() not in ds_by_key
    ]
    collisions = [sets for sets in ds_by_key.values() if len(sets) > 1]
    return NormalSubgroupReport(
        w.order(), len(normals), len(downsets(w.space.lam)), matched, unmatched, collisions
    )
