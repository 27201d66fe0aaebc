"""Stabilizer chains for permutation groups given by generators.

The engine is a deterministic Schreier-Sims variant tuned for numpy:

* every level keeps its own generating set ``T_l`` for the point stabilizer
  ``G^(l)``; Schreier generators at level ``l`` are formed only from ``T_l``,
  so the top level never sees the (many) deep strong generators;
* transversals are explicit image arrays, extended by breadth-first search
  without ever replacing an existing coset representative, which makes a
  Schreier generator that once sifted to the identity stay verified;
* Schreier generators are sifted in batches as 2-D arrays.

Base points are the least point moved by the generator that created the
level.  Orders are Python integers.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import CapExceeded, ValidationError
from .perm import POINT_DTYPE, Permutation, check_degree

DEFAULT_MEMORY_BUDGET = 2 * 2**30
_BATCH_ELEMENTS = 1 << 21
# residues adopted per failing batch before returning to deeper levels
_GREEDY_RESIDUES = 4


def _least_moved(arr: np.ndarray) -> int:
    moved = np.flatnonzero(arr != np.arange(arr.size, dtype=POINT_DTYPE))
    return int(moved[0])


@dataclass(eq=False)
class _Level:
    base: int
    degree: int
    gens: list[np.ndarray] = field(default_factory=list)
    orbit: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        n = self.degree
        self.pos = np.full(n, -1, dtype=np.int64)
        cap = 4
        self.reps = np.empty((cap, n), dtype=POINT_DTYPE)
        self.reps_inv = np.empty((cap, n), dtype=POINT_DTYPE)
        self.reps[0] = np.arange(n, dtype=POINT_DTYPE)
        self.reps_inv[0] = self.reps[0]
        self.orbit = [self.base]
        self.pos[self.base] = 0
        # explored[k]: number of generators already applied to orbit point k
        self.explored = [0]
        self.checked = np.zeros((cap, 4), dtype=bool)
        self._gen_stack: np.ndarray | None = None

    @property
    def nbytes(self) -> int:
        return self.reps.nbytes + self.reps_inv.nbytes + self.checked.nbytes

    def gen_stack(self) -> np.ndarray:
        if self._gen_stack is None or self._gen_stack.shape[0] != len(self.gens):
            self._gen_stack = np.stack(self.gens)
        return self._gen_stack

    def _grow(self, chain: _Chain, points: int, gens: int) -> None:
        cap_p, cap_g = self.checked.shape
        if points > self.reps.shape[0]:
            new_cap = min(max(points, 2 * self.reps.shape[0]), self.degree)
            extra = 2 * (new_cap - self.reps.shape[0]) * self.degree * self.reps.itemsize
            chain.reserve(extra)
            reps = np.empty((new_cap, self.degree), dtype=POINT_DTYPE)
            reps_inv = np.empty((new_cap, self.degree), dtype=POINT_DTYPE)
            k = len(self.orbit)
            reps[:k] = self.reps[:k]
            reps_inv[:k] = self.reps_inv[:k]
            self.reps, self.reps_inv = reps, reps_inv
        if points > cap_p or gens > cap_g:
            new_p = max(points, cap_p if points <= cap_p else 2 * cap_p)
            new_g = max(gens, cap_g if gens <= cap_g else 2 * cap_g)
            checked = np.zeros((new_p, new_g), dtype=bool)
            checked[:cap_p, :cap_g] = self.checked
            self.checked = checked

    def add_gen(self, chain: _Chain, g: np.ndarray) -> None:
        self.gens.append(g)
        self._grow(chain, len(self.orbit), len(self.gens))
        self.extend_orbit(chain)

    def extend_orbit(self, chain: _Chain) -> None:
        k = 0
        ngens = len(self.gens)
        while k < len(self.orbit):
            start = self.explored[k]
            if start < ngens:
                p = self.orbit[k]
                for gi in range(start, ngens):
                    s = self.gens[gi]
                    q = int(s[p])
                    if self.pos[q] < 0:
                        idx = len(self.orbit)
                        self._grow(chain, idx + 1, ngens)
                        self.orbit.append(q)
                        self.explored.append(0)
                        self.pos[q] = idx
                        rep = s[self.reps[k]]
                        self.reps[idx] = rep
                        self.reps_inv[idx][rep] = np.arange(self.degree, dtype=POINT_DTYPE)
                self.explored[k] = ngens
            k += 1

    def unchecked_pairs(self) -> np.ndarray:
        view = self.checked[: len(self.orbit), : len(self.gens)]
        return np.argwhere(~view)


class _Chain:
    """Mutable stabilizer chain under construction."""

    def __init__(self, degree: int, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> None:
        check_degree(degree)
        self.degree = degree
        self.memory_budget = memory_budget
        self.levels: list[_Level] = []
        self.ident = np.arange(degree, dtype=POINT_DTYPE)
        self._reserved = 0

    def reserve(self, nbytes: int) -> None:
        if self._reserved + nbytes > self.memory_budget:
            raise CapExceeded(
                "transversal storage would exceed the memory budget",
                cap="memory",
                requested=self._reserved + nbytes,
                limit=self.memory_budget,
                degree=self.degree,
                levels=len(self.levels),
            )
        self._reserved += nbytes

    def _new_level(self, g: np.ndarray) -> _Level:
        self.reserve(2 * 4 * self.degree * 4)
        level = _Level(base=_least_moved(g), degree=self.degree)
        self.levels.append(level)
        return level

    # -- sifting -------------------------------------------------------

    def sift(self, elems: np.ndarray, start: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """Sift each row of ``elems`` (modified in place) from level ``start``.

        Returns the residues and, per row, the level at which sifting stopped
        (``len(levels)`` when every level was passed).
        """
        nrows = elems.shape[0]
        stop = np.full(nrows, len(self.levels), dtype=np.int64)
        active = np.arange(nrows)
        for l in range(start, len(self.levels)):
            if active.size == 0:
                break
            level = self.levels[l]
            idx = level.pos[elems[active, level.base]]
            outside = idx < 0
            if outside.any():
                stop[active[outside]] = l
                active = active[~outside]
                idx = idx[~outside]
            moved = idx != 0
            rows = active[moved]
            if rows.size:
                elems[rows] = np.take_along_axis(level.reps_inv[idx[moved]], elems[rows], axis=1)
        return elems, stop

    def contains_array(self, arr: np.ndarray) -> bool:
        residue, stop = self.sift(arr[None, :].copy())
        return bool(stop[0] == len(self.levels) and np.array_equal(residue[0], self.ident))

    # -- construction --------------------------------------------------

    def _add_residue(self, r: np.ndarray, first: int, last: int) -> None:
        """Append ``r`` to the generating sets of levels ``first..last``."""
        r = r.copy()
        r.setflags(write=False)
        for l in range(first, last + 1):
            if l == len(self.levels):
                self._new_level(r)
            self.levels[l].add_gen(self, r)

    def add_generators(self, gens: Iterable[np.ndarray]) -> None:
        for g in gens:
            if np.array_equal(g, self.ident):
                continue
            if not self.levels:
                self._new_level(g)
            g = np.array(g, dtype=POINT_DTYPE)
            g.setflags(write=False)
            self.levels[0].add_gen(self, g)

    def _schreier_batch(self, level: _Level, pairs: np.ndarray) -> np.ndarray:
        gens = level.gen_stack()
        pidx, gidx = pairs[:, 0], pairs[:, 1]
        s = gens[gidx]
        x = np.take_along_axis(s, level.reps[pidx], axis=1)
        images = s[np.arange(len(pairs)), np.asarray(level.orbit, dtype=np.int64)[pidx]]
        qidx = level.pos[images]
        return np.take_along_axis(level.reps_inv[qidx], x, axis=1)

    def _process_level(self, i: int) -> bool:
        level = self.levels[i]
        pairs = level.unchecked_pairs()
        batch = max(1, _BATCH_ELEMENTS // self.degree)
        for start in range(0, len(pairs), batch):
            chunk = pairs[start : start + batch]
            residues, stop = self.sift(self._schreier_batch(level, chunk), i + 1)
            trivial = (stop == len(self.levels)) & (residues == self.ident).all(axis=1)
            ok = chunk[trivial]
            level.checked[ok[:, 0], ok[:, 1]] = True
            bad = np.flatnonzero(~trivial)
            if bad.size == 0:
                continue
            for n, k in enumerate(bad[:_GREEDY_RESIDUES]):
                r, j = residues[k], int(stop[k])
                if n:
                    res2, stop2 = self.sift(r[None, :].copy(), j)
                    r, j = res2[0], int(stop2[0])
                    if j == len(self.levels) and np.array_equal(r, self.ident):
                        level.checked[chunk[k, 0], chunk[k, 1]] = True
                        continue
                self._add_residue(r, i + 1, j)
            return True
        return False

    def complete(self) -> None:
        while True:
            for i in range(len(self.levels) - 1, -1, -1):
                if self.levels[i].unchecked_pairs().size and self._process_level(i):
                    break
            else:
                return

    def random_presift(self, seed: int, patience: int = 30) -> None:
        """Seed the chain with residues of pseudo-random elements.

        Only accelerates; ``complete`` must still run to certify the chain.
        """
        if not self.levels:
            return
        rng = random.Random(seed)
        pool = [g.copy() for g in self.levels[0].gens]
        while len(pool) < 10:
            pool.append(pool[len(pool) % len(self.levels[0].gens)].copy())
        acc = self.ident.copy()
        quiet = 0
        while quiet < patience:
            a, b = rng.sample(range(len(pool)), 2)
            pool[a] = pool[a][pool[b]]
            acc = acc[pool[a]]
            residue, stop = self.sift(acc[None, :].copy())
            j = int(stop[0])
            if j == len(self.levels) and np.array_equal(residue[0], self.ident):
                quiet += 1
                continue
            quiet = 0
            self._add_residue(residue[0], 1, j)

    # -- read-out ------------------------------------------------------

    def order(self) -> int:
        out = 1
        for level in self.levels:
            out *= len(level.orbit)
        return out


class GroupHandle:
    """A permutation group given by generators, with a lazily built chain.

    The chain is built once on first use; afterwards the handle is read-only.
    """

    def __init__(
        self,
        gens: Sequence[Permutation],
        degree: int,
        *,
        memory_budget: int = DEFAULT_MEMORY_BUDGET,
        randomized: bool = False,
        seed: int = 0,
        _chain: _Chain | None = None,
    ) -> None:
        check_degree(degree)
        for g in gens:
            if g.degree != degree:
                raise ValidationError(f"generator of degree {g.degree} in a group of degree {degree}")
        self.degree = degree
        self.gens = list(gens)
        self.memory_budget = memory_budget
        self.randomized = randomized
        self.seed = seed
        self._chain = _chain
        self._order: int | None = None

    @property
    def chain(self) -> _Chain:
        if self._chain is None:
            chain = _Chain(self.degree, self.memory_budget)
            chain.add_generators(g.images for g in self.gens)
            if self.randomized:
                chain.random_presift(self.seed)
            chain.complete()
            self._chain = chain
        return self._chain

    def order(self) -> int:
        if self._order is None:
            self._order = self.chain.order()
        return self._order

    @property
    def base(self) -> list[int]:
        return [level.base for level in self.chain.levels]

    def transversal_sizes(self) -> list[int]:
        return [len(level.orbit) for level in self.chain.levels]

    def strong_generators(self) -> list[Permutation]:
        seen: dict[bytes, Permutation] = {}
        for level in self.chain.levels:
            for g in level.gens:
                seen.setdefault(g.tobytes(), Permutation(g, check=False))
        return list(seen.values())

    def contains(self, p: Permutation) -> bool:
        if p.degree != self.degree:
            raise ValidationError(f"degree mismatch: {p.degree} vs {self.degree}")
        return self.chain.contains_array(p.images)

    def __contains__(self, p: Permutation) -> bool:
        return self.contains(p)

    def contains_all(self, perms: Iterable[Permutation]) -> bool:
        return all(self.contains(p) for p in perms)

    def element_arrays(self, limit: int = 10**4) -> np.ndarray:
        """All elements as rows, identity first; guarded by ``limit``."""
        if self.order() > limit:
            raise CapExceeded(
                f"group order {self.order()} exceeds the enumeration limit {limit}",
                cap="oracle-order",
                requested=self.order(),
                limit=limit,
            )
        elems = self.chain.ident[None, :].copy()
        for level in reversed(self.chain.levels):
            reps = level.reps[: len(level.orbit)]
            # every element is u_0 ∘ u_1 ∘ ... ∘ u_k with u_l from level l
            elems = reps[:, elems].reshape(-1, self.degree)
        return elems

    def elements(self, limit: int = 10**4) -> list[Permutation]:
        return [Permutation(row, check=False) for row in self.element_arrays(limit)]


def build_group(
    gens: Sequence[Permutation],
    degree: int,
    *,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
    randomized: bool = False,
    seed: int = 0,
) -> GroupHandle:
    """Build the group generated by ``gens`` and its stabilizer chain."""
    handle = GroupHandle(gens, degree, memory_budget=memory_budget, randomized=randomized, seed=seed)
    handle.chain
    return handle


def order(handle: GroupHandle) -> int:
    return handle.order()


def contains(handle: GroupHandle, p: Permutation) -> bool:
    return handle.contains(p)


def normal_closure_group(
    ambient_gens: Sequence[Permutation],
    seed_gens: Sequence[Permutation],
    degree: int,
    *,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
) -> GroupHandle:
    """Normal closure of ``<seed_gens>`` under conjugation by ``ambient_gens``.

    Fixed-point loop: conjugate every generator found so far by every ambient
    generator and adopt each conjugate that is not yet a member.
    """
    for g in (*ambient_gens, *seed_gens):
        if g.degree != degree:
            raise ValidationError(f"generator of degree {g.degree} in a group of degree {degree}")
    chain = _Chain(degree, memory_budget)
    found: list[Permutation] = []

    def adopt(p: Permutation) -> bool:
        if chain.contains_array(p.images):
            return False
        chain.add_generators([p.images])
        chain.complete()
        found.append(p)
        return True

    for s in seed_gens:
        adopt(s)
    ambient = [(a, ~a) for a in ambient_gens if not a.is_identity()]
    k = 0
    while k < len(found):
        c = found[k]
        for a, a_inv in ambient:
            adopt(Permutation(a.images[c.images[a_inv.images]], check=False))
        k += 1
    return GroupHandle(found, degree, memory_budget=memory_budget, _chain=chain)


def normal_closure(
    ambient_gens: Sequence[Permutation],
    seed_gens: Sequence[Permutation],
    degree: int,
    *,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
) -> list[Permutation]:
    return normal_closure_group(ambient_gens, seed_gens, degree, memory_budget=memory_budget).gens


def same_subgroup(a: GroupHandle, b: GroupHandle) -> bool:
    if a.degree != b.degree:
        raise ValidationError(f"degree mismatch: {a.degree} vs {b.degree}")
    if a.order() != b.order():
        return False
    return b.contains_all(a.gens) and a.contains_all(b.gens)


def is_normalized_by(handle: GroupHandle, ambient_gens: Sequence[Permutation]) -> tuple[bool, tuple[int, int] | None]:
    """Check every conjugate ``a g a⁻¹`` of a generator lies in the group.

    Returns ``(True, None)`` or ``(False, (generator index, ambient index))``
    for the first failure.
    """
    for ai, a in enumerate(ambient_gens):
        a_inv = ~a
        for gi, g in enumerate(handle.gens):
            conj = Permutation(a.images[g.images[a_inv.images]], check=False)
            if not handle.contains(conj):
                return False, (gi, ai)
    return True, None


def closure_enumerate(gens: Sequence[Permutation], degree: int, limit: int = 10**5) -> set[bytes]:
    """Brute-force element set by breadth-first closure; independent of the chain."""
    ident = np.arange(degree, dtype=POINT_DTYPE)
    seen = {ident.tobytes()}
    frontier = [ident]
    arrays = [g.images for g in gens]
    while frontier:
        nxt = []
        for e in frontier:
            for g in arrays:
                x = g[e]
                key = x.tobytes()
                if key not in seen:
                    seen.add(key)
                    nxt.append(x)
                    if len(seen) > limit:
                        raise CapExceeded("closure enumeration limit exceeded", cap="enumeration", limit=limit)
        frontier = nxt
    return seen
