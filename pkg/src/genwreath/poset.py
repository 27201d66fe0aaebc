"""Finite partial orders on ``0..n-1`` and their lattices of down-sets."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import CapExceeded, ValidationError

DOWNSET_LIMIT = 20
ISOMORPHISM_LIMIT = 8


class Poset:
    """Immutable finite poset; ``leq[i, j]`` is true iff ``i <= j``.

    ``names`` is optional display data carried from input files.
    """

    __slots__ = ("n", "leq", "names")

    def __init__(self, leq: np.ndarray | Sequence[Sequence[bool]], names: Sequence[str] | None = None) -> None:
        arr = np.array(leq, dtype=bool)
        if arr.size == 0:
            arr = arr.reshape(0, 0)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValidationError("order relation must be a square table")
        n = arr.shape[0]
        if not arr.diagonal().all():
            raise ValidationError("order relation is not reflexive")
        if (arr & arr.T & ~np.eye(n, dtype=bool)).any():
            raise ValidationError("order relation is not antisymmetric")
        # transitive iff leq∘leq ⊆ leq
        composed = (arr.astype(np.int64) @ arr.astype(np.int64)) > 0
        if (composed & ~arr).any():
            raise ValidationError("order relation is not transitive")
        arr.setflags(write=False)
        self.n = n
        self.leq = arr
        if names is not None and len(names) != n:
            raise ValidationError("one name per element required")
        self.names = tuple(names) if names is not None else tuple(str(i) for i in range(n))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Poset):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.leq, other.leq)

    def __hash__(self) -> int:
        return hash((self.n, self.leq.tobytes()))

    def __repr__(self) -> str:
        return f"Poset(n={self.n}, covers={self.covers()})"

    def lt(self, i: int, j: int) -> bool:
        return i != j and bool(self.leq[i, j])

    def above(self, i: int) -> list[int]:
        """Elements strictly greater than ``i``."""
        return [j for j in range(self.n) if self.lt(i, j)]

    def covers(self) -> list[tuple[int, int]]:
        out = []
        for i, j in itertools.permutations(range(self.n), 2):
            if self.lt(i, j) and not any(self.lt(i, k) and self.lt(k, j) for k in range(self.n)):
                out.append((i, j))
        return sorted(out)


@dataclass(frozen=True)
class DownSet:
    poset: Poset
    members: frozenset[int]

    def __post_init__(self) -> None:
        if not is_down_closed(self.poset, self.members):
            raise ValidationError(f"{sorted(self.members)} is not downward closed")

    @property
    def key(self) -> tuple[int, int]:
        return (len(self.members), sum(1 << i for i in self.members))

    def sorted_members(self) -> list[int]:
        return sorted(self.members)

    def label(self) -> str:
        return "{" + ",".join(self.poset.names[i] for i in self.sorted_members()) + "}"


def _from_relation(n: int, pairs: Iterable[tuple[int, int]], names: Sequence[str] | None = None) -> Poset:
    leq = np.eye(n, dtype=bool)
    for a, b in pairs:
        leq[a, b] = True
    # reflexive-transitive closure (Warshall)
    for k in range(n):
        leq |= leq[:, k : k + 1] & leq[k : k + 1, :]
    return Poset(leq, names)


def make_chain(n: int) -> Poset:
    if n < 1:
        raise ValidationError("a chain needs at least one element", n=n)
    return Poset(np.triu(np.ones((n, n), dtype=bool)))


def make_antichain(n: int) -> Poset:
    if n < 1:
        raise ValidationError("an antichain needs at least one element", n=n)
    return Poset(np.eye(n, dtype=bool))


def opposite(p: Poset) -> Poset:
    return Poset(p.leq.T.copy(), p.names)


def is_down_closed(p: Poset, s: Iterable[int]) -> bool:
    members = set(s)
    for j in members:
        if not 0 <= j < p.n:
            raise ValidationError(f"element {j} outside poset of size {p.n}")
        if any(p.leq[i, j] and i not in members for i in range(p.n)):
            return False
    return True


def is_up_closed(p: Poset, s: Iterable[int]) -> bool:
    return is_down_closed(opposite(p), s)


def downsets(p: Poset) -> list[DownSet]:
    """All downward-closed subsets, by cardinality then bit value."""
    if p.n > DOWNSET_LIMIT:
        raise CapExceeded(f"down-set enumeration limited to {DOWNSET_LIMIT} elements", cap="downsets", requested=p.n, limit=DOWNSET_LIMIT)
    below = [sum(1 << i for i in range(p.n) if p.leq[i, j]) for j in range(p.n)]
    found = []
    for mask in range(1 << p.n):
        if all(below[j] & ~mask == 0 for j in range(p.n) if mask >> j & 1):
            found.append(mask)
    found.sort(key=lambda m: (bin(m).count("1"), m))
    return [DownSet(p, frozenset(i for i in range(p.n) if m >> i & 1)) for m in found]


def is_linear(p: Poset) -> bool:
    return bool((p.leq | p.leq.T).all())


def restrict(p: Poset, s: Iterable[int]) -> Poset:
    """Induced order on ``s``, re-indexed in increasing index order."""
    keep = sorted(set(s))
    for i in keep:
        if not 0 <= i < p.n:
            raise ValidationError(f"element {i} outside poset of size {p.n}")
    idx = np.array(keep, dtype=np.int64)
    return Poset(p.leq[np.ix_(idx, idx)].copy(), [p.names[i] for i in keep])


def linear_sequence(p: Poset) -> list[int]:
    """Elements of a linear order listed from least to greatest."""
    if not is_linear(p):
        raise ValidationError("order is not linear")
    return sorted(range(p.n), key=lambda i: int(p.leq[:, i].sum()))


def is_isomorphic(p: Poset, q: Poset) -> bool:
    """Backtracking isomorphism test for posets of at most eight elements."""
    if max(p.n, q.n) > ISOMORPHISM_LIMIT:
        raise CapExceeded(f"isomorphism testing limited to {ISOMORPHISM_LIMIT} elements", cap="isomorphism", limit=ISOMORPHISM_LIMIT)
    if p.n != q.n:
        return False
    n = p.n

    def signature(r: Poset, i: int) -> tuple[int, int]:
        return int(r.leq[:, i].sum()), int(r.leq[i, :].sum())

    sig_p = [signature(p, i) for i in range(n)]
    sig_q = [signature(q, i) for i in range(n)]
    if sorted(sig_p) != sorted(sig_q):
        return False
    image = [-1] * n
    used = [False] * n

    def extend(i: int) -> bool:
        if i == n:
            return True
        for j in range(n):
            if used[j] or sig_q[j] != sig_p[i]:
                continue
            if all(p.leq[i, k] == q.leq[j, image[k]] and p.leq[k, i] == q.leq[image[k], j] for k in range(i)):
                image[i], used[j] = j, True
                if extend(i + 1):
                    return True
                used[j] = False
        image[i] = -1
        return False

    return extend(0)


def parse_poset_json(data: dict | str) -> Poset:
    """Load ``{"elements": [...], "covers": [[a, b], ...]}``; ``a < b`` per cover."""
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"poset file is not JSON: {exc}") from None
    if not isinstance(data, dict) or "elements" not in data:
        raise ValidationError("poset file needs an 'elements' list")
    names = [str(e) for e in data["elements"]]
    if len(set(names)) != len(names):
        raise ValidationError("duplicate element names")
    index = {name: i for i, name in enumerate(names)}
    pairs = []
    for cover in data.get("covers", []):
        if not isinstance(cover, (list, tuple)) or len(cover) != 2:
            raise ValidationError(f"malformed cover {cover!r}")
        a, b = (str(x) for x in cover)
        if a not in index or b not in index:
            raise ValidationError(f"cover {cover!r} names an unknown element")
        if a == b:
            raise ValidationError(f"cover {cover!r} is reflexive")
        pairs.append((index[a], index[b]))
    return _from_relation(len(names), pairs, names)


def parse_poset_spec(text: str) -> Poset:
    """``chain:n`` / ``antichain:n`` shorthand, or a path to a poset file."""
    kind, _, count = text.partition(":")
    if kind in ("chain", "antichain") and count:
        try:
            n = int(count)
        except ValueError:
            raise ValidationError(f"bad poset shorthand {text!r}") from None
        return make_chain(n) if kind == "chain" else make_antichain(n)
    try:
        with open(text, encoding="utf-8") as fh:
            return parse_poset_json(fh.read())
    except OSError as exc:
        raise ValidationError(f"cannot read poset {text!r}: {exc.strerror}") from None


def poset_to_json(p: Poset) -> dict:
    return {"elements": list(p.names), "covers": [[p.names[a], p.names[b]] for a, b in p.covers()]}


def all_posets(n: int) -> list[Poset]:
    """Every labelled poset on ``n`` elements (small ``n`` only)."""
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    out = set()
    for bits in range(1 << len(pairs)):
        leq = np.eye(n, dtype=bool)
        for k, (i, j) in enumerate(pairs):
            if bits >> k & 1:
                leq[i, j] = True
        try:
            out.add(Poset(leq))
        except ValidationError:
            continue
    return sorted(out, key=lambda p: p.leq.tobytes())


def posets_up_to_isomorphism(n: int) -> list[Poset]:
    reps: list[Poset] = []
    for p in all_posets(n):
        if not any(is_isomorphic(p, q) for q in reps):
            reps.append(p)
    return reps
