"""Dense permutations of ``0..degree-1``.

Composition convention, used everywhere in the package: ``compose(p, q)`` is
the map ``x -> p(q(x))``, i.e. the right factor is applied first.  With image
arrays this is simply ``p.images[q.images]``.
"""

from __future__ import annotations

import re
from typing import Iterable, Sequence

import numpy as np

from .errors import CapExceeded, ValidationError

DEFAULT_DEGREE_CAP = 2**20
_degree_cap = DEFAULT_DEGREE_CAP

POINT_DTYPE = np.int32


def degree_cap() -> int:
    return _degree_cap


def set_degree_cap(cap: int) -> int:
    """Set the global degree cap and return the previous value."""
    global _degree_cap
    if cap < 1:
        raise ValidationError("degree cap must be positive", cap=cap)
    previous, _degree_cap = _degree_cap, int(cap)
    return previous


def check_degree(degree: int) -> None:
    if degree > _degree_cap:
        raise CapExceeded(
            f"degree {degree} exceeds the degree cap {_degree_cap}",
            cap="degree",
            requested=degree,
            limit=_degree_cap,
        )


class Permutation:
    """An immutable permutation stored as its image array."""

    __slots__ = ("images", "_hash")

    def __init__(self, images: Iterable[int] | np.ndarray, *, check: bool = True) -> None:
        arr = np.array(images, dtype=POINT_DTYPE)
        if arr.ndim != 1:
            raise ValidationError("image array must be one-dimensional")
        check_degree(arr.size)
        if check:
            seen = np.zeros(arr.size, dtype=bool)
            if arr.size and (arr.min() < 0 or arr.max() >= arr.size):
                raise ValidationError("image out of range", degree=int(arr.size))
            seen[arr] = True
            if not seen.all():
                raise ValidationError("images do not form a bijection", degree=int(arr.size))
        arr.setflags(write=False)
        self.images = arr
        self._hash: int | None = None

    @classmethod
    def identity(cls, degree: int) -> Permutation:
        return cls(np.arange(degree, dtype=POINT_DTYPE), check=False)

    @classmethod
    def from_cycles(cls, cycles: Sequence[Sequence[int]], degree: int) -> Permutation:
        images = np.arange(degree, dtype=POINT_DTYPE)
        seen: set[int] = set()
        for cycle in cycles:
            for a in cycle:
                if not 0 <= a < degree:
                    raise ValidationError(f"point {a} outside degree {degree}")
                if a in seen:
                    raise ValidationError(f"point {a} repeated")
                seen.add(a)
            for a, b in zip(cycle, list(cycle[1:]) + list(cycle[:1])):
                images[a] = b
        return cls(images, check=False)

    @property
    def degree(self) -> int:
        return int(self.images.size)

    def __call__(self, point: int) -> int:
        return int(self.images[point])

    def __mul__(self, other: Permutation) -> Permutation:
        return compose(self, other)

    def __invert__(self) -> Permutation:
        return inverse(self)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Permutation):
            return NotImplemented
        return np.array_equal(self.images, other.images)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.images.tobytes())
        return self._hash

    def __repr__(self) -> str:
        return f"Permutation({format_cycles(self)!r}, degree={self.degree})"

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.images, np.arange(self.degree)))

    def support(self) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.images != np.arange(self.degree)).tolist())

    def cycles(self) -> list[tuple[int, ...]]:
        """Non-trivial cycles, each starting at its least point, ordered by that point."""
        seen = np.zeros(self.degree, dtype=bool)
        out = []
        for start in range(self.degree):
            if seen[start] or self.images[start] == start:
                continue
            cycle = [start]
            seen[start] = True
            nxt = int(self.images[start])
            while nxt != start:
                cycle.append(nxt)
                seen[nxt] = True
                nxt = int(self.images[nxt])
            out.append(tuple(cycle))
        return out

    def to_json(self) -> list[int]:
        return self.images.tolist()


def _same_degree(p: Permutation, q: Permutation) -> None:
    if p.degree != q.degree:
        raise ValidationError(f"degree mismatch: {p.degree} vs {q.degree}")


def compose(p: Permutation, q: Permutation) -> Permutation:
    """Return ``p ∘ q``: apply ``q`` first, then ``p``."""
    _same_degree(p, q)
    return Permutation(p.images[q.images], check=False)


def inverse(p: Permutation) -> Permutation:
    inv = np.empty_like(p.images)
    inv[p.images] = np.arange(p.degree, dtype=POINT_DTYPE)
    return Permutation(inv, check=False)


def conjugate(g: Permutation, by: Permutation) -> Permutation:
    """Return ``by ∘ g ∘ by⁻¹``."""
    _same_degree(g, by)
    return compose(compose(by, g), inverse(by))


_CYCLE_RE = re.compile(r"\(([^()]*)\)")


def parse_cycles(text: str, degree: int) -> Permutation:
    """Parse disjoint-cycle notation such as ``"(0 1 2)(3 4)"`` or ``"()"``."""
    stripped = text.strip()
    if not stripped:
        raise ValidationError("empty cycle text")
    leftover = _CYCLE_RE.sub("", stripped)
    if leftover.strip():
        raise ValidationError(f"malformed cycle text {text!r}")
    cycles = []
    for body in _CYCLE_RE.findall(stripped):
        tokens = [t for t in re.split(r"[\s,]+", body.strip()) if t]
        try:
            points = [int(t) for t in tokens]
        except ValueError:
            raise ValidationError(f"malformed cycle text {text!r}") from None
        if len(points) > 1:
            cycles.append(points)
        elif len(points) == 1 and not 0 <= points[0] < degree:
            raise ValidationError(f"point {points[0]} outside degree {degree}")
    return Permutation.from_cycles(cycles, degree)


def format_cycles(p: Permutation) -> str:
    cycles = p.cycles()
    if not cycles:
        return "()"
    return "".join("(" + " ".join(map(str, c)) + ")" for c in cycles)
