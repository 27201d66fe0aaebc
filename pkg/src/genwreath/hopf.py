"""Groups attached to finite linear orders, and their normal-subgroup chains.

For a linear order ``W`` the group ``G_W`` is the wreath product over the
opposite order with one copy of the factor (A5 unless told otherwise) per
element.  Everything here is a finite check: the chain of kernels, the
quotients by initial-segment kernels, and two Hopfian verdicts (a brute-force
endomorphism search when the group is small, and a chain-length comparison
that works at any size).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import dot
from .group_core import FiniteGroup, builtin_group, hopfian_check_bruteforce
from .errors import ValidationError
from .poset import DownSet, Poset, downsets, is_linear, linear_sequence, opposite, restrict
from .wreath import (
    ORACLE_ORDER_LIMIT,
    WreathGroup,
    config_space,
    d_gamma_group,
    d_gamma_membership,
    element_table,
    generator_indices,
    quotient_action,
    quotient_iso_check,
)

COUNT_CONVENTION = "chain counts the trivial and the full subgroup: |W| + 1 members"
FINITE_GAP = (
    "finite orders are well-orders, so the non-Hopfian branch cannot occur; "
    "only the quotient mechanism it relies on is checked"
)


def build_group_for_order(w: Poset, factor: FiniteGroup | None = None, **kwargs) -> WreathGroup:
    if not is_linear(w):
        raise ValidationError("the order must be linear")
    factor = factor or builtin_group("A5")
    lam = opposite(w)
    return WreathGroup(config_space(lam, [factor] * lam.n), **kwargs)


@dataclass
class ChainEntry:
    downset: list[int]
    order: int


@dataclass
class NormalChain:
    entries: list[ChainEntry]
    totally_ordered: bool
    unique_maxima: bool
    strictly_increasing: bool

    @property
    def count(self) -> int:
        return len(self.entries)


def normal_chain(g: WreathGroup) -> NormalChain:
    lam = g.space.lam
    sets = downsets(lam)
    totally_ordered = all(a.members <= b.members for a, b in zip(sets, sets[1:]))
    unique_maxima = True
    for ds in sets[1:]:
        maxima = [i for i in ds.members if not any(lam.lt(i, j) for j in ds.members)]
        unique_maxima &= len(maxima) == 1
    strict = True
    entries = []
    for prev, cur in zip([None, *sets], sets):
        handle = d_gamma_group(g, cur)
        entries.append(ChainEntry(cur.sorted_members(), handle.order()))
        if prev is None:
            continue
        smaller = d_gamma_group(g, prev)
        # inclusion, then a witness for strictness
        strict &= handle.contains_all(smaller.gens)
        new = sorted(cur.members - prev.members)
        witness = g.generators(new[:1])
        strict &= bool(witness) and not d_gamma_membership(g, witness[0], prev)
    return NormalChain(entries, totally_ordered, unique_maxima, strict)


@dataclass
class SegmentCheck:
    k: int
    ok: bool
    kernel: list[int]
    mismatch: dict | None = None


def segment_quotient_check(w: Poset, k: int, factor: FiniteGroup | None = None, group: WreathGroup | None = None) -> SegmentCheck:
    """Quotient of ``G_W`` by the kernel of the final segment ``W \\ L``.

    ``L`` is the initial segment of the first ``k`` elements; the quotient is
    compared generator by generator with an independently built ``G_L``.
    """
    if not 0 <= k <= w.n:
        raise ValidationError(f"segment length {k} outside 0..{w.n}")
    g = group or build_group_for_order(w, factor)
    factor = g.space.factors[0] if g.space.factors else factor
    seq = linear_sequence(w)
    initial = sorted(seq[:k])
    kernel = sorted(seq[k:])
    check = quotient_iso_check(g, kernel)
    if not check.ok:
        return SegmentCheck(k, False, kernel, check.mismatch)
    small = build_group_for_order(restrict(w, initial), factor, threads=g.threads, memory_budget=g.memory_budget)
    if small.space.lam != restrict(g.space.lam, initial):
        return SegmentCheck(k, False, kernel, {"reason": "segment order differs"})
    relabel = np.asarray(check.relabeling, dtype=np.int64)
    for lam in initial:
        for h in range(1, g.space.radices[lam]):
            induced = quotient_action(g, g.xi(lam, h), kernel).images
            target = small.xi(initial.index(lam), h).images
            bad = np.flatnonzero(relabel[induced] != target[relabel])
            if bad.size:
                return SegmentCheck(k, False, kernel, {"lam": lam, "h": h, "class": int(bad[0])})
    return SegmentCheck(k, True, kernel)


@dataclass
class HopfReport:
    order_description: list[str]
    factor: str
    degree: int
    group_order: int
    chain: NormalChain
    segment_checks: list[SegmentCheck]
    hopfian: bool
    methods: dict[str, bool]
    oracle_details: dict = field(default_factory=dict)
    chain_argument: list[dict] = field(default_factory=list)
    lam: Poset | None = None

    def dot(self) -> str:
        nodes = [DownSet(self.lam, frozenset(e.downset)) for e in self.chain.entries]
        return dot.lattice_dot(nodes, [f"order {e.order}" for e in self.chain.entries], name="normal_chain")

    def to_json(self) -> dict:
        return {
            "order": self.order_description,
            "factor": self.factor,
            "degree": self.degree,
            "group_order": str(self.group_order),
            "chain": [{"downset": e.downset, "order": str(e.order)} for e in self.chain.entries],
            "chain_length": self.chain.count,
            "count_convention": COUNT_CONVENTION,
            "chain_totally_ordered": self.chain.totally_ordered,
            "chain_unique_maxima": self.chain.unique_maxima,
            "chain_strictly_increasing": self.chain.strictly_increasing,
            "segment_checks": [
                {"k": s.k, "ok": s.ok, "kernel": s.kernel, **({"mismatch": s.mismatch} if s.mismatch else {})}
                for s in self.segment_checks
            ],
            "hopfian": self.hopfian,
            "methods": self.methods,
            "oracle": self.oracle_details,
            "chain_argument": self.chain_argument,
            "note": FINITE_GAP,
        }


def hopfian_report(
    w: Poset,
    factor: FiniteGroup | None = None,
    oracle_limit: int = ORACLE_ORDER_LIMIT,
    group: WreathGroup | None = None,
    **kwargs,
) -> HopfReport:
    """Normal chain, segment quotients and a Hopfian verdict for ``G_w``.

    ``group`` reuses an already built ``G_w`` (it must come from
    ``build_group_for_order(w, factor)``).
    """
    g = group or build_group_for_order(w, factor, **kwargs)
    factor = g.space.factors[0] if g.space.factors else builtin_group("A5")
    seq = linear_sequence(w)
    chain = normal_chain(g)
    segments = [segment_quotient_check(w, k, group=g) for k in range(w.n + 1)]

    methods: dict[str, bool] = {}
    oracle: dict = {"ran": False}
    if g.order() <= oracle_limit:
        table, elements = element_table(g, oracle_limit)
        cert = hopfian_check_bruteforce(table, generator_indices(g, elements))
        methods["oracle"] = cert.hopfian
        oracle = {
            "ran": True,
            "endomorphisms": cert.endomorphism_count,
            "surjective": len(cert.surjective),
            "non_injective_surjective": len(cert.non_injective_surjections),
        }

    # quotients by non-trivial kernels have strictly shorter chains
    full_length = w.n + 1
    argument = []
    chain_ok = chain.count == full_length and chain.strictly_increasing and chain.totally_ordered
    for ds in downsets(g.space.lam)[1:]:
        rest = [i for i in range(w.n) if i not in ds.members]
        quotient_length = len(downsets(restrict(g.space.lam, rest)))
        ok = quotient_length == w.n - len(ds.members) + 1 and quotient_length < full_length
        chain_ok &= ok
        argument.append({"kernel": ds.sorted_members(), "quotient_chain_length": quotient_length, "ok": ok})
    methods["chain-argument"] = chain_ok and all(s.ok for s in segments)

    return HopfReport(
        order_description=[w.names[i] for i in seq],
        factor=factor.label,
        degree=g.degree,
        group_order=g.order(),
        chain=chain,
        segment_checks=segments,
        hopfian=all(methods.values()),
        methods=methods,
        oracle_details=oracle,
        chain_argument=argument,
        lam=g.space.lam,
    )
