"""Generalized wreath products over finite posets, their normal subgroups,
and the linear-order-to-group construction at finite scale."""

from .bsgs import GroupHandle, build_group, normal_closure, same_subgroup
from .errors import CapExceeded, GenWreathError, ValidationError, WellDefinednessViolation
from .group_core import FiniteGroup, builtin_group
from .perm import Permutation, compose, conjugate, format_cycles, inverse, parse_cycles
from .poset import DownSet, Poset, downsets, make_antichain, make_chain, opposite
from .wreath import ConfigSpace, WreathGroup, config_space, wreath_group

__all__ = [
    "CapExceeded",
    "ConfigSpace",
    "DownSet",
    "FiniteGroup",
    "GenWreathError",
    "GroupHandle",
    "Permutation",
    "Poset",
    "ValidationError",
    "WellDefinednessViolation",
    "WreathGroup",
    "build_group",
    "builtin_group",
    "compose",
    "config_space",
    "conjugate",
    "downsets",
    "format_cycles",
    "inverse",
    "make_antichain",
    "make_chain",
    "normal_closure",
    "opposite",
    "parse_cycles",
    "same_subgroup",
    "wreath_group",
]
