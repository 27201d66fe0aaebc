from __future__ import annotations

from dataclasses import dataclass, field

from .bsgs import DEFAULT_MEMORY_BUDGET
from .errors import ValidationError
from .perm import DEFAULT_DEGREE_CAP
from .wreath import ORACLE_ORDER_LIMIT

FORMATS = ("json", "dot", "text")


@dataclass(frozen=True)
class RunConfig:
    degree_cap: int = DEFAULT_DEGREE_CAP
    oracle_cap: int = ORACLE_ORDER_LIMIT
    memory_budget: int = DEFAULT_MEMORY_BUDGET
    output_format: str = "json"
    deterministic: bool = True
    threads: int = 1
    seed: int = 0
    # names of the settings that were given explicitly rather than defaulted
    explicit: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        for name in ("degree_cap", "oracle_cap", "memory_budget", "threads"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be positive", setting=name, value=getattr(self, name))
        if self.output_format not in FORMATS:
            raise ValidationError(f"unknown output format {self.output_format!r}", known=list(FORMATS))

    def provenance(self) -> dict:
        """Caps in effect and where each came from."""
        out = {}
        for name in ("degree_cap", "oracle_cap", "memory_budget"):
            out[name] = {"value": getattr(self, name), "source": "argument" if name in self.explicit else "default"}
        return out
