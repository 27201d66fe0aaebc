"""Command-line entry point.

Exit codes: 0 success, 2 invalid input, 3 cap or resource limit,
64 unknown command.  Reports go to stdout; diagnostics go to stderr as one
JSON line each.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Sequence

from . import dot
from .config import RunConfig
from .errors import CapExceeded, GenWreathError, ValidationError, WellDefinednessViolation
from .group_core import (
    FiniteGroup,
    conjugacy_classes,
    group_from_spec,
    hopfian_check_bruteforce,
    normal_subgroups_bruteforce,
    parse_group_arg,
)
from .hopf import hopfian_report
from .perm import set_degree_cap
from .poset import downsets, is_down_closed, parse_poset_json, parse_poset_spec, poset_to_json
from .reduction import Branch, TruncatedTree, descending_witness, node_label, parse_tree, tree_to_group
from .wreath import (
    WreathGroup,
    classify_normal_subgroups_small,
    config_space,
    order_formula,
    quotient_iso_check,
    verify_kernel,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_CAP = 3
EXIT_USAGE = 64

COMMANDS = {
    "wreath": ("build", "order", "normal-subgroups", "quotient-check"),
    "hopf": ("analyze",),
    "reduce": ("tree",),
    "oracle": ("group",),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise ValidationError(f"{self.prog}: {message}")


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--degree-cap", type=int)
    parser.add_argument("--oracle-cap", type=int)
    parser.add_argument("--memory-budget", type=int, help="bytes for transversal storage")
    parser.add_argument("--format", dest="output_format", choices=("json", "dot", "text"), default="json")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--randomized", action="store_true", help="randomized presift, still verified deterministically")
    parser.add_argument("--seed", type=int, default=0)


def _wreath_inputs(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--poset", help="chain:n, antichain:n or a poset JSON file")
    parser.add_argument("--factor", default="A5", help="builtin name or group file, used for every element")
    parser.add_argument("--factors", help="comma-separated factor per element")
    parser.add_argument("--in", dest="instance", help="wreath instance JSON file")


def _build_parser(command: str, sub: str) -> argparse.ArgumentParser:
    parser = _Parser(prog=f"genwreath {command} {sub}")
    _common(parser)
    if command == "wreath":
        _wreath_inputs(parser)
        if sub == "quotient-check":
            parser.add_argument("--gamma", help="comma-separated elements; default: every down-set")
    elif command == "hopf":
        parser.add_argument("--order", required=True, help="linear order: chain:n or a poset JSON file")
        parser.add_argument("--factor", default="A5")
    elif command == "reduce":
        parser.add_argument("--in", dest="instance", required=True, help="tree JSON file")
        parser.add_argument("--factor", default="A5")
        parser.add_argument("--branch", help="declared branch as PREFIX/PERIOD, e.g. 1/0")
        parser.add_argument("--depth", type=int, default=3)
    elif command == "oracle":
        parser.add_argument("--factor", required=True)
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    kwargs: dict[str, Any] = {}
    explicit = set()
    for name in ("degree_cap", "oracle_cap", "memory_budget"):
        value = getattr(args, name)
        if value is not None:
            kwargs[name] = value
            explicit.add(name)
    return RunConfig(
        output_format=args.output_format,
        threads=args.threads,
        deterministic=not args.randomized,
        seed=args.seed,
        explicit=frozenset(explicit),
        **kwargs,
    )


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read {path!r}: {exc.strerror}") from None


def _load_wreath(args: argparse.Namespace, config: RunConfig) -> WreathGroup:
    if args.instance:
        try:
            data = json.loads(_read(args.instance))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"instance file is not JSON: {exc}") from None
        if not isinstance(data, dict) or "poset" not in data or "factors" not in data:
            raise ValidationError("instance file needs 'poset' and 'factors'")
        spec = data["poset"]
        lam = parse_poset_json(spec) if isinstance(spec, dict) else parse_poset_spec(str(spec))
        factors = [group_from_spec(f) for f in data["factors"]]
    else:
        if not args.poset:
            raise ValidationError("either --poset or --in is required")
        lam = parse_poset_spec(args.poset)
        if args.factors:
            factors = [parse_group_arg(f.strip()) for f in args.factors.split(",")]
        else:
            factors = [parse_group_arg(args.factor)] * lam.n
    return WreathGroup(
        config_space(lam, factors),
        threads=config.threads,
        memory_budget=config.memory_budget,
        randomized=not config.deterministic,
        seed=config.seed,
    )


def _describe(w: WreathGroup) -> dict:
    return {
        "poset": poset_to_json(w.space.lam),
        "factors": [f.to_json() for f in w.space.factors],
        "degree": w.degree,
    }


def _wreath(sub: str, args: argparse.Namespace, config: RunConfig) -> tuple[dict, str | None]:
    w = _load_wreath(args, config)
    out = _describe(w)
    if sub == "build":
        handle = w.handle
        out.update(
            {
                "generator_count": len(w.generator_keys()),
                "engine_generators": [{"lam": lam, "h": h} for lam, h in w.engine_keys()],
                "base_length": len(handle.base),
                "transversal_sizes": handle.transversal_sizes(),
                "order": str(handle.order()),
            }
        )
        return out, dot.downset_lattice_dot(w.space.lam)
    if sub == "order":
        formula = order_formula(w.space)
        out["order"] = str(w.order())
        out["formula"] = None if formula is None else str(formula)
        out["formula_matches"] = None if formula is None else formula == w.order()
        return out, None
    if sub == "normal-subgroups":
        report = classify_normal_subgroups_small(w, config.oracle_cap)
        out.update(report.to_json())
        sets = downsets(w.space.lam)
        orders = {tuple(m["downset"]): m["order"] for m in report.matched}
        labels = [f"D order {orders.get(tuple(d.sorted_members()), w.d_gamma(d).order())}" for d in sets]
        return out, dot.lattice_dot(sets, labels)
    if sub == "quotient-check":
        if args.gamma is not None:
            try:
                members = [int(x) for x in args.gamma.split(",") if x.strip()]
            except ValueError:
                raise ValidationError(f"bad --gamma {args.gamma!r}") from None
            if not is_down_closed(w.space.lam, members):
                raise ValidationError(f"{sorted(members)} is not downward closed")
            targets = [members]
        else:
            targets = [d.sorted_members() for d in downsets(w.space.lam)]
        results = []
        for gamma in targets:
            q = quotient_iso_check(w, gamma)
            k = verify_kernel(w, gamma, config.oracle_cap)
            entry = {
                "gamma": q.gamma,
                "quotient_isomorphic": q.ok,
                "kernel_order": str(k.order),
                "kernel_check": k.method,
                "kernel_verified": k.verified,
            }
            if q.mismatch:
                entry["mismatch"] = q.mismatch
            results.append(entry)
        out["checks"] = results
        out["all_ok"] = all(r["quotient_isomorphic"] and r["kernel_verified"] for r in results)
        return out, None
    raise AssertionError(sub)


def _hopf(args: argparse.Namespace, config: RunConfig) -> tuple[dict, str | None]:
    order = parse_poset_spec(args.order)
    factor = parse_group_arg(args.factor)
    report = hopfian_report(
        order,
        factor,
        oracle_limit=config.oracle_cap,
        threads=config.threads,
        memory_budget=config.memory_budget,
        randomized=not config.deterministic,
        seed=config.seed,
    )
    return report.to_json(), report.dot()


def _reduce(args: argparse.Namespace, config: RunConfig) -> tuple[dict, str | None]:
    tree = parse_tree(_read(args.instance))
    factor = parse_group_arg(args.factor)
    witness = None
    if args.branch:
        prefix, _, period = args.branch.partition("/")
        try:
            branch = Branch(
                tuple(int(x) for x in prefix.split(",") if x),
                tuple(int(x) for x in period.split(",") if x) or (0,),
            )
        except ValueError:
            raise ValidationError(f"bad branch {args.branch!r}") from None
        witness = [node_label(n) for n in descending_witness(TruncatedTree(tree, args.depth, branch))]
    report = tree_to_group(tree, factor, config)
    if witness is not None:
        report["descending_witness"] = witness
    return report, report["dot"]


def _oracle(args: argparse.Namespace, config: RunConfig) -> tuple[dict, str | None]:
    g: FiniteGroup = parse_group_arg(args.factor)
    cert = hopfian_check_bruteforce(g)
    normals = normal_subgroups_bruteforce(g)
    out = {
        "group": g.label,
        "size": g.size,
        "abelian": g.is_abelian(),
        "conjugacy_classes": conjugacy_classes(g),
        "normal_subgroup_orders": [int(n.sum()) for n in normals],
        "endomorphisms": cert.endomorphism_count,
        "surjective_endomorphisms": [phi.tolist() for phi in cert.surjective],
        "hopfian": cert.hopfian,
    }
    return out, None


def _text(report: dict) -> str:
    lines = []
    for key, value in report.items():
        if key == "dot":
            continue
        lines.append(f"{key}: {json.dumps(value, separators=(',', ':')) if not isinstance(value, str) else value}")
    return "\n".join(lines) + "\n"


def _emit(report: dict, dot_text: str | None, fmt: str) -> str:
    if fmt == "dot":
        if dot_text is None:
            raise ValidationError("this command has no DOT output")
        return dot_text
    if fmt == "text":
        return _text(report)
    return json.dumps(report, indent=2) + "\n"


def _diagnose(exc: GenWreathError) -> None:
    sys.stderr.write(json.dumps(exc.diagnostic(), sort_keys=True, default=str) + "\n")


def run(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if len(argv) < 2 or argv[0] not in COMMANDS or argv[1] not in COMMANDS[argv[0]]:
        got = " ".join(argv[:2]) or "(none)"
        known = [f"{c} {s}" for c, subs in COMMANDS.items() for s in subs]
        sys.stderr.write(json.dumps({"error": "unknown-command", "message": f"unknown command {got!r}", "known": known}) + "\n")
        return EXIT_USAGE
    command, sub = argv[0], argv[1]
    previous_cap = None
    try:
        args = _build_parser(command, sub).parse_args(argv[2:])
        config = _config(args)
        previous_cap = set_degree_cap(config.degree_cap)
        if command == "wreath":
            report, dot_text = _wreath(sub, args, config)
        elif command == "hopf":
            report, dot_text = _hopf(args, config)
        elif command == "reduce":
            report, dot_text = _reduce(args, config)
        else:
            report, dot_text = _oracle(args, config)
        text = _emit(report, dot_text, config.output_format)
    except (ValidationError, WellDefinednessViolation) as exc:
        _diagnose(exc)
        return EXIT_INVALID
    except CapExceeded as exc:
        _diagnose(exc)
        return EXIT_CAP
    except MemoryError:
        sys.stderr.write(json.dumps({"error": "out-of-memory", "message": "allocation failed"}) + "\n")
        return EXIT_CAP
    finally:
        if previous_cap is not None:
            set_degree_cap(previous_cap)
    sys.stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
