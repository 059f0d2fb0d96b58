"""Command-line driver.

Exit codes: 0 evaluated, 1 violation (with ``--fail-on-violation``) or
counterexample (``verify``), 2 usage or parse error, 3 size-limit refusal.
Structured output is one JSON document on stdout; logs go to stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from groupfair.efficiency import AdversaryMode, check_gpe, check_lottery_gpe, gpe_table, is_downward_monotone
from groupfair.envy import check_alpha, check_gef, is_monotone_matrix
from groupfair.groups import WelfareKind, expected_agent_utilities
from groupfair.model import (
    ADDITIVE,
    MODEL_KINDS,
    PRESETS,
    Allocation,
    InstanceError,
    Lottery,
    SizeLimitExceeded,
    allocation_cube,
    check_size,
    dumps,
    format_rational,
    instance_to_dict,
    lottery_to_dict,
    parse_allocation,
    parse_instance,
    parse_lottery,
    parse_rational,
    random_instance,
    theorem6_instance,
)
from groupfair.prices import INF, PRICE_FUNCTIONS
from groupfair.verify import run_verify

log = logging.getLogger("groupfair")

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_SIZE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _rational(text):
    try:
        return parse_rational(text)
    except InstanceError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _read(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _value(v):
    if v is None:
        return "undefined"
    if v == INF:
        return "+inf"
    return format_rational(v)


def _alloc_doc(alloc):
    if alloc is None:
        return None
    return list(alloc.assignment)


def _names(inst, group):
    return [inst.agents[a] for a in group]


def _emit(args, doc, table_lines):
    if args.output == "table":
        sys.stdout.write("\n".join(table_lines) + "\n")
    else:
        sys.stdout.write(dumps(doc))


# --------------------------------------------------------------------------
# commands


def cmd_check(args):
    inst = parse_instance(_read(args.instance))
    alloc = parse_allocation(_read(args.allocation), inst)
    v = check_gef(inst, alloc, args.k, args.h, args.alpha)
    doc = {"command": "check", "property": "GEF", "k": v.k, "h": v.h, "alpha": format_rational(v.alpha),
           "holds": v.holds, "witness": None}
    lines = [f"GEF k={v.k} h={v.h} alpha={format_rational(v.alpha)}: {'holds' if v.holds else 'fails'}"]
    if v.witness:
        G, H, own, cross = v.witness
        doc["witness"] = {"G": list(G), "H": list(H), "G_names": _names(inst, G), "H_names": _names(inst, H),
                          "own": format_rational(own), "cross": format_rational(cross)}
        lines.append(f"witness: G={_names(inst, G)} H={_names(inst, H)} own={format_rational(own)} "
                     f"cross={format_rational(cross)}  (own ~ {float(own):.4g}, cross ~ {float(cross):.4g})")
    _emit(args, doc, lines)
    return EXIT_VIOLATION if args.fail_on_violation and not v.holds else EXIT_OK


def cmd_taxonomy(args):
    from groupfair import kernels
    from groupfair.envy import _cube_for_alpha
    from groupfair.model import group_tables

    inst = parse_instance(_read(args.instance))
    alloc = parse_allocation(_read(args.allocation), inst)
    alpha = check_alpha(args.alpha)
    tab, cnt, _ = group_tables(inst.n)
    V1, p, q = _cube_for_alpha(allocation_cube(inst, alloc), inst, alpha)
    grid = kernels.gef_matrix(V1[None], tab, cnt, p, q)[0]
    gpe = [check_gpe(inst, alloc, k, alpha, args.max_size).holds for k in range(1, inst.n + 1)]
    monotone = is_monotone_matrix(grid) and is_downward_monotone(gpe)
    doc = {"command": "taxonomy", "alpha": format_rational(alpha),
           "gef_matrix": [[bool(x) for x in row] for row in grid],
           "gpe_vector": gpe, "monotone": monotone}
    n = inst.n
    lines = [f"GEF^alpha matrix (alpha={format_rational(alpha)}), rows k, columns h",
             "      " + " ".join(f"h={h}" for h in range(1, n + 1))]
    for k in range(1, n + 1):
        lines.append(f"k={k}   " + " ".join(f"{'T' if grid[k - 1, h - 1] else 'F':>3}" for h in range(1, n + 1)))
    lines.append("GPE^alpha vector: " + " ".join(f"k={k}:{'T' if g else 'F'}" for k, g in enumerate(gpe, 1)))
    lines.append(f"monotone: {'yes' if monotone else 'no'}")
    _emit(args, doc, lines)
    return EXIT_OK if monotone else EXIT_VIOLATION


def cmd_gpe(args):
    inst = parse_instance(_read(args.instance))
    alloc = parse_allocation(_read(args.allocation), inst)
    ks = [args.k] if args.k is not None else list(range(1, inst.n + 1))
    results = []
    lines = []
    for k in ks:
        v = check_gpe(inst, alloc, k, args.alpha, args.max_size)
        results.append({"k": k, "holds": v.holds, "dominator": _alloc_doc(v.dominator)})
        lines.append(f"GPE k={k} alpha={format_rational(v.alpha)}: {'holds' if v.holds else 'fails'}"
                     + (f"  dominator={_alloc_doc(v.dominator)}" if v.dominator else ""))
    doc = {"command": "gpe", "alpha": format_rational(Fraction(args.alpha)), "results": results}
    _emit(args, doc, lines)
    failed = any(not r["holds"] for r in results)
    return EXIT_VIOLATION if args.fail_on_violation and failed else EXIT_OK


def cmd_prices(args):
    inst = parse_instance(_read(args.instance))
    check_size(inst, args.max_size)
    kinds = list(WelfareKind) if args.welfare == "all" else [WelfareKind(args.welfare)]
    prices = {}
    lines = []
    for w in kinds:
        prices[w.value] = {}
        for name, fn in PRICE_FUNCTIONS.items():
            r = fn(inst, w, args.max_size)
            prices[w.value][name] = {"value": _value(r.value), "layers": r.params,
                                     "numerator_allocation": _alloc_doc(r.numerator),
                                     "denominator_allocation": _alloc_doc(r.denominator)}
            hint = f"  (~ {float(r.value):.6g})" if r.value not in (None, INF) else ""
            lines.append(f"{name:>4} {w.value:<12} {_value(r.value)}{hint}")
    _emit(args, {"command": "prices", "prices": prices}, lines)
    return EXIT_OK


def cmd_lottery(args):
    inst = parse_instance(_read(args.instance))
    lot = parse_lottery(_read(args.lottery), inst)
    v = check_lottery_gpe(inst, lot, args.k, args.mode, args.alpha, args.max_size)
    dom = v.dominator
    if isinstance(dom, Lottery):
        dom_doc = lottery_to_dict(dom)
    elif isinstance(dom, Allocation):
        dom_doc = {"assignment": _alloc_doc(dom)}
    else:
        dom_doc = None
    doc = {"command": "lottery", "k": v.k, "mode": AdversaryMode(args.mode).value,
           "alpha": format_rational(v.alpha), "holds": v.holds,
           "expected_utilities": [format_rational(u) for u in expected_agent_utilities(inst, lot)],
           "dominator": dom_doc}
    lines = [f"lottery GPE k={v.k} mode={doc['mode']} alpha={doc['alpha']}: {'holds' if v.holds else 'fails'}",
             "expected utilities: " + " ".join(doc["expected_utilities"])]
    if dom_doc:
        lines.append(f"dominator: {json.dumps(dom_doc)}")
    _emit(args, doc, lines)
    return EXIT_VIOLATION if args.fail_on_violation and not v.holds else EXIT_OK


def cmd_verify(args):
    report = run_verify(seed=args.seed, instances=args.instances, max_n=args.max_n, max_m=args.max_m,
                        lotteries=args.lotteries, eps=args.eps, workers=args.workers,
                        max_size=args.max_size)
    lines = [f"{t['id']:<20} {t['status']:<22} instances={t['instances_checked']} "
             f"allocations={t['allocations_checked']} counterexamples={len(t['counterexamples'])}"
             for t in report["theorems"]]
    _emit(args, report, lines)
    return EXIT_OK if report["ok"] else EXIT_VIOLATION


def cmd_gen(args):
    if args.preset == "theorem6":
        if args.n is None:
            raise UsageError("--preset theorem6 needs --n")
        inst = theorem6_instance(args.n, args.eps)
    elif args.preset:
        inst = PRESETS[args.preset]()
    else:
        if args.n is None or args.m is None:
            raise UsageError("gen needs --n and --m (or --preset)")
        inst = random_instance(args.n, args.m, args.model, args.value_bound, args.seed)
    text = dumps(instance_to_dict(inst))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--max-size", type=int, default=None,
                        help="refuse allocation spaces larger than this (default 10^7, env GROUPFAIR_MAX_SIZE)")
    common.add_argument("--output", choices=("structured", "table"), default="structured")
    common.add_argument("--fail-on-violation", action="store_true")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="groupfair", description="Group envy-freeness, group Pareto "
                                     "efficiency and prices of group fairness by exact enumeration.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="decide GEF^alpha_{k,h} for an allocation")
    p.add_argument("--instance", required=True)
    p.add_argument("--allocation", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--alpha", type=_rational, default=Fraction(1))
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("taxonomy", parents=[common], help="full GEF matrix and GPE vector")
    p.add_argument("--instance", required=True)
    p.add_argument("--allocation", required=True)
    p.add_argument("--alpha", type=_rational, default=Fraction(1))
    p.set_defaults(func=cmd_taxonomy)

    p = sub.add_parser("gpe", parents=[common], help="decide GPE^alpha_k for an allocation")
    p.add_argument("--instance", required=True)
    p.add_argument("--allocation", required=True)
    p.add_argument("--k", type=int, default=None, help="group size (default: every k)")
    p.add_argument("--alpha", type=_rational, default=Fraction(1))
    p.set_defaults(func=cmd_gpe)

    p = sub.add_parser("prices", parents=[common], help="prices of group fairness")
    p.add_argument("--instance", required=True)
    p.add_argument("--welfare", choices=[w.value for w in WelfareKind] + ["all"], default="all")
    p.set_defaults(func=cmd_prices)

    p = sub.add_parser("lottery", parents=[common], help="GPE^alpha_k of a lottery")
    p.add_argument("--instance", required=True)
    p.add_argument("--lottery", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--mode", choices=[m.value for m in AdversaryMode], default=AdversaryMode.DETERMINISTIC.value)
    p.add_argument("--alpha", type=_rational, default=Fraction(1))
    p.set_defaults(func=cmd_lottery)

    p = sub.add_parser("verify", parents=[common], help="check the implication and price theorems by enumeration")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--max-n", type=int, default=3)
    p.add_argument("--max-m", type=int, default=4)
    p.add_argument("--lotteries", type=int, default=50)
    p.add_argument("--eps", type=_rational, default=Fraction(1, 1000))
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", parents=[common], help="write an instance document")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--model", choices=MODEL_KINDS, default=ADDITIVE)
    p.add_argument("--value-bound", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--preset", choices=sorted(PRESETS) + ["theorem6"])
    p.add_argument("--eps", type=_rational, default=Fraction(1, 100))
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except SizeLimitExceeded as exc:
        print(f"groupfair: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except (UsageError, InstanceError, ValueError) as exc:
        print(f"groupfair: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
