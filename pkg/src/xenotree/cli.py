"""Command-line interface: ``xenotree <command> [options]``.

Exit status is 0 on acceptance or success, 1 on rejection or a nonzero
edit cost, and 2 on usage, input or output errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections.abc import Sequence

from . import editing, oracle, relio
from .core2s import StructureError, TwoStructure, monochromatic_subgraphs
from .generate import GenSpec, generate
from .moddecomp import bits_to_list, is_dicograph
from .treerep import (
    CLUSTER_BOUND,
    LABEL_BOUND,
    TreeError,
    build_tree_representation,
    recognize_unp,
    summarize,
)

EXIT_OK, EXIT_REJECT, EXIT_ERROR = 0, 1, 2
THREADS_ENV = "XENOTREE_THREADS"


class CliError(Exception):
    pass


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1").strip() or "1"
    try:
        value = int(raw)
    except ValueError:
        raise CliError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if value < 0:
        raise CliError(f"{THREADS_ENV} must be >= 0")
    return value or (os.cpu_count() or 1)


def _read_structure(args) -> TwoStructure:
    fmt = args.format
    text = relio.read_text_arg(args.input)
    if fmt is None and args.input not in (None, "-") and args.input.lower().endswith((".tsv", ".txt")):
        fmt = "tsv"
    if fmt in (None, "json"):
        return relio.parse_structure(text)
    if fmt == "tsv":
        return relio.parse_tsv(text, args.default_label)
    raise CliError(f"unknown input format {fmt!r}")


def _emit(args, text: str) -> None:
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)


def _print_report(args, lines: list[str], data: dict) -> None:
    if args.json:
        print(json.dumps(data, ensure_ascii=False, indent=2))
    else:
        print("\n".join(lines))


def _name_sets(clusters, names) -> list[list[str]]:
    return [[names[i] for i in bits_to_list(c)] for c in clusters]


# --------------------------------------------------------------------------
# commands


def cmd_recognize(args) -> int:
    g = _read_structure(args)
    rec = recognize_unp(g, workers=worker_count())
    names = g.vertices
    data: dict = {"unp": rec.accepted, "n": g.n, "labels": len(g.used_labels())}
    if rec.accepted:
        tree = build_tree_representation(g, rec)
        distinct = sorted(rec.clusters.with_singletons(), key=lambda c: (-c.bit_count(), c))
        data["tree"] = relio.tree_to_data(tree)
        data["clusters"] = _name_sets(distinct, names)
        lines = ["UNP", f"tree: {summarize(tree)}", f"strong modules: {len(distinct)}"]
        _print_report(args, lines, data)
        return EXIT_OK
    cert = rec.certificate
    data["certificate"] = cert.to_dict(names)
    lines = ["NOT UNP", f"certificate: {cert.describe(names)}"]
    if cert.kind in (LABEL_BOUND, CLUSTER_BOUND):
        # the bound alone gives no witness; run the full pipeline for one
        full = recognize_unp(g, early_exit=False)
        if full.certificate is not None:
            data["diagnostic"] = full.certificate.to_dict(names)
            lines.append(f"diagnostic: {full.certificate.describe(names)}")
    _print_report(args, lines, data)
    return EXIT_REJECT


def cmd_tree(args) -> int:
    g = _read_structure(args)
    rec = recognize_unp(g, workers=worker_count())
    if not rec.accepted:
        print(f"NOT UNP: {rec.certificate.describe(g.vertices)}", file=sys.stderr)
        return EXIT_REJECT
    tree = build_tree_representation(g, rec)
    _emit(args, relio.dumps_tree(tree, args.tree_format))
    return EXIT_OK


def cmd_encode(args) -> int:
    rs = relio.parse_relations(relio.read_text_arg(args.input))
    g = relio.encode_relations(rs, args.mode, args.label_by)
    _emit(args, relio.dumps_structure(g))
    return EXIT_OK


def cmd_edit(args) -> int:
    g = _read_structure(args)
    mode = editing.normalize_mode(args.mode)
    if args.export_lp:
        model = editing.build_ilp(g, mode, args.star)
        text = editing.emit_lp(model)
        if args.export_lp == "-":
            sys.stdout.write(text)
        else:
            with open(args.export_lp, "w", encoding="utf-8") as fh:
                fh.write(text)
            _print_report(
                args,
                [f"wrote {args.export_lp}: {model.num_variables} variables, {len(model.constraints)} constraints"],
                {"variables": model.num_variables, "constraints": len(model.constraints)},
            )
        return EXIT_OK
    result = editing.exact_edit(g, mode, args.budget, args.star)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(relio.dumps_structure(result.structure))
    changed = [list(p) for p in result.changed]
    lines = [f"cost: {result.cost}"]
    lines += [f"relabel ({x},{y}): {g.phi(x, y)} -> {result.structure.phi(x, y)}" for x, y in result.changed]
    _print_report(args, lines, {"mode": mode, "cost": result.cost, "changed": changed})
    return EXIT_OK if result.cost == 0 else EXIT_REJECT


def cmd_gen(args) -> int:
    spec = GenSpec(
        leaves=args.leaves,
        labels=args.labels,
        seed=args.seed,
        caterpillar=args.caterpillar,
        symmetric=args.symmetric,
        perturb=args.perturb,
    )
    tree, g = generate(spec)
    _emit(args, relio.dumps_structure(g))
    if args.tree:
        with open(args.tree, "w", encoding="utf-8") as fh:
            fh.write(relio.dumps_tree(tree, args.tree_format))
    return EXIT_OK


def cmd_oracle(args) -> int:
    g = _read_structure(args)
    checks = ["modules", "prime", "unp34", "u1", "u2"] if args.check == "all" else [args.check]
    lines, data, failed = [], {}, False
    for check in checks:
        if check == "modules":
            mods = oracle.enumerate_modules(g)
            strong = oracle.strong_modules_bruteforce(g)
            nontrivial = sorted((sorted(m) for m in mods if 1 < len(m) < g.n), key=lambda m: (len(m), m))
            data["modules"] = [[g.vertices[i] for i in m] for m in nontrivial]
            data["strong_modules"] = [
                [g.vertices[i] for i in sorted(m)] for m in sorted(strong, key=lambda m: (-len(m), sorted(m)))
            ]
            shown = ", ".join("{" + ",".join(m) + "}" for m in data["modules"]) or "none"
            lines.append(f"modules: {len(mods)} total; nontrivial: {shown}")
        elif check == "prime":
            data["prime"] = oracle.is_prime(g)
            lines.append(f"prime: {'yes' if data['prime'] else 'no'}")
        else:
            if check == "unp34":
                ok = oracle.unp_small(g)
            elif check == "u1":
                bad = [lab for lab, G in monochromatic_subgraphs(g).items() if not is_dicograph(G)]
                ok = not bad
                if bad:
                    data["u1_failing_labels"] = bad
            else:
                ok = oracle.triangle_condition(g)
            data[check] = ok
            failed |= not ok
            lines.append(f"{check}: {'pass' if ok else 'fail'}")
    _print_report(args, lines, data)
    return EXIT_REJECT if failed else EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-i", "--input", default="-", help="input file ('-' for stdin)")
    common.add_argument("-o", "--output", help="output file (default stdout)")
    common.add_argument("--json", action="store_true", help="machine-readable report")
    common.add_argument("--seed", type=int, default=0, help="random seed")

    structure = argparse.ArgumentParser(add_help=False)
    structure.add_argument("--format", choices=["json", "tsv"], help="input format (default: by extension)")
    structure.add_argument("--default-label", help="label for pairs missing from TSV input")

    parser = argparse.ArgumentParser(prog="xenotree", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("recognize", parents=[common, structure], help="decide whether a 2-structure is unp")
    p.set_defaults(func=cmd_recognize)

    p = sub.add_parser("tree", parents=[common, structure], help="write the tree representation")
    p.add_argument("--tree-format", choices=["json", "newick"], default="json")
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("encode", parents=[common], help="encode a relation system as a 2-structure")
    p.add_argument("--mode", choices=["disjoint", "bitvector"], help="default: from the file's disjoint flag")
    p.add_argument("--label-by", choices=["index", "name"], default="index")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("edit", parents=[common, structure], help="ILP export or exact editing")
    p.add_argument("--mode", choices=["edit", "complete", "delete"], default="edit")
    action = p.add_mutually_exclusive_group(required=True)
    action.add_argument("--export-lp", metavar="PATH", help="write the ILP in LP format")
    action.add_argument("--exact", action="store_true", help="exhaustive optimum (tiny inputs)")
    p.add_argument("--star", default=editing.STAR, help="the symbol for unknown pairs")
    p.add_argument("--budget", type=int, default=4, help="largest edit count tried by --exact")
    p.set_defaults(func=cmd_edit)

    p = sub.add_parser("gen", parents=[common], help="random event tree and its 2-structure")
    p.add_argument("--leaves", type=int, default=8)
    p.add_argument("--labels", type=int, default=3)
    p.add_argument("--caterpillar", type=float, default=0.25, help="shape bias in [0, 1]")
    p.add_argument("--symmetric", action="store_true", help="only (i,i) node labels")
    p.add_argument("--perturb", type=float, default=0.0, help="fraction of pairs to relabel")
    p.add_argument("--tree", metavar="PATH", help="also write the generating tree")
    p.add_argument("--tree-format", choices=["json", "newick"], default="json")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("oracle", parents=[common, structure], help="brute-force reference checks")
    p.add_argument("--check", choices=["modules", "prime", "unp34", "u1", "u2", "all"], default="all")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (
        OSError,
        CliError,
        relio.FormatError,
        StructureError,
        TreeError,
        editing.EditError,
        oracle.OracleGuardError,
        ValueError,
    ) as exc:
        print(f"xenotree {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
