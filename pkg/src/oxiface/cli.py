"""Command-line interface.

    oxiface check FILE            parse, infer types, validate, insert drops
    oxiface infer-types FILE      report inferred fragment kinds
    oxiface constraints FILE      dump the generated constraint system
    oxiface solve FILE            solve and print the type assignment
    oxiface emit FILE             solve and print Rust declarations (+ report)
    oxiface transform-query A B   is one pointer shape convertible to another?
    oxiface stats FILE            corpus size counters
"""
from __future__ import annotations

import argparse
import json
import sys

from .constraint_gen import Config, Generator, fallback_model, load_config
from .interface_emitter import emit_interface
from .rust_types import (
    ALL_NODES,
    nondestructive,
    transformable,
    witness_path,
)
from .smt_backend import Lowering, solve_program
from .source_ir import (
    ParseError,
    insert_all_drops,
    parse_file,
    print_program,
    validate_program,
)
from .type_inference import infer_types


def _load(path: str, cfg: Config) -> tuple:
    try:
        prog = parse_file(path)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(3) from None
    inference = infer_types(prog)
    errors = inference.diagnostics + validate_program(prog)
    if errors:
        for e in errors:
            print(f"error: {e}", file=sys.stderr)
        raise SystemExit(3)
    prog = insert_all_drops(prog)
    return prog, inference


def _config(args) -> Config:
    cfg = load_config(args.config) if getattr(args, "config", None) else Config()
    if getattr(args, "no_option", False):
        cfg.conservative_option = False
    return cfg


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_check(args) -> int:
    cfg = _config(args)
    prog, inference = _load(args.file, cfg)
    print(
        f"ok: {len(prog.structs)} structs, {len(prog.functions)} functions, "
        f"{prog.num_instructions()} instructions, {prog.num_labels()} labels, "
        f"{inference.resolved} fragment kinds inferred"
    )
    if args.print:
        print(print_program(prog), end="")
    return 0


def cmd_infer(args) -> int:
    prog, inference = _load(args.file, _config(args))
    for label in sorted(prog.frag_of):
        fr = prog.frag_of[label]
        kind = f"struct({fr.struct})" if fr.kind == "struct" else fr.kind
        print(f"@{label}: {kind}")
    print(
        f"# resolved {inference.resolved}, defaulted {inference.defaulted}",
        file=sys.stderr,
    )
    return 0


def cmd_constraints(args) -> int:
    cfg = _config(args)
    prog, _ = _load(args.file, cfg)
    gen = Generator(prog, cfg, args.file)
    system = gen.generate()
    if args.smt:
        _write(Lowering(prog, system, gen).script(), args.out)
    else:
        lines = [c.dump() for c in system.constraints]
        for name, obj in zip(system.objective_names, system.objectives):
            lines.append(f"objective {name} :: {Lowering.objective_expr(obj)}")
        _write("\n".join(lines) + "\n", args.out)
    return 0


def _solve(args):
    cfg = _config(args)
    prog, _ = _load(args.file, cfg)
    res, gen, system = solve_program(
        prog,
        cfg,
        filename=args.file,
        solver_path=args.solver_path,
        timeout=args.timeout,
        sequential=args.sequential,
    )
    if res.status != "sat" and res.detail:
        print(res.detail.strip(), file=sys.stderr)
    return res, gen, system, prog


def cmd_solve(args) -> int:
    res, gen, system, prog = _solve(args)
    if res.status != "sat":
        print(res.status, file=sys.stderr)
        return res.exit_code
    m = res.model
    lines = []
    for label in sorted(prog.frag_of):
        quals = "".join(
            q for q, on in ((" array", label in m.array), (" cell", label in m.cell)) if on
        )
        lines.append(f"@{label}: {m.base.get(label)}{quals}")
    lines.append(f"# objectives: {res.objectives}")
    _write("\n".join(lines) + "\n", args.out)
    return 0


def cmd_emit(args) -> int:
    cfg = _config(args)
    if args.fallback:
        prog, _ = _load(args.file, cfg)
        gen = Generator(prog, cfg, args.file)
        system = gen.generate()
        m = fallback_model(prog, gen)
        bad = system.failures(m)
        if bad:
            for c in bad[:10]:
                print(f"fallback violates: {c.dump()}", file=sys.stderr)
            return 1
        res_model, outlives, objectives = m, {}, system.objective_values(m)
    else:
        res, gen, system, prog = _solve(args)
        if res.status != "sat":
            print(res.status, file=sys.stderr)
            return res.exit_code
        res_model, outlives, objectives = res.model, res.outlives, res.objectives
    out = emit_interface(
        prog,
        res_model,
        gen,
        outlives,
        conservative_option=cfg.conservative_option,
        objectives=objectives,
    )
    if args.json:
        _write(out.report_json() + "\n", args.out)
    else:
        _write(out.declarations, args.out)
    return 0


def _parse_node(text: str) -> tuple[str, bool, bool]:
    parts = text.split("+")
    base, quals = parts[0], set(parts[1:])
    node = (base, "array" in quals, "cell" in quals)
    if node not in ALL_NODES:
        known = ", ".join(sorted({b for b, _, _ in ALL_NODES}))
        raise SystemExit(
            f"error: unknown pointer shape {text!r} "
            f"(expected BASE[+array][+cell] with BASE in {known})"
        )
    return node


def cmd_transform(args) -> int:
    src, dst = _parse_node(args.src), _parse_node(args.dst)
    any_ok = transformable(src, dst)
    solid_ok = nondestructive(src, dst)
    print(f"transformable: {'yes' if any_ok else 'no'}")
    print(f"nondestructive: {'yes' if solid_ok else 'no'}")
    if any_ok:
        path = witness_path(src, dst, solid_only=solid_ok)
        for e in path:
            kind = "keeps operand" if e.solid else "consumes operand"
            print(f"  {e.src} -> {e.dst}  [{e.witness}]  ({kind})")
    return 0 if any_ok else 1


def cmd_stats(args) -> int:
    prog, _ = _load(args.file, _config(args))
    gen = Generator(prog, _config(args), args.file)
    system = gen.generate()
    labels, _ = gen.interface_labels()
    stats = {
        "structs": len(prog.structs),
        "globals": len(prog.globals),
        "functions": len(prog.functions),
        "external_functions": sum(1 for f in prog.functions if f.body is None),
        "instructions": prog.num_instructions(),
        "labels": prog.num_labels(),
        "interface_labels": len(labels),
        "interface_variables": sum(len(s.fields) for s in prog.structs)
        + len(prog.globals)
        + sum(
            len(f.params) + 1
            for f in prog.functions
            if f.body is not None and f.name != "main"
        ),
        "constraints": len(system.constraints),
    }
    print(json.dumps(stats, indent=2))
    return 0


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(
        prog="oxiface",
        description="Infer a memory-safe Rust interface for a three-address source program.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, solver=False):
        p.add_argument("file", help="source program (.sir)")
        p.add_argument("--config", help="JSON config (bounds, allocators, externals)")
        p.add_argument("--out", help="write output to a file instead of stdout")
        p.add_argument(
            "--no-option",
            action="store_true",
            help="do not wrap nullable pointers in Option",
        )
        if solver:
            p.add_argument("--solver-path", help="solver command (overrides bundled z3)")
            p.add_argument("--timeout", type=float, default=300.0, help="seconds")
            p.add_argument(
                "--sequential",
                action="store_true",
                help="minimize objectives one at a time instead of lexicographically",
            )

    p = sub.add_parser("check", help="parse, infer, validate, insert drops")
    common(p)
    p.add_argument("--print", action="store_true", help="print the elaborated program")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("infer-types", help="print inferred fragment kinds")
    common(p)
    p.set_defaults(fn=cmd_infer)

    p = sub.add_parser("constraints", help="dump the constraint system")
    common(p)
    p.add_argument("--smt", action="store_true", help="emit SMT-LIB 2 instead")
    p.set_defaults(fn=cmd_constraints)

    p = sub.add_parser("solve", help="solve and print the per-label assignment")
    common(p, solver=True)
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("emit", help="solve and print Rust interface declarations")
    common(p, solver=True)
    p.add_argument("--json", action="store_true", help="print the full report")
    p.add_argument(
        "--fallback",
        action="store_true",
        help="use the solver-free Rc<RefCell<_>> assignment",
    )
    p.set_defaults(fn=cmd_emit)

    p = sub.add_parser(
        "transform-query", help="query the pointer-shape conversion tables"
    )
    p.add_argument("src", help="e.g. Box, Rc+cell, shared+array")
    p.add_argument("dst")
    p.set_defaults(fn=cmd_transform)

    p = sub.add_parser("stats", help="print program and constraint counters")
    common(p)
    p.set_defaults(fn=cmd_stats)

    args = ap.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
