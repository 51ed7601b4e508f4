"""Structural validation of parsed programs."""
from __future__ import annotations

from .ir import (
    CallInstr,
    CondBr,
    FuncDef,
    Goto,
    PhiInstr,
    Program,
    SourceType,
    StoreInstr,
    Var,
    decl_of,
)
from .rvals import TypingError, correspondences, rval_source_type


class ValidationError(Exception):
    pass


def _check_type(ty: SourceType, what: str, errors: list[str]) -> None:
    if not ty:
        errors.append(f"{what}: empty type")
        return
    for fr in ty[:-1]:
        if fr.kind not in ("ptr", "unknown"):
            errors.append(f"{what}: non-final fragment must be a pointer")
    if ty[-1].kind == "ptr":
        errors.append(f"{what}: final fragment cannot be a bare pointer")


def validate_program(prog: Program, allow_unknown: bool = False) -> list[str]:
    """Return a list of diagnostics; empty means the program is well-formed."""
    errors: list[str] = []

    names: set[str] = set()
    for kind, items in (
        ("struct", prog.structs),
        ("global", prog.globals),
        ("function", prog.functions),
    ):
        for item in items:
            if item.name in names:
                errors.append(f"duplicate top-level name {item.name!r}")
            names.add(item.name)

    # Label density: labels are 0..n-1 with no gaps.
    labels = sorted(prog.frag_of)
    if labels and (labels[0] != 0 or labels[-1] != len(labels) - 1):
        errors.append(
            f"labels are not dense: {len(labels)} labels, max {labels[-1] if labels else -1}"
        )

    for s in prog.structs:
        fnames = set()
        for fname, fty in s.fields:
            if fname in fnames:
                errors.append(f"struct {s.name}: duplicate field {fname}")
            fnames.add(fname)
            _check_type(fty, f"struct {s.name}.{fname}", errors)
            if fty[-1].kind == "struct" and not any(
                x.name == fty[-1].struct for x in prog.structs
            ):
                errors.append(f"struct {s.name}.{fname}: unknown struct {fty[-1].struct}")
    for g in prog.globals:
        _check_type(g.gtype, f"global {g.name}", errors)
    for f in prog.functions:
        _validate_function(prog, f, errors, allow_unknown)
    return errors


def _validate_function(
    prog: Program, f: FuncDef, errors: list[str], allow_unknown: bool
) -> None:
    _check_type(f.ret_type, f"{f.name}: return type", errors)
    declared: dict[str, SourceType] = {}
    for pname, pty in f.params:
        if pname in declared:
            errors.append(f"{f.name}: duplicate parameter {pname}")
        declared[pname] = pty
        _check_type(pty, f"{f.name}: parameter {pname}", errors)
    if f.body is None:
        return

    block_labels = {ins.block for ins in f.body if ins.block is not None}
    for ins in f.body:
        decl = decl_of(ins)
        if decl is not None:
            name, ty = decl
            if name in declared:
                errors.append(f"{f.name} line {ins.line}: {name} declared twice")
            declared[name] = ty
            _check_type(ty, f"{f.name} line {ins.line}: {name}", errors)

    def check_var(name: str, line: int) -> bool:
        if name not in declared:
            errors.append(f"{f.name} line {line}: undeclared variable {name}")
            return False
        return True

    for ins in f.body:
        if isinstance(ins, (Goto, CondBr)):
            targets = (
                [ins.target] if isinstance(ins, Goto) else [ins.then_target, ins.else_target]
            )
            for t in targets:
                if t not in block_labels:
                    errors.append(f"{f.name} line {ins.line}: no block named {t}")
        if isinstance(ins, PhiInstr):
            for _, blk in ins.arms:
                if blk not in block_labels:
                    errors.append(f"{f.name} line {ins.line}: phi references no block {blk}")
        if isinstance(ins, CallInstr):
            if prog.has_function(ins.func):
                callee = prog.function(ins.func)
                if len(ins.args) != len(callee.params):
                    errors.append(
                        f"{f.name} line {ins.line}: {ins.func} takes "
                        f"{len(callee.params)} arguments, got {len(ins.args)}"
                    )
                if ins.dest is not None and len(ins.dtype) != len(callee.ret_type):
                    errors.append(
                        f"{f.name} line {ins.line}: destination arity differs from "
                        f"{ins.func} return type"
                    )
                for arg, (pname, pty) in zip(ins.args, callee.params):
                    if isinstance(arg.expr, Var) and check_var(arg.expr.name, ins.line):
                        if len(declared[arg.expr.name]) != len(pty):
                            errors.append(
                                f"{f.name} line {ins.line}: argument {arg.expr.name} "
                                f"arity differs from parameter {pname}"
                            )
        if isinstance(ins, StoreInstr) and check_var(ins.var, ins.line):
            if len(declared[ins.var]) < 2:
                errors.append(f"{f.name} line {ins.line}: *{ins.var} needs a pointer")

        for v in sorted(_read_vars(ins)):
            check_var(v, ins.line)

        # Fragment-count agreement between destinations and rvalues.
        try:
            correspondences(prog, f, ins)
            from .parser import rvals_of

            for rv in rvals_of(ins):
                rval_source_type(prog, f, rv)
        except (TypingError, KeyError) as e:
            errors.append(f"{f.name} line {ins.line}: {e}")

    # Unknown fragments are fine for inference input; callers that need a
    # fully typed program check separately via has_unknowns().


def _read_vars(ins) -> set[str]:
    from .cfg import var_uses

    return var_uses(ins)


def has_unknowns(prog: Program) -> bool:
    return any(
        fr.kind == "unknown"
        for label, fr in prog.frag_of.items()
        if prog.site_of[label].kind != "rval"
    )
