"""Canonical pretty printer. Always writes explicit @N: labels, so parsing
the output reproduces the same program (a fixpoint after one round trip)."""
from __future__ import annotations

from .ir import (
    Alloca,
    Assign,
    CallInstr,
    CondBr,
    Const,
    Deref,
    DropInstr,
    EltAddr,
    FieldAddr,
    FuncDef,
    Goto,
    Instr,
    PhiInstr,
    Program,
    ReturnInstr,
    Rval,
    SourceType,
    StoreInstr,
    UseInstr,
    Var,
)


def fmt_type(ty: SourceType) -> str:
    return "<" + ", ".join(f"@{fr.label}: {fr.spell()}" for fr in ty) + ">"


def fmt_expr(rv: Rval) -> str:
    e = rv.expr
    if isinstance(e, Var):
        body = e.name
    elif isinstance(e, Const):
        body = e.spell()
    elif isinstance(e, Deref):
        body = f"*{e.var}"
    elif isinstance(e, FieldAddr):
        body = f"&*(*{e.var}).{e.field_name}"
    else:
        assert isinstance(e, EltAddr)
        idx = e.index.name if isinstance(e.index, Var) else e.index.spell()
        body = f"&{e.var}[{idx}]"
    return f"@{rv.label}: {body}"


def fmt_instr(ins: Instr) -> str:
    prefix = f"{ins.block}: " if ins.block else ""
    if isinstance(ins, Alloca):
        s = f"{fmt_type(ins.dtype)} {ins.dest} = alloca({ins.size.spell()});"
    elif isinstance(ins, Assign):
        s = f"{fmt_type(ins.dtype)} {ins.dest} = {fmt_expr(ins.rval)};"
    elif isinstance(ins, StoreInstr):
        s = f"*{ins.var} = {fmt_expr(ins.rval)};"
    elif isinstance(ins, CallInstr):
        args = ", ".join(fmt_expr(a) for a in ins.args)
        head = f"{fmt_type(ins.dtype)} {ins.dest} = " if ins.dest else ""
        s = f"{head}{ins.func}({args});"
    elif isinstance(ins, PhiInstr):
        arms = ", ".join(f"{fmt_expr(rv)}: {blk}" for rv, blk in ins.arms)
        s = f"{fmt_type(ins.dtype)} {ins.dest} = phi({arms});"
    elif isinstance(ins, UseInstr):
        ops = ", ".join(fmt_expr(o) for o in ins.operands)
        head = f"{fmt_type(ins.dtype)} {ins.dest} = " if ins.dest else ""
        s = f"{head}use({ops});"
    elif isinstance(ins, Goto):
        s = f"goto {ins.target};"
    elif isinstance(ins, CondBr):
        s = f"if ({fmt_expr(ins.cond)}) goto {ins.then_target}; else goto {ins.else_target};"
    elif isinstance(ins, ReturnInstr):
        s = f"return {fmt_expr(ins.rval)};"
    else:
        assert isinstance(ins, DropInstr)
        s = f"drop({', '.join(ins.names)});"
    return prefix + s


def fmt_function(f: FuncDef) -> str:
    params = ", ".join(f"{fmt_type(ty)} {name}" for name, ty in f.params)
    head = f"{fmt_type(f.ret_type)} {f.name}({params})"
    if f.body is None:
        return head + ";"
    lines = [head + " {"]
    for ins in f.body:
        lines.append("  " + fmt_instr(ins))
    lines.append("}")
    return "\n".join(lines)


def print_program(prog: Program) -> str:
    parts = []
    for s in prog.structs:
        lines = [f"struct {s.name} {{"]
        for fname, fty in s.fields:
            lines.append(f"  {fmt_type(fty)} {fname};")
        lines.append("}")
        parts.append("\n".join(lines))
    for g in prog.globals:
        parts.append(f"{fmt_type(g.gtype)} {g.name} = {g.init.spell()};")
    for f in prog.functions:
        parts.append(fmt_function(f))
    return "\n\n".join(parts) + "\n"
