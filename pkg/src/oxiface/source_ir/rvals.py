"""Derived source types of rvalues, assignment correspondences, and borrow
paths.

The source type of a labeled rvalue starts with the rvalue's own label and
continues with the tail of the operand's declared type: a load drops the
operand's first two fragments, a field address continues with the field's
type minus its head, and everything else drops one fragment.
"""
from __future__ import annotations

from dataclasses import dataclass

from .ir import (
    Assign,
    Const,
    Deref,
    EltAddr,
    FieldAddr,
    FuncDef,
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


class TypingError(Exception):
    pass


def _var_type(func: FuncDef, name: str) -> SourceType:
    try:
        return func.var_type(name)
    except KeyError:
        raise TypingError(f"{func.name}: unknown variable {name}") from None


def rval_source_type(prog: Program, func: FuncDef, rv: Rval) -> SourceType:
    head = prog.frag_of[rv.label]
    e = rv.expr
    if isinstance(e, Const):
        return (head,)
    if isinstance(e, Var):
        return (head,) + tuple(_var_type(func, e.name)[1:])
    if isinstance(e, Deref):
        vty = _var_type(func, e.var)
        if len(vty) < 2:
            raise TypingError(f"{func.name}: *{e.var} dereferences a non-pointer")
        return (head,) + tuple(vty[2:])
    if isinstance(e, FieldAddr):
        vty = _var_type(func, e.var)
        if len(vty) < 2 or vty[1].kind != "struct":
            raise TypingError(f"{func.name}: {e.var} is not a pointer to a struct")
        fty = prog.struct(vty[1].struct).field_type(e.field_name)
        return (head,) + tuple(fty[1:])
    assert isinstance(e, EltAddr)
    vty = _var_type(func, e.var)
    if len(vty) < 2:
        raise TypingError(f"{func.name}: &{e.var}[_] indexes a non-pointer")
    return (head,) + tuple(vty[1:])


@dataclass(frozen=True)
class Cor:
    """One assignment correspondence: dst receives src at (rval, index)."""

    dst: int  # destination fragment label
    src: int  # source fragment label (rvalue type fragment)
    rval: int  # label of the rvalue the pair belongs to
    index: int  # 1-based fragment position within the rvalue type


def _pairs(dst_labels: list[int], rty: SourceType, func: FuncDef, what: str) -> list[Cor]:
    if len(dst_labels) != len(rty):
        raise TypingError(
            f"{func.name}: {what}: destination has {len(dst_labels)} fragments "
            f"but the value has {len(rty)}"
        )
    rv_label = rty[0].label
    return [
        Cor(dst_labels[i], rty[i].label, rv_label, i + 1) for i in range(len(rty))
    ]


def correspondences(prog: Program, func: FuncDef, ins: Instr) -> list[Cor]:
    """Fragment pairings induced by an assignment (calls are excluded; they
    pair through the callee signature instead)."""
    if isinstance(ins, Assign):
        rty = rval_source_type(prog, func, ins.rval)
        return _pairs([fr.label for fr in ins.dtype], rty, func, f"line {ins.line}")
    if isinstance(ins, StoreInstr):
        rty = rval_source_type(prog, func, ins.rval)
        vty = _var_type(func, ins.var)
        if len(vty) < 2:
            raise TypingError(f"{func.name}: *{ins.var} = _ stores through a non-pointer")
        shifted = [fr.label for fr in vty[1 : 1 + len(rty)]]
        return _pairs(shifted, rty, func, f"line {ins.line}")
    if isinstance(ins, PhiInstr):
        out = []
        for rv, _blk in ins.arms:
            rty = rval_source_type(prog, func, rv)
            out.extend(_pairs([fr.label for fr in ins.dtype], rty, func, f"line {ins.line}"))
        return out
    if isinstance(ins, UseInstr) and ins.dest is not None:
        out = []
        for rv in ins.operands:
            rty = rval_source_type(prog, func, rv)
            out.extend(_pairs([fr.label for fr in ins.dtype], rty, func, f"line {ins.line}"))
        return out
    if isinstance(ins, ReturnInstr):
        rty = rval_source_type(prog, func, ins.rval)
        return _pairs([fr.label for fr in func.ret_type], rty, func, f"line {ins.line}")
    return []


# ---------------------------------------------------------------------------
# Borrow paths.


@dataclass(frozen=True)
class Path:
    """A borrowed place: *v, **v, or *(*v).f."""

    var: str
    kind: str  # 'deref1' | 'deref2' | 'field'
    field_name: str | None = None

    def spell(self) -> str:
        if self.kind == "deref1":
            return f"*{self.var}"
        if self.kind == "deref2":
            return f"**{self.var}"
        return f"*(*{self.var}).{self.field_name}"


def borrow_path(rv: Rval) -> Path | None:
    """The place an rvalue borrows; constants borrow nothing."""
    e = rv.expr
    if isinstance(e, Const):
        return None
    if isinstance(e, Var):
        return Path(e.name, "deref1")
    if isinstance(e, Deref):
        return Path(e.var, "deref2")
    if isinstance(e, FieldAddr):
        return Path(e.var, "field", e.field_name)
    assert isinstance(e, EltAddr)
    return Path(e.var, "deref1")


def deep_paths(p: Path, prog: Program, func: FuncDef) -> set[Path]:
    """All places reachable through the given place (used or invalidated
    together with it)."""
    if p.kind == "deref1":
        out = {p}
        vty = _var_type(func, p.var)
        if len(vty) >= 2 and vty[1].kind == "struct":
            for fname, _ in prog.struct(vty[1].struct).fields:
                out.add(Path(p.var, "field", fname))
        return out
    if p.kind == "deref2":
        return {Path(p.var, "deref1"), p}
    return {Path(p.var, "deref1"), p}
