"""Fill in omitted source type fragments.

A fragment written as `?` parses with kind "unknown". Every assignment,
store, phi arm, use operand, return, and call pairs fragments of two types
position by position; unifying those pairs propagates known kinds to the
unknown slots. Conflicting known kinds in one class are reported as
diagnostics (the usual cause is a pointer used polymorphically).
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .source_ir.ir import CallInstr, FieldAddr, Frag, FuncDef, Program
from .source_ir.parser import rvals_of
from .source_ir.rvals import TypingError, correspondences, rval_source_type


@dataclass
class InferenceResult:
    resolved: int = 0  # unknown fragments that received a kind
    defaulted: int = 0  # unknown fragments left unconstrained (kept unknown)
    diagnostics: list[str] = field(default_factory=list)


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict[int, int] = {}

    def find(self, x: int) -> int:
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def _call_pairs(prog: Program, func: FuncDef, ins: CallInstr) -> list[tuple[int, int]]:
    callee = prog.function(ins.func)
    if callee is None:
        return []
    pairs: list[tuple[int, int]] = []
    for arg, (_, pty) in zip(ins.args, callee.params):
        aty = rval_source_type(prog, func, arg)
        for fa, fp in zip(aty, pty):
            pairs.append((fa.label, fp.label))
    if ins.dest is not None and ins.dtype is not None:
        for fd, fr in zip(ins.dtype, callee.ret_type):
            pairs.append((fd.label, fr.label))
    return pairs


def _shape_pass(prog: Program) -> int:
    """Kinds forced by type shape alone.

    Every non-final fragment of a multi-fragment type is a pointer, and the
    operand of a field access ends in a struct; when the field name names
    exactly one struct, that pins the struct too.
    """
    changed = 0
    all_types = []
    for s in prog.structs:
        all_types += [ty for _, ty in s.fields]
    for g in prog.globals:
        all_types.append(g.gtype)
    for f in prog.functions:
        all_types.append(f.ret_type)
        all_types += [ty for _, ty in f.params]
        for ins in f.body or []:
            if getattr(ins, "dtype", None) is not None:
                all_types.append(ins.dtype)
    for ty in all_types:
        for fr in ty[:-1]:
            if fr.kind == "unknown":
                fr.kind = "ptr"
                changed += 1

    field_owner: dict[str, set[str]] = {}
    for s in prog.structs:
        for name, _ in s.fields:
            field_owner.setdefault(name, set()).add(s.name)
    for f in prog.functions:
        for ins in f.body or []:
            for rv in rvals_of(ins):
                if not isinstance(rv.expr, FieldAddr):
                    continue
                vty = f.var_type(rv.expr.var)
                tail = vty[-1]
                owners = field_owner.get(rv.expr.field_name, set())
                if tail.kind == "unknown" and len(owners) == 1:
                    tail.kind, tail.struct = "struct", next(iter(owners))
                    changed += 1
    return changed


def infer_types(prog: Program) -> InferenceResult:
    """Resolve unknown fragment kinds in place."""
    res = InferenceResult()
    for _ in range(1 + len(prog.frag_of)):
        res.diagnostics = []
        progress = _shape_pass(prog)

        uf = _UnionFind()
        for f in prog.functions:
            for ins in f.body or []:
                try:
                    if isinstance(ins, CallInstr):
                        for a, b in _call_pairs(prog, f, ins):
                            uf.union(a, b)
                    else:
                        for c in correspondences(prog, f, ins):
                            uf.union(c.dst, c.src)
                except TypingError as exc:
                    res.diagnostics.append(str(exc))

        classes: dict[int, list[Frag]] = {}
        for label, frag in prog.frag_of.items():
            classes.setdefault(uf.find(label), []).append(frag)

        conflicts: list[str] = []
        for members in classes.values():
            known = [fr for fr in members if fr.kind != "unknown"]
            kinds = {(fr.kind, fr.struct) for fr in known}
            if len(kinds) > 1:
                shown = ", ".join(
                    sorted(k if s is None else f"{k}({s})" for k, s in kinds)
                )
                conflicts.append(f"conflicting fragment kinds in one class: {shown}")
                continue
            if known:
                kind, struct = known[0].kind, known[0].struct
                for fr in members:
                    if fr.kind == "unknown":
                        fr.kind, fr.struct = kind, struct
                        res.resolved += 1
                        progress += 1
        res.diagnostics += conflicts
        if not progress:
            break
    res.defaulted = sum(1 for fr in prog.frag_of.values() if fr.kind == "unknown")
    return res
