"""Rendering a solved model as Rust interface declarations plus a report.

Only interface variables are rendered: struct fields, globals, and the
parameters/returns of defined functions.  Body-less external declarations
stay on the foreign side and are omitted.

Lifetimes: struct generic parameters are emitted only for indices some field
actually uses; function signatures elide lifetimes whenever Rust's elision
rules reconstruct them (no reference return, or a single input lifetime).
Nullability is tracked per fragment-equality class: a class that receives
the null constant renders behind Option.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .constraint_gen.fallback import label_classes
from .constraint_gen.formulas import Model
from .constraint_gen.generate import Generator
from .rust_types import PTR_BASES, REF_BASES, RustFrag, render_type
from .source_ir.ir import Const, FuncDef, Program, SourceType


def _letter(i: int) -> str:
    # 'a, 'b, ..., 'z, 'a1, 'b1, ...
    q, r = divmod(i, 26)
    return f"'{chr(ord('a') + r)}{q if q else ''}"


@dataclass
class EmitResult:
    declarations: str
    report: dict

    def report_json(self) -> str:
        return json.dumps(self.report, indent=2, sort_keys=True)


class Emitter:
    def __init__(
        self,
        prog: Program,
        model: Model,
        gen: Generator,
        outlives: dict | None = None,
        conservative_option: bool = True,
    ):
        self.prog = prog
        self.m = model
        self.gen = gen
        self.outlives = outlives or {}
        self.conservative_option = conservative_option
        self.nullable = self._nullable_labels() if conservative_option else set()
        self.struct_used = self._struct_used_indices()

    # --------------------------------------------------------------- facts

    def _nullable_labels(self) -> set[int]:
        """Pointer fragments whose equality class receives the null constant.

        Wrapping every pointer in Option would also be correct; precise
        null tracking is orthogonal to ownership and mutability, so only the
        storage classes that are literally assigned null are wrapped."""
        classes = label_classes(self.prog, self.gen)
        seeds = set()
        for f in self.gen.defined_funcs():
            for info in self.gen.rvals[f.name]:
                e = info.rval.expr
                if isinstance(e, Const) and e.value is None:
                    seeds.add(info.label)
        roots = {classes[s] for s in seeds}
        return {l for l in self.prog.frag_of if classes[l] in roots}

    def _struct_used_indices(self) -> dict[str, list[int]]:
        """Generic-lifetime indices of each struct that some field uses."""
        used: dict[str, set[int]] = {s.name: set() for s in self.prog.structs}
        changed = True
        while changed:
            changed = False
            for s in self.prog.structs:
                g = self.m.gen.get(s.name, 0)
                for _, ty in s.fields:
                    for fr in ty:
                        if fr.kind == "ptr":
                            if self.m.base.get(fr.label) in REF_BASES:
                                v = self.m.rl.get(fr.label, 0)
                                if 1 <= v <= g and v not in used[s.name]:
                                    used[s.name].add(v)
                                    changed = True
                        elif fr.kind == "struct":
                            for j in sorted(used.get(fr.struct, ())):
                                v = self.m.slt_at(fr.label, j)
                                if 1 <= v <= g and v not in used[s.name]:
                                    used[s.name].add(v)
                                    changed = True
        return {name: sorted(vals) for name, vals in used.items()}

    # ------------------------------------------------------------- fragments

    def rust_frags(self, ty: SourceType) -> list[tuple[int, RustFrag]]:
        out = []
        for fr in ty:
            base = self.m.base.get(fr.label, "unknown")
            if base.startswith("struct:"):
                name = base.split(":", 1)[1]
                args = tuple(
                    self.m.slt_at(fr.label, j)
                    for j in self.struct_used.get(name, [])
                )
                rf = RustFrag("struct", struct=name, struct_args=args)
            elif base in PTR_BASES:
                rf = RustFrag(
                    base,
                    ref_lifetime=self.m.rl.get(fr.label),
                    array=fr.label in self.m.array,
                    cell=fr.label in self.m.cell,
                )
            else:
                rf = RustFrag(base)
            out.append((fr.label, rf))
        return out

    def render(self, ty: SourceType, lifetime_name) -> str:
        pairs = self.rust_frags(ty)
        null_ids = {id(rf) for lab, rf in pairs if lab in self.nullable}
        return render_type(
            [rf for _, rf in pairs],
            lifetime_name,
            nullable=lambda rf: id(rf) in null_ids,
        )

    # ------------------------------------------------------------- structs

    def struct_decl(self, name: str) -> str:
        s = self.prog.struct(name)
        used = self.struct_used[name]
        names = {v: _letter(i) for i, v in enumerate(used)}

        def lname(v):
            return names.get(v, "'_")

        params = f"<{', '.join(names[v] for v in used)}>" if used else ""
        lines = [f"struct {name}{params} {{"]
        for fname, ty in s.fields:
            lines.append(f"    {fname}: {self.render(ty, lname)},")
        lines.append("}")
        return "\n".join(lines)

    # ------------------------------------------------------------ functions

    def _sig_lifetime_terms(self, f: FuncDef, ty: SourceType) -> list[tuple[str, int]]:
        """(smt term, solved value) for each lifetime the type mentions."""
        out = []
        for fr in ty:
            if fr.kind == "ptr" and self.m.base.get(fr.label) in REF_BASES:
                out.append((f"rl_{fr.label}", self.m.rl.get(fr.label, 0)))
            elif fr.kind == "struct":
                for j in self.struct_used.get(fr.struct, []):
                    out.append(
                        (f"(slt_{fr.label} {j})", self.m.slt_at(fr.label, j))
                    )
        return out

    def fn_decl(self, f: FuncDef) -> str:
        param_terms: list[tuple[str, int]] = []
        for _, ty in f.params:
            param_terms += self._sig_lifetime_terms(f, ty)
        ret_terms = self._sig_lifetime_terms(f, f.ret_type)

        values = [v for _, v in param_terms + ret_terms]
        distinct = sorted(set(values), key=values.index)
        # Merge lifetimes the model proves mutually outliving.
        rep: dict[int, int] = {v: v for v in distinct}
        terms_by_value: dict[int, str] = {}
        for t, v in param_terms + ret_terms:
            terms_by_value.setdefault(v, t)
        for v1 in distinct:
            for v2 in distinct:
                if v1 < v2 and self._outlives(f, terms_by_value[v1], terms_by_value[v2]) and self._outlives(f, terms_by_value[v2], terms_by_value[v1]):
                    rep[v2] = rep[v1]
        merged = sorted({rep[v] for v in distinct}, key=distinct.index)

        struct_args_present = any(
            fr.kind == "struct" and self.struct_used.get(fr.struct)
            for _, ty in list(f.params) + [("", f.ret_type)]
            for fr in ty
        )
        clauses = self._where_clauses(f, merged, terms_by_value, rep)
        elide = not struct_args_present and not clauses and (
            not ret_terms or len(merged) <= 1
        )
        if elide:
            names: dict[int, str] = {}
        else:
            names = {v: _letter(i) for i, v in enumerate(merged)}

        def lname(v):
            if v is None:
                return ""
            return names.get(rep.get(v, v), "") if names else ""

        gparams = f"<{', '.join(names[v] for v in merged)}>" if names else ""
        parts = [
            f"{p}: {self.render(ty, lname)}" for p, ty in f.params
        ]
        ret = ""
        if not (len(f.ret_type) == 1 and f.ret_type[0].kind == "void"):
            ret = f" -> {self.render(f.ret_type, lname)}"
        where = ""
        if clauses and names:
            where = " where " + ", ".join(
                f"{names[a]}: {names[b]}" for a, b in clauses
            )
        return f"fn {f.name}{gparams}({', '.join(parts)}){ret}{where};"

    def _outlives(self, f: FuncDef, t1: str, t2: str) -> bool:
        return bool(self.outlives.get((f.name, t1, t2)))

    def _where_clauses(self, f, merged, terms_by_value, rep):
        clauses = []
        for a in merged:
            for b in merged:
                if a != b and self._outlives(
                    f, terms_by_value[a], terms_by_value[b]
                ) and not self._outlives(f, terms_by_value[b], terms_by_value[a]):
                    clauses.append((a, b))
        return clauses

    # --------------------------------------------------------------- top

    def declarations(self) -> str:
        decls = [self.struct_decl(s.name) for s in self.prog.structs]
        for g in self.prog.globals:
            decls.append(f"static {g.name}: {self.render(g.gtype, lambda v: '')};")
        for f in self.prog.functions:
            if f.body is None:
                continue
            if f.name == "main":
                decls.append("fn main();")
            else:
                decls.append(self.fn_decl(f))
        return "\n\n".join(decls) + "\n"

    def label_report(self) -> list[dict]:
        out = []
        for label in sorted(self.prog.frag_of):
            fr = self.prog.frag_of[label]
            site = self.prog.site_of.get(label)
            rec = {
                "label": label,
                "kind": fr.kind,
                "base": self.m.base.get(label),
                "array": label in self.m.array,
                "cell": label in self.m.cell,
            }
            if fr.kind == "ptr":
                rec["lifetime"] = self.m.rl.get(label)
                rec["nullable"] = label in self.nullable
            if fr.kind == "struct":
                rec["struct"] = fr.struct
                rec["lifetime_args"] = [
                    self.m.slt_at(label, j)
                    for j in self.struct_used.get(fr.struct, [])
                ]
            if site is not None:
                rec["site"] = {
                    "kind": site.kind,
                    "owner": site.owner,
                    "name": site.name,
                    "index": site.index,
                }
            out.append(rec)
        return out

    def interface_variables(self) -> int:
        """Count of interface sites: struct fields, globals, and the
        parameters and return values of defined functions other than main."""
        n = sum(len(s.fields) for s in self.prog.structs)
        n += len(self.prog.globals)
        for f in self.prog.functions:
            if f.body is None or f.name == "main":
                continue
            n += len(f.params) + 1
        return n

    def emit(self, objectives: list[int] | None = None) -> EmitResult:
        decls = self.declarations()
        check_declarations(decls)
        report = {
            "declarations": decls,
            "interface_variables": self.interface_variables(),
            "structs": {
                s.name: {
                    "generics": len(self.struct_used[s.name]),
                    "rank": self.m.rank.get(s.name, 0),
                }
                for s in self.prog.structs
            },
            "labels": self.label_report(),
            "objectives": objectives,
        }
        return EmitResult(decls, report)


# ----------------------------------------------------------------- checking


class DeclarationError(Exception):
    pass


def check_declarations(text: str) -> None:
    """A light well-formedness pass over emitted declarations: every item is
    a struct, static, or fn with balanced brackets and legal identifiers."""
    import re

    ident = r"[A-Za-z_][A-Za-z0-9_.]*"
    item_start = re.compile(
        rf"^(struct {ident}(<[^>]*>)? \{{|static {ident}:|fn {ident}(<[^>]*>)?\()"
    )
    for item in [i for i in text.split("\n\n") if i.strip()]:
        first = item.strip().splitlines()[0]
        if not item_start.match(first):
            raise DeclarationError(f"unrecognized declaration: {first!r}")
        for open_ch, close_ch in ("()", "{}", "<>", "[]"):
            bal = 0
            for ch in item:
                if ch == open_ch:
                    bal += 1
                elif ch == close_ch:
                    bal = max(bal - 1, 0) if open_ch == "<" else bal - 1
                if bal < 0:
                    raise DeclarationError(f"unbalanced {open_ch}{close_ch}: {first!r}")
            if open_ch != "<" and bal != 0:
                raise DeclarationError(f"unbalanced {open_ch}{close_ch}: {first!r}")


def emit_interface(
    prog: Program,
    model: Model,
    gen: Generator,
    outlives: dict | None = None,
    conservative_option: bool = True,
    objectives: list[int] | None = None,
) -> EmitResult:
    return Emitter(prog, model, gen, outlives, conservative_option).emit(objectives)
