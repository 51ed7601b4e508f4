"""Constraint generation.

Walks a validated program (drops inserted, instructions numbered) and emits
the full constraint system: type consistency, semantic preservation, borrow
checking, and the lexicographic precision objectives.

Program points are numbered in = 2*iid and out = 2*iid + 1. Lifetime
variables of non-field labels are fixed to the distinct constant
RL_OFFSET + label; field labels keep a free variable because their value is
an index into the owning struct's generic lifetimes.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..rust_types import (
    COST_DEPTH,
    COST_DYNAMIC,
    COST_HEIGHT,
    OWNING,
    nondestructive_pairs,
    transformable_pairs,
)
from ..source_ir.cfg import Cfg, Liveness, build_cfg, liveness
from ..source_ir.ir import (
    Alloca,
    CallInstr,
    Deref,
    DropInstr,
    EltAddr,
    FieldAddr,
    FuncDef,
    Instr,
    Program,
    Rval,
    SourceType,
    StoreInstr,
    Var,
)
from ..source_ir.parser import rvals_of
from ..source_ir.rvals import (
    Cor,
    Path,
    borrow_path,
    correspondences,
    deep_paths,
    rval_source_type,
)
from .config import Config
from .formulas import (
    FALSE,
    TRUE,
    ArrayAt,
    BaseEq,
    BaseIs,
    CellAt,
    ConstraintSystem,
    End,
    Formula,
    Gen,
    Iff,
    Implies,
    IntConst,
    IntLe,
    IntLt,
    IntTerm,
    Lo,
    Lt,
    Not,
    RL,
    Rank,
    SLT,
    base_in,
    conj,
    disj,
    struct_base,
)

RL_OFFSET = 1000
SM = ("shared", "mut")


def point_in(iid: int) -> int:
    return 2 * iid


def point_out(iid: int) -> int:
    return 2 * iid + 1


@dataclass
class RvalInfo:
    func: FuncDef
    instr: Instr
    rval: Rval
    stype: SourceType

    @property
    def label(self) -> int:
        return self.rval.label

    @property
    def head_kind(self) -> str:
        return self.stype[0].kind


class Generator:
    def __init__(self, prog: Program, cfg: Config | None = None, filename: str = "<input>"):
        self.prog = prog
        self.cfg = cfg or Config()
        self.filename = filename
        self.sys = ConstraintSystem()
        self.cfgs: dict[str, Cfg] = {}
        self.live: dict[str, Liveness] = {}
        self.rvals: dict[str, list[RvalInfo]] = {}
        self.field_labels: set[int] = set()
        for s in prog.structs:
            for _, ty in s.fields:
                self.field_labels |= {fr.label for fr in ty}
        for f in prog.functions:
            if f.body is None:
                continue
            c = build_cfg(f)
            self.cfgs[f.name] = c
            self.live[f.name] = liveness(c)
            infos = []
            for ins in f.body:
                for rv in rvals_of(ins):
                    infos.append(
                        RvalInfo(f, ins, rv, rval_source_type(prog, f, rv))
                    )
            self.rvals[f.name] = infos

    # ------------------------------------------------------------- helpers

    def origin(self, func: FuncDef | None, ins: Instr | None = None, note: str = "") -> str:
        line = ins.line if ins is not None else (func.line if func else 0)
        where = f"{self.filename}:{line}"
        return f"{where} {note}".rstrip()

    def fixed_rl(self, label: int) -> int | None:
        """The constant lifetime variable of a non-field label."""
        if label in self.field_labels:
            return None
        return RL_OFFSET + label

    def sig_labels(self, f: FuncDef) -> list[tuple[int, SourceType, int]]:
        """(fragment label, owning type, 1-based index) over params + return."""
        out = []
        for _, ty in f.params:
            out += [(fr.label, ty, i + 1) for i, fr in enumerate(ty)]
        out += [(fr.label, f.ret_type, i + 1) for i, fr in enumerate(f.ret_type)]
        return out

    def points_of(self, f: FuncDef) -> list[int]:
        pts = []
        for ins in f.body or []:
            pts += [point_in(ins.iid), point_out(ins.iid)]
        return pts

    def sig_end_terms(self, f: FuncDef) -> list[IntTerm]:
        """End tokens for this function's signature lifetime variables."""
        terms: list[IntTerm] = []
        for label, _, _ in self.sig_labels(f):
            fr = self.prog.frag_of[label]
            if fr.kind == "ptr":
                terms.append(End(RL(label)))
            elif fr.kind == "struct":
                for j in range(1, self.cfg.generics_bound + 1):
                    terms.append(End(SLT(label, IntConst(j))))
        return terms

    def domain(self, f: FuncDef) -> list[IntTerm]:
        return [IntConst(p) for p in self.points_of(f)] + self.sig_end_terms(f)

    def supseteq(self, big: IntTerm, small: IntTerm, f: FuncDef) -> Formula:
        """Lifetime(big) contains Lifetime(small), expanded over f's points
        and f's signature end tokens."""
        return conj(
            *(Implies(Lt(small, t), Lt(big, t)) for t in self.domain(f))
        )

    def node_formula(self, label: int, node) -> Formula:
        base, arr, cell = node
        return conj(
            BaseIs(label, base),
            ArrayAt(label) if arr else Not(ArrayAt(label)),
            CellAt(label) if cell else Not(CellAt(label)),
        )

    def transform(self, src: int, dst: int, solid: bool) -> Formula:
        pairs = nondestructive_pairs() if solid else transformable_pairs()
        return disj(
            *(
                conj(self.node_formula(src, a), self.node_formula(dst, b))
                for a, b in sorted(pairs)
            )
        )

    def refbind(self, info: RvalInfo, i: int) -> IntTerm:
        """Lifetime variable of the i-th (1-based) fragment of an rvalue."""
        lab = info.stype[i - 1].label
        if isinstance(info.rval.expr, FieldAddr) and i > 1:
            vty = info.func.var_type(info.rval.expr.var)
            return SLT(vty[1].label, RL(lab))
        return RL(lab)

    def structbind(self, info: RvalInfo, i: int, j: int) -> IntTerm:
        lab = info.stype[i - 1].label
        inner = SLT(lab, IntConst(j))
        if isinstance(info.rval.expr, FieldAddr) and i > 1:
            vty = info.func.var_type(info.rval.expr.var)
            return SLT(vty[1].label, inner)
        return inner

    def cors(self, f: FuncDef, ins: Instr) -> list[Cor]:
        return correspondences(self.prog, f, ins)

    def info_of(self, f: FuncDef, rv: Rval) -> RvalInfo:
        for info in self.rvals[f.name]:
            if info.rval is rv:
                return info
        raise KeyError(rv.label)

    def loans_of(self, f: FuncDef) -> list[RvalInfo]:
        """Loan-producing rvalues: pointer-headed, borrowing a place."""
        return [
            info
            for info in self.rvals[f.name]
            if info.head_kind == "ptr" and borrow_path(info.rval) is not None
        ]

    def defined_funcs(self) -> list[FuncDef]:
        return [f for f in self.prog.functions if f.body is not None]

    # --------------------------------------------------------------- rules

    def generate(self) -> ConstraintSystem:
        self.gen_parity()
        self.gen_struct_bounds()
        self.gen_rank()
        self.gen_array()
        self.gen_equiv()
        self.gen_transform()
        self.gen_immut()
        self.gen_mut()
        self.gen_own()
        self.gen_external()
        self.gen_referent()
        self.gen_nondestructive()
        self.gen_liveness()
        self.gen_subtyping()
        self.gen_reborrow()
        self.gen_lifetime_params()
        self.gen_call_homomorphism()
        self.gen_loans()
        self.gen_conflicts()
        self.gen_objectives()
        return self.sys

    def gen_parity(self) -> None:
        tags = {
            "void": "C-Parity-Void",
            "bool": "C-Parity-Bool",
            "i8": "C-Parity-Int8",
            "i16": "C-Parity-Int16",
            "i32": "C-Parity-Int32",
            "i64": "C-Parity-Int64",
            "f32": "C-Parity-Float32",
            "f64": "C-Parity-Float64",
            "unknown": "C-Parity-Unknown",
        }
        for label, fr in sorted(self.prog.frag_of.items()):
            site = self.prog.site_of.get(label)
            note = f"label {label} ({site.kind} {site.owner}.{site.name})" if site else f"label {label}"
            origin = f"{self.filename} {note}"
            if fr.kind == "ptr":
                self.sys.add(
                    "C-Parity-Ptr",
                    origin,
                    base_in(label, ("ghost", "Box", "Rc", "shared", "mut")),
                )
            elif fr.kind == "struct":
                self.sys.add(
                    "C-Parity-Struct", origin, BaseIs(label, struct_base(fr.struct))
                )
            else:
                self.sys.add(tags[fr.kind], origin, BaseIs(label, fr.kind))

    def gen_struct_bounds(self) -> None:
        bound = self.cfg.generics_bound
        for s in self.prog.structs:
            origin = f"{self.filename} struct {s.name}"
            self.sys.add(
                "C-Struct-Bound",
                origin,
                conj(
                    IntLe(IntConst(0), Gen(s.name)),
                    IntLe(Gen(s.name), IntConst(bound)),
                ),
            )
            for fname, ty in s.fields:
                forigin = f"{self.filename} field {s.name}.{fname}"
                for fr in ty:
                    if fr.kind == "ptr":
                        # Applies only when the fragment is a reference; an
                        # owning field uses no generic lifetime.
                        self.sys.add(
                            "C-LifeParam-Ptr",
                            forigin,
                            Implies(
                                base_in(fr.label, SM),
                                conj(
                                    IntLe(IntConst(1), RL(fr.label)),
                                    IntLe(RL(fr.label), Gen(s.name)),
                                ),
                            ),
                        )
                    elif fr.kind == "struct":
                        for j in range(1, bound + 1):
                            self.sys.add(
                                "C-LifeParam-Struct",
                                forigin,
                                Implies(
                                    IntLe(IntConst(j), Gen(fr.struct)),
                                    conj(
                                        IntLe(
                                            IntConst(1), SLT(fr.label, IntConst(j))
                                        ),
                                        IntLe(
                                            SLT(fr.label, IntConst(j)), Gen(s.name)
                                        ),
                                    ),
                                ),
                            )

    def gen_rank(self) -> None:
        for s in self.prog.structs:
            for fname, ty in s.fields:
                if ty[-1].kind != "struct":
                    continue
                origin = f"{self.filename} field {s.name}.{fname}"
                ghosts = conj(*(BaseIs(fr.label, "ghost") for fr in ty[:-1]))
                self.sys.add(
                    "C-Rank",
                    origin,
                    Implies(ghosts, IntLt(Rank(ty[-1].struct), Rank(s.name))),
                )

    def gen_array(self) -> None:
        for f in self.defined_funcs():
            for info in self.rvals[f.name]:
                if isinstance(info.rval.expr, EltAddr):
                    self.sys.add(
                        "C-Array", self.origin(f, info.instr), ArrayAt(info.label)
                    )
        for label, fr in sorted(self.prog.frag_of.items()):
            if fr.kind == "ptr":
                self.sys.add(
                    "C-Slice",
                    f"{self.filename} label {label}",
                    Implies(ArrayAt(label), Not(BaseIs(label, "ghost"))),
                )

    def _equiv(self, l1: int, l2: int) -> Formula:
        return conj(
            BaseEq(l1, l2),
            Iff(ArrayAt(l1), ArrayAt(l2)),
            Iff(CellAt(l1), CellAt(l2)),
        )

    def gen_equiv(self) -> None:
        for f in self.defined_funcs():
            for ins in f.body or []:
                if isinstance(ins, CallInstr):
                    if not self.prog.has_function(ins.func):
                        continue
                    callee = self.prog.function(ins.func)
                    for arg, (_, pty) in zip(ins.args, callee.params):
                        aty = rval_source_type(self.prog, f, arg)
                        for fa, fp in zip(aty, pty):
                            self.sys.add(
                                "C-Equiv-Args",
                                self.origin(f, ins),
                                self._equiv(fa.label, fp.label),
                            )
                    if ins.dest is not None and ins.dtype is not None:
                        for fd, fr in zip(ins.dtype, callee.ret_type):
                            self.sys.add(
                                "C-Equiv-Ret",
                                self.origin(f, ins),
                                self._equiv(fd.label, fr.label),
                            )
                else:
                    for c in self.cors(f, ins):
                        self.sys.add(
                            "C-Equiv-Cor",
                            self.origin(f, ins),
                            self._equiv(c.dst, c.src),
                        )

    def _transform_src(self, info: RvalInfo) -> tuple[str, int] | None:
        """(rule suffix, source fragment label) for a transformable rvalue."""
        e = info.rval.expr
        f = info.func
        if isinstance(e, Var):
            vty = f.var_type(e.name)
            if vty[0].kind == "ptr":
                return ("Var", vty[0].label)
        elif isinstance(e, Deref):
            vty = f.var_type(e.var)
            if len(vty) >= 2 and vty[1].kind == "ptr":
                return ("Deref", vty[1].label)
        elif isinstance(e, FieldAddr):
            vty = f.var_type(e.var)
            fty = self.prog.struct(vty[1].struct).field_type(e.field_name)
            if fty[0].kind == "ptr":
                return ("Fld", fty[0].label)
        elif isinstance(e, EltAddr):
            vty = f.var_type(e.var)
            if vty[0].kind == "ptr":
                return ("Elt", vty[0].label)
        return None

    def gen_transform(self) -> None:
        for f in self.defined_funcs():
            for info in self.rvals[f.name]:
                src = self._transform_src(info)
                if src is None or info.head_kind != "ptr":
                    continue
                suffix, label = src
                self.sys.add(
                    f"C-Transform-{suffix}",
                    self.origin(f, info.instr),
                    self.transform(label, info.label, solid=False),
                )

    def gen_immut(self) -> None:
        for f in self.defined_funcs():
            for info in self.rvals[f.name]:
                e = info.rval.expr
                if isinstance(e, Deref):
                    tag = "C-Immut-Deref"
                elif isinstance(e, FieldAddr):
                    tag = "C-Immut-Fld"
                else:
                    continue
                outer = f.var_type(e.var)[0]
                if outer.kind != "ptr":
                    continue
                self.sys.add(
                    tag,
                    self.origin(f, info.instr),
                    Implies(
                        conj(
                            base_in(outer.label, ("shared", "Rc")),
                            Not(CellAt(outer.label)),
                        ),
                        Not(BaseIs(info.label, "mut")),
                    ),
                )

    def gen_mut(self) -> None:
        for f in self.defined_funcs():
            for ins in f.body or []:
                if not isinstance(ins, StoreInstr):
                    continue
                outer = f.var_type(ins.var)[0]
                self.sys.add(
                    "C-Mut",
                    self.origin(f, ins),
                    disj(
                        base_in(outer.label, ("ghost", "Box", "mut")),
                        CellAt(outer.label),
                    ),
                )

    def gen_own(self) -> None:
        for f in self.defined_funcs():
            for ins in f.body or []:
                if isinstance(ins, Alloca):
                    self.sys.add(
                        "C-Own-Stack",
                        self.origin(f, ins),
                        base_in(ins.dtype[0].label, OWNING),
                    )
                elif (
                    isinstance(ins, CallInstr)
                    and ins.func in self.cfg.heap_functions
                    and ins.dtype is not None
                ):
                    self.sys.add(
                        "C-Own-Heap",
                        self.origin(f, ins),
                        base_in(ins.dtype[0].label, OWNING),
                    )

    def gen_external(self) -> None:
        for f in self.prog.functions:
            if f.body is not None:
                continue
            for spec in self.cfg.specs_for(f.name):
                origin = f"{self.filename} external {f.name}"
                groups = list(spec.params) + [spec.ret]
                types = [ty for _, ty in f.params] + [f.ret_type]
                # The return spec is always last; parameter specs apply
                # positionally to however many parameters exist.
                for group, ty in zip(spec.params, types[:-1]):
                    for g, fr in zip(group, ty):
                        if g != "any":
                            self.sys.add("C-External", origin, BaseIs(fr.label, g))
                for g, fr in zip(spec.ret, f.ret_type):
                    if g != "any":
                        self.sys.add("C-External", origin, BaseIs(fr.label, g))

    def gen_referent(self) -> None:
        for f in self.defined_funcs():
            for info in self.rvals[f.name]:
                e = info.rval.expr
                if info.head_kind != "ptr":
                    continue
                if isinstance(e, Deref):
                    vty = f.var_type(e.var)
                    if len(vty) < 2 or vty[1].kind != "ptr":
                        continue
                    tag, outer, src = "S-Referent-Deref", vty[0], vty[1].label
                elif isinstance(e, FieldAddr):
                    vty = f.var_type(e.var)
                    fty = self.prog.struct(vty[1].struct).field_type(e.field_name)
                    if fty[0].kind != "ptr":
                        continue
                    tag, outer, src = "S-Referent-Fld", vty[0], fty[0].label
                else:
                    continue
                self.sys.add(
                    tag,
                    self.origin(f, info.instr),
                    Implies(
                        Not(base_in(outer.label, ("ghost", "Box"))),
                        self.transform(src, info.label, solid=True),
                    ),
                )

    def gen_nondestructive(self) -> None:
        for f in self.defined_funcs():
            lv = self.live[f.name]
            for info in self.rvals[f.name]:
                src = self._transform_src(info)
                if src is None or info.head_kind != "ptr":
                    continue
                e = info.rval.expr
                var = e.name if isinstance(e, Var) else e.var
                if var not in lv.live_out[info.instr.iid]:
                    continue
                suffix, label = src
                self.sys.add(
                    f"S-Transform-{suffix}",
                    self.origin(f, info.instr),
                    self.transform(label, info.label, solid=True),
                )

    def gen_liveness(self) -> None:
        bound = self.cfg.generics_bound
        for f in self.defined_funcs():
            lv = self.live[f.name]
            decls = [(n, f.var_type(n)) for n in f.decl_order()]
            for ins in f.body or []:
                pts = []
                for name, ty in decls:
                    if name in lv.live_in[ins.iid]:
                        pts.append((ty, point_in(ins.iid)))
                    if name in lv.live_out[ins.iid]:
                        pts.append((ty, point_out(ins.iid)))
                for ty, p in pts:
                    for fr in ty:
                        if fr.kind == "ptr":
                            self.sys.add(
                                "L-Live-Ptr",
                                self.origin(f, ins),
                                Implies(
                                    base_in(fr.label, SM),
                                    Lt(RL(fr.label), IntConst(p)),
                                ),
                            )
                        elif fr.kind == "struct":
                            for j in range(1, bound + 1):
                                self.sys.add(
                                    "L-Live-Struct",
                                    self.origin(f, ins),
                                    Implies(
                                        IntLe(IntConst(j), Gen(fr.struct)),
                                        Lt(
                                            SLT(fr.label, IntConst(j)),
                                            IntConst(p),
                                        ),
                                    ),
                                )

    def gen_subtyping(self) -> None:
        bound = self.cfg.generics_bound
        for f in self.defined_funcs():
            for ins in f.body or []:
                if isinstance(ins, CallInstr):
                    continue
                cors = self.cors(f, ins)
                for c in cors:
                    dst = self.prog.frag_of[c.dst]
                    src = self.prog.frag_of[c.src]
                    info = self._cor_info(f, ins, c)
                    if dst.kind == "ptr":
                        self.sys.add(
                            "L-Covariant-Ptr",
                            self.origin(f, ins),
                            Implies(
                                conj(base_in(c.dst, SM), base_in(c.src, SM)),
                                self.supseteq(
                                    self.refbind(info, c.index), RL(c.dst), f
                                ),
                            ),
                        )
                    elif dst.kind == "struct":
                        for j in range(1, bound + 1):
                            self.sys.add(
                                "L-Covariant-Struct",
                                self.origin(f, ins),
                                Implies(
                                    IntLe(IntConst(j), Gen(dst.struct)),
                                    self.supseteq(
                                        self.structbind(info, c.index, j),
                                        SLT(c.dst, IntConst(j)),
                                        f,
                                    ),
                                ),
                            )
                # Invariance: an outer mutable or interior-mutable pair makes
                # inner lifetimes flow both ways (the covariant rule covers
                # one direction; this adds destination-outlives-source).
                groups: dict[int, list[Cor]] = {}
                for c in cors:
                    groups.setdefault(c.rval, []).append(c)
                for group in groups.values():
                    group.sort(key=lambda c: c.index)
                    for ci in group:
                        guard = disj(
                            BaseIs(ci.dst, "mut"),
                            BaseIs(ci.src, "mut"),
                            CellAt(ci.dst),
                            CellAt(ci.src),
                        )
                        for cj in group:
                            if cj.index <= ci.index:
                                continue
                            dstj = self.prog.frag_of[cj.dst]
                            info = self._cor_info(f, ins, cj)
                            if dstj.kind == "ptr":
                                self.sys.add(
                                    "L-Invariant-Ptr",
                                    self.origin(f, ins),
                                    Implies(
                                        guard,
                                        Implies(
                                            conj(
                                                base_in(cj.dst, SM),
                                                base_in(cj.src, SM),
                                            ),
                                            self.supseteq(
                                                RL(cj.dst),
                                                self.refbind(info, cj.index),
                                                f,
                                            ),
                                        ),
                                    ),
                                )
                            elif dstj.kind == "struct":
                                for k in range(1, bound + 1):
                                    self.sys.add(
                                        "L-Invariant-Struct",
                                        self.origin(f, ins),
                                        Implies(
                                            guard,
                                            Implies(
                                                IntLe(IntConst(k), Gen(dstj.struct)),
                                                self.supseteq(
                                                    SLT(cj.dst, IntConst(k)),
                                                    self.structbind(
                                                        info, cj.index, k
                                                    ),
                                                    f,
                                                ),
                                            ),
                                        ),
                                    )

    def _cor_info(self, f: FuncDef, ins: Instr, c: Cor) -> RvalInfo:
        for info in self.rvals[f.name]:
            if info.instr is ins and info.rval.label == c.rval:
                return info
        raise KeyError(c.rval)

    def gen_reborrow(self) -> None:
        for f in self.defined_funcs():
            for info in self.rvals[f.name]:
                if info.head_kind != "ptr":
                    continue
                e = info.rval.expr
                l1 = info.label
                pairs: list[tuple[str, Formula, IntTerm]] = []

                def ref_pair(tag: str, l2: int) -> None:
                    pairs.append(
                        (
                            tag,
                            conj(base_in(l1, SM), base_in(l2, SM)),
                            RL(l2),
                        )
                    )

                if isinstance(e, Var):
                    ref_pair("L-Reborrow-Var", f.var_type(e.name)[0].label)
                elif isinstance(e, Deref):
                    vty = f.var_type(e.var)
                    ref_pair("L-Reborrow-Deref1", vty[0].label)
                    if len(vty) >= 2 and vty[1].kind == "ptr":
                        ref_pair("L-Reborrow-Deref2", vty[1].label)
                elif isinstance(e, FieldAddr):
                    vty = f.var_type(e.var)
                    ref_pair("L-Reborrow-Fld1", vty[0].label)
                    fty = self.prog.struct(vty[1].struct).field_type(e.field_name)
                    l2 = fty[0].label
                    pairs.append(
                        (
                            "L-Reborrow-Fld2",
                            conj(base_in(l1, SM), base_in(l2, SM)),
                            SLT(vty[1].label, RL(l2)),
                        )
                    )
                elif isinstance(e, EltAddr):
                    ref_pair("L-Reborrow-Elt", f.var_type(e.var)[0].label)
                for tag, guard, src_lt in pairs:
                    self.sys.add(
                        tag,
                        self.origin(f, info.instr),
                        Implies(guard, self.supseteq(src_lt, RL(l1), f)),
                    )

    def gen_lifetime_params(self) -> None:
        bound = self.cfg.generics_bound
        for f in self.prog.functions:
            origin = f"{self.filename} signature {f.name}"
            for label, _, _ in self.sig_labels(f):
                fr = self.prog.frag_of[label]
                if fr.kind == "ptr":
                    self.sys.add(
                        "L-Param-End-Ptr",
                        origin,
                        Implies(
                            base_in(label, SM), Lt(RL(label), End(RL(label)))
                        ),
                    )
                    for ins in f.body or []:
                        self.sys.add(
                            "L-Param-Body-Ptr",
                            self.origin(f, ins),
                            Implies(
                                base_in(label, SM),
                                conj(
                                    Lt(RL(label), IntConst(point_in(ins.iid))),
                                    Lt(RL(label), IntConst(point_out(ins.iid))),
                                ),
                            ),
                        )
                elif fr.kind == "struct":
                    for j in range(1, bound + 1):
                        slt = SLT(label, IntConst(j))
                        cond = IntLe(IntConst(j), Gen(fr.struct))
                        self.sys.add(
                            "L-Param-End-Struct",
                            origin,
                            Implies(cond, Lt(slt, End(slt))),
                        )
                        for ins in f.body or []:
                            self.sys.add(
                                "L-Param-Body-Struct",
                                self.origin(f, ins),
                                Implies(
                                    cond,
                                    conj(
                                        Lt(slt, IntConst(point_in(ins.iid))),
                                        Lt(slt, IntConst(point_out(ins.iid))),
                                    ),
                                ),
                            )

    def call_pairs(self, f: FuncDef, ins: CallInstr) -> list[tuple[IntTerm, IntTerm]]:
        """Call-site lifetime terms paired with signature lifetime terms."""
        if not self.prog.has_function(ins.func):
            return []
        callee = self.prog.function(ins.func)
        pairs: list[tuple[IntTerm, IntTerm]] = []
        bound = self.cfg.generics_bound
        for arg, (_, pty) in zip(ins.args, callee.params):
            info = self.info_of(f, arg)
            for j, fr in enumerate(pty, start=1):
                if j > len(info.stype):
                    break
                if fr.kind == "ptr":
                    pairs.append((self.refbind(info, j), RL(fr.label)))
                elif fr.kind == "struct":
                    for k in range(1, bound + 1):
                        pairs.append(
                            (
                                self.structbind(info, j, k),
                                SLT(fr.label, IntConst(k)),
                            )
                        )
        return pairs

    def gen_call_homomorphism(self) -> None:
        for f in self.defined_funcs():
            for ins in f.body or []:
                if not isinstance(ins, CallInstr):
                    continue
                pairs = self.call_pairs(f, ins)
                for t1, t1p in pairs:
                    for t2, t2p in pairs:
                        self.sys.add(
                            "L-Hom",
                            self.origin(f, ins),
                            Implies(
                                Lt(t1p, End(t2p)), self.supseteq(t1, t2, f)
                            ),
                        )

    def gen_loans(self) -> None:
        for f in self.defined_funcs():
            c = self.cfgs[f.name]
            loans = self.loans_of(f)
            for loan in loans:
                bp = borrow_path(loan.rval)
                for ins in f.body or []:
                    pin, pout = point_in(ins.iid), point_out(ins.iid)
                    join = disj(
                        *(Lo(loan.label, point_out(p)) for p in c.pred[ins.iid])
                    )
                    self.sys.add(
                        "L-Merge",
                        self.origin(f, ins),
                        Iff(Lo(loan.label, pin), join),
                    )
                    gen_here = loan.instr is ins
                    kill_here = (
                        isinstance(ins, StoreInstr)
                        and bp == Path(ins.var, "deref1")
                    )
                    if gen_here:
                        tag = "L-Transfer-Borrow"
                    elif kill_here:
                        tag = "L-Transfer-Assign"
                    else:
                        tag = "L-Transfer-Lifetime"
                    inflow = disj(Lo(loan.label, pin), TRUE if gen_here else FALSE)
                    rhs = conj(
                        inflow,
                        Lt(RL(loan.label), IntConst(pout)),
                        FALSE if kill_here else TRUE,
                    )
                    self.sys.add(
                        tag,
                        self.origin(f, ins),
                        Iff(Lo(loan.label, pout), rhs),
                    )

    def gen_conflicts(self) -> None:
        for f in self.defined_funcs():
            c = self.cfgs[f.name]
            loans = self.loans_of(f)

            def loans_matching(paths: set[Path]) -> list[RvalInfo]:
                return [lo for lo in loans if borrow_path(lo.rval) in paths]

            for info in self.rvals[f.name]:
                if info.head_kind != "ptr":
                    continue
                bp = borrow_path(info.rval)
                if bp is None:
                    continue
                pin = point_in(info.instr.iid)
                deep = deep_paths(bp, self.prog, f)
                for lo in loans_matching(deep):
                    self.sys.add(
                        "C-Borrow",
                        self.origin(f, info.instr),
                        Implies(
                            Lo(lo.label, pin),
                            conj(
                                BaseIs(info.label, "shared"),
                                BaseIs(lo.label, "shared"),
                            ),
                        ),
                    )
                # Move conflicts: invalidating a borrowed place is illegal,
                # so when a conflicting loan is live the copy must be
                # nondestructive.
                e = info.rval.expr
                move: tuple[str, int, Path] | None = None
                if isinstance(e, Var):
                    move = ("C-Move-Var", f.var_type(e.name)[0].label, Path(e.name, "deref1"))
                elif isinstance(e, Deref):
                    vty = f.var_type(e.var)
                    if len(vty) >= 2:
                        move = ("C-Move-Deref", vty[1].label, Path(e.var, "deref2"))
                elif isinstance(e, EltAddr):
                    move = ("C-Move-Elt", f.var_type(e.var)[0].label, Path(e.var, "deref1"))
                if move is not None:
                    tag, src_label, place = move
                    deep = deep_paths(place, self.prog, f)
                    for lo in loans_matching(deep):
                        self.sys.add(
                            tag,
                            self.origin(f, info.instr),
                            Implies(
                                Lo(lo.label, pin),
                                self.transform(src_label, info.label, solid=True),
                            ),
                        )

            for ins in f.body or []:
                if isinstance(ins, StoreInstr):
                    outer = f.var_type(ins.var)[0]
                    pin = point_in(ins.iid)
                    for lo in loans_matching({Path(ins.var, "deref1")}):
                        self.sys.add(
                            "C-Assign",
                            self.origin(f, ins),
                            Implies(
                                Lo(lo.label, pin),
                                conj(
                                    BaseIs(outer.label, "shared"),
                                    BaseIs(lo.label, "shared"),
                                ),
                            ),
                        )
                elif isinstance(ins, DropInstr):
                    self._drop_conflicts(f, ins.names, point_in(ins.iid), ins)
            if f.exit_drops:
                for iid in c.exit_preds:
                    self._drop_conflicts(f, f.exit_drops, point_out(iid), None)

    def _drop_conflicts(
        self, f: FuncDef, names: list[str], point: int, ins: Instr | None
    ) -> None:
        origin = self.origin(f, ins) if ins else f"{self.filename} {f.name} exit"
        loans = self.loans_of(f)
        for name in names:
            vty = f.var_type(name)
            for lo in loans:
                e = lo.rval.expr
                tag = None
                src = None
                if isinstance(e, Var) and e.name == name and vty[0].kind == "ptr":
                    tag, src = "C-Drop-Var", vty[0].label
                elif (
                    isinstance(e, Deref)
                    and e.var == name
                    and len(vty) >= 2
                    and vty[1].kind == "ptr"
                ):
                    tag, src = "C-Drop-Deref", vty[1].label
                elif (
                    isinstance(e, FieldAddr)
                    and e.var == name
                    and vty[0].kind == "ptr"
                ):
                    tag, src = "C-Drop-Fld", vty[0].label
                elif (
                    isinstance(e, EltAddr)
                    and e.var == name
                    and vty[0].kind == "ptr"
                ):
                    tag, src = "C-Drop-Elt", vty[0].label
                if tag is not None:
                    self.sys.add(
                        tag,
                        origin,
                        Implies(Lo(lo.label, point), BaseIs(src, "shared")),
                    )

    # ----------------------------------------------------------- objectives

    def interface_labels(self) -> tuple[list[int], set[int]]:
        """(all interface labels, outermost subset).

        Interface labels are struct field labels, parameter and return
        labels of defined functions other than main, and global labels;
        external declarations and main are not part of the emitted
        interface.
        """
        labels: list[int] = []
        outer: set[int] = set()
        for s in self.prog.structs:
            for _, ty in s.fields:
                labels += [fr.label for fr in ty]
                outer.add(ty[0].label)
        for g in self.prog.globals:
            labels += [fr.label for fr in g.gtype]
            outer.add(g.gtype[0].label)
        for f in self.prog.functions:
            if f.body is None or f.name == "main":
                continue
            for label, _, _ in self.sig_labels(f):
                labels.append(label)
        seen: set[int] = set()
        uniq = [x for x in labels if not (x in seen or seen.add(x))]
        return uniq, outer

    def gen_objectives(self) -> None:
        labels, outer = self.interface_labels()
        ptrs = [l for l in labels if self.prog.frag_of[l].kind == "ptr"]
        cell_obj = [(1, CellAt(l)) for l in labels]
        height_obj: list[tuple[int, Formula]] = []
        for l in ptrs:
            costs = COST_HEIGHT if l in outer else COST_DEPTH
            for b, w in costs.items():
                height_obj.append((w, BaseIs(l, b)))
        dyn_obj = [
            (w, BaseIs(l, b)) for l in ptrs for b, w in COST_DYNAMIC.items()
        ]
        arr_obj = [(1, ArrayAt(l)) for l in labels]
        self.sys.objectives = [cell_obj, height_obj, dyn_obj, arr_obj]
        self.sys.objective_names = [
            "cell-count",
            "ownership-structure",
            "dynamic-overhead",
            "array-count",
        ]


def generate_constraints(
    prog: Program, cfg: Config | None = None, filename: str = "<input>"
) -> ConstraintSystem:
    return Generator(prog, cfg, filename).generate()
