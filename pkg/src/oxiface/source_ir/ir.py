"""Core data structures for the three-address source language.

A program is a list of struct definitions, globals, and functions. Every
source type is a flat list of fragments; all fragments except the last are
pointers, and the last is a scalar, struct, or unknown. Every fragment and
every non-nested rvalue expression carries a numeric type label.
"""
from __future__ import annotations

from dataclasses import dataclass, field

PRIMITIVES = ("void", "bool", "i8", "i16", "i32", "i64", "f32", "f64")
FRAG_KINDS = PRIMITIVES + ("unknown", "ptr", "struct")


@dataclass
class Frag:
    """One source type fragment: a kind, an optional struct name, a label."""

    kind: str
    struct: str | None = None
    label: int = -1

    def __post_init__(self) -> None:
        if self.kind not in FRAG_KINDS:
            raise ValueError(f"bad fragment kind {self.kind!r}")
        if (self.kind == "struct") != (self.struct is not None):
            raise ValueError("struct name required iff kind is 'struct'")

    def spell(self) -> str:
        if self.kind == "struct":
            return f"struct({self.struct})"
        if self.kind == "unknown":
            return "?"
        return self.kind


SourceType = tuple[Frag, ...]


# ---------------------------------------------------------------------------
# Rvalue expressions.  Only the whole expression is labeled; nested operands
# (the index in &v[e]) are not.


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    value: int | float | None  # None renders as `null`

    def spell(self) -> str:
        return "null" if self.value is None else str(self.value)


Operand = Var | Const


@dataclass(frozen=True)
class Deref:
    var: str  # *var


@dataclass(frozen=True)
class FieldAddr:
    var: str  # &*(*var).field
    field_name: str


@dataclass(frozen=True)
class EltAddr:
    var: str  # &var[index]
    index: Operand


Expr = Var | Const | Deref | FieldAddr | EltAddr


@dataclass
class Rval:
    """A labeled rvalue occurrence."""

    label: int
    expr: Expr


# ---------------------------------------------------------------------------
# Instructions.  Each carries a global id (dense, textual order), an optional
# leading block label, and the 1-based source line.


@dataclass
class Instr:
    iid: int = field(init=False, default=-1)
    block: str | None = field(init=False, default=None)
    line: int = field(init=False, default=0)


@dataclass
class Alloca(Instr):
    dest: str
    dtype: SourceType
    size: Const


@dataclass
class Assign(Instr):
    """Load (`*v`), field address, or element address assignment."""

    dest: str
    dtype: SourceType
    rval: Rval  # expr is Deref | FieldAddr | EltAddr


@dataclass
class StoreInstr(Instr):
    var: str  # *var = rval
    rval: Rval  # expr is Var | Const


@dataclass
class CallInstr(Instr):
    dest: str | None
    dtype: SourceType | None
    func: str
    args: list[Rval]  # exprs are Var | Const


@dataclass
class PhiInstr(Instr):
    dest: str
    dtype: SourceType
    arms: list[tuple[Rval, str]]  # (operand, predecessor block label)


@dataclass
class UseInstr(Instr):
    dest: str | None
    dtype: SourceType | None
    operands: list[Rval]  # exprs are Var | Const


@dataclass
class Goto(Instr):
    target: str


@dataclass
class CondBr(Instr):
    cond: Rval  # expr is Var | Const
    then_target: str
    else_target: str


@dataclass
class ReturnInstr(Instr):
    rval: Rval  # expr is Var | Const


@dataclass
class DropInstr(Instr):
    names: list[str]  # operands carry no labels


# ---------------------------------------------------------------------------
# Top-level definitions.


@dataclass
class StructDef:
    name: str
    fields: list[tuple[str, SourceType]]
    line: int = 0

    def field_type(self, fname: str) -> SourceType:
        for name, ty in self.fields:
            if name == fname:
                return ty
        raise KeyError(f"struct {self.name} has no field {fname}")


@dataclass
class GlobalDef:
    name: str
    gtype: SourceType
    init: Const
    line: int = 0


@dataclass
class FuncDef:
    name: str
    ret_type: SourceType
    params: list[tuple[str, SourceType]]
    body: list[Instr] | None  # None for body-less (external) declarations
    line: int = 0
    # Variables whose drop point is the synthetic exit node of a function
    # ending in `return`; they have no textual drop instruction.
    exit_drops: list[str] = field(default_factory=list)

    @property
    def is_external(self) -> bool:
        return self.body is None

    def var_type(self, name: str) -> SourceType:
        for pname, ty in self.params:
            if pname == name:
                return ty
        for ins in self.body or []:
            decl = decl_of(ins)
            if decl is not None and decl[0] == name:
                return decl[1]
        raise KeyError(f"no variable {name} in {self.name}")

    def decl_order(self) -> list[str]:
        """Parameters, then locals, in textual declaration order."""
        names = [p for p, _ in self.params]
        for ins in self.body or []:
            decl = decl_of(ins)
            if decl is not None and decl[0] not in names:
                names.append(decl[0])
        return names


def decl_of(ins: Instr) -> tuple[str, SourceType] | None:
    """The (name, type) a given instruction declares, if any."""
    if isinstance(ins, (Alloca, Assign, PhiInstr)):
        return ins.dest, ins.dtype
    if isinstance(ins, (CallInstr, UseInstr)) and ins.dest is not None:
        assert ins.dtype is not None
        return ins.dest, ins.dtype
    return None


@dataclass(frozen=True)
class LabelSite:
    """Where a type label occurs: a declared fragment or an rvalue."""

    kind: str  # 'field' | 'param' | 'ret' | 'global' | 'local' | 'rval'
    owner: str  # struct, function, or global name
    name: str  # field/param/local/var name; '' for ret/rval
    index: int  # fragment index (0-based) or instruction id for rvals


@dataclass
class Program:
    structs: list[StructDef]
    globals: list[GlobalDef]
    functions: list[FuncDef]
    # Populated by the parser / relabeling passes:
    frag_of: dict[int, Frag] = field(default_factory=dict)
    site_of: dict[int, LabelSite] = field(default_factory=dict)

    def struct(self, name: str) -> StructDef:
        for s in self.structs:
            if s.name == name:
                return s
        raise KeyError(f"no struct {name}")

    def function(self, name: str) -> FuncDef:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(f"no function {name}")

    def has_function(self, name: str) -> bool:
        return any(f.name == name for f in self.functions)

    def instructions(self) -> list[tuple[FuncDef, Instr]]:
        out = []
        for f in self.functions:
            for ins in f.body or []:
                out.append((f, ins))
        return out

    def num_instructions(self) -> int:
        return len(self.instructions())

    def num_labels(self) -> int:
        return len(self.frag_of)


def type_labels(ty: SourceType) -> list[int]:
    return [fr.label for fr in ty]
