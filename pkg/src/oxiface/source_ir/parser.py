"""Parser for the textual source language (.sir files).

Type labels may be written explicitly as `@N:` prefixes on fragments and
rvalues. Explicit labels win; every unannotated site receives the smallest
unused number, scanning in textual order. Comments are `/- ... -/` blocks.
"""
from __future__ import annotations

import re

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
    Frag,
    FuncDef,
    GlobalDef,
    Goto,
    Instr,
    LabelSite,
    PhiInstr,
    PRIMITIVES,
    Program,
    ReturnInstr,
    Rval,
    SourceType,
    StoreInstr,
    StructDef,
    UseInstr,
    Var,
    decl_of,
)


class ParseError(Exception):
    pass


_TOKEN_RE = re.compile(
    r"""
    (?P<comment>/-.*?-/)
  | (?P<float>-?\d+\.\d+)
  | (?P<int>-?\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_.]*)
  | (?P<punct><|>|\(|\)|\{|\}|\[|\]|,|;|:|=|\*|&|\.|@|\?)
  | (?P<ws>\s+)
  | (?P<bad>.)
    """,
    re.VERBOSE | re.DOTALL,
)

KEYWORDS = {
    "struct",
    "alloca",
    "phi",
    "use",
    "goto",
    "if",
    "else",
    "return",
    "drop",
    "null",
}


class _Tok:
    def __init__(self, kind: str, text: str, line: int):
        self.kind = kind
        self.text = text
        self.line = line

    def __repr__(self) -> str:
        return f"{self.kind}:{self.text!r}@{self.line}"


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    line = 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        assert m is not None
        kind = m.lastgroup
        tok = m.group()
        if kind == "bad":
            raise ParseError(f"line {line}: unexpected character {tok!r}")
        if kind not in ("ws", "comment"):
            toks.append(_Tok(kind, tok, line))
        line += tok.count("\n")
        pos = m.end()
    toks.append(_Tok("eof", "", line))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0
        # (explicit label | None, frag-or-rval object) in textual order
        self.sites: list[tuple[int | None, object]] = []
        self.next_iid = 0

    # -- token helpers -----------------------------------------------------

    def peek(self, ahead: int = 0) -> _Tok:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self) -> _Tok:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def expect(self, text: str) -> _Tok:
        t = self.next()
        if t.text != text:
            raise ParseError(f"line {t.line}: expected {text!r}, got {t.text!r}")
        return t

    def expect_ident(self) -> str:
        t = self.next()
        if t.kind != "ident" or t.text in KEYWORDS:
            raise ParseError(f"line {t.line}: expected identifier, got {t.text!r}")
        return t.text

    def at(self, text: str) -> bool:
        return self.peek().text == text

    # -- labels ------------------------------------------------------------

    def parse_opt_label(self) -> int | None:
        if self.at("@"):
            self.next()
            t = self.next()
            if t.kind != "int":
                raise ParseError(f"line {t.line}: expected label number after @")
            self.expect(":")
            return int(t.text)
        return None

    def register(self, explicit: int | None, obj: object) -> None:
        self.sites.append((explicit, obj))

    # -- types -------------------------------------------------------------

    def parse_frag(self) -> Frag:
        explicit = self.parse_opt_label()
        t = self.next()
        if t.text == "?" or t.text == "unknown":
            fr = Frag("unknown")
        elif t.text == "ptr":
            fr = Frag("ptr")
        elif t.text in PRIMITIVES:
            fr = Frag(t.text)
        elif t.text == "struct":
            self.expect("(")
            name = self.expect_ident()
            self.expect(")")
            fr = Frag("struct", name)
        else:
            raise ParseError(f"line {t.line}: bad fragment kind {t.text!r}")
        self.register(explicit, fr)
        return fr

    def parse_type(self) -> SourceType:
        self.expect("<")
        frags = [self.parse_frag()]
        while self.at(","):
            self.next()
            if self.at(">"):
                break
            frags.append(self.parse_frag())
        self.expect(">")
        return tuple(frags)

    # -- rvalues -----------------------------------------------------------

    def parse_operand(self):
        t = self.next()
        if t.kind == "int":
            return Const(int(t.text))
        if t.kind == "float":
            return Const(float(t.text))
        if t.text == "null":
            return Const(None)
        if t.kind == "ident" and t.text not in KEYWORDS:
            return Var(t.text)
        raise ParseError(f"line {t.line}: expected variable or constant, got {t.text!r}")

    def parse_rval(self) -> Rval:
        explicit = self.parse_opt_label()
        if self.at("*"):
            self.next()
            expr = Deref(self.expect_ident())
        elif self.at("&"):
            self.next()
            if self.at("*"):
                # &*(*v).f
                self.next()
                self.expect("(")
                self.expect("*")
                v = self.expect_ident()
                self.expect(")")
                self.expect(".")
                f = self.expect_ident()
                expr = FieldAddr(v, f)
            else:
                v = self.expect_ident()
                self.expect("[")
                idx = self.parse_operand()
                self.expect("]")
                expr = EltAddr(v, idx)
        else:
            expr = self.parse_operand()
        rv = Rval(-1 if explicit is None else explicit, expr)
        self.register(explicit, rv)
        return rv

    # -- instructions ------------------------------------------------------

    def finish(self, ins: Instr, block: str | None, line: int) -> Instr:
        ins.iid = self.next_iid
        self.next_iid += 1
        ins.block = block
        ins.line = line
        return ins

    def parse_instr(self) -> Instr:
        block = None
        # A block label is IDENT ':' not followed by a type or instruction
        # starter that's itself a label... a leading `name:` is a block label.
        if (
            self.peek().kind == "ident"
            and self.peek().text not in KEYWORDS
            and self.peek(1).text == ":"
        ):
            block = self.next().text
            self.next()
        line = self.peek().line
        t = self.peek()

        if t.text == "*":
            self.next()
            v = self.expect_ident()
            self.expect("=")
            rv = self.parse_rval()
            if not isinstance(rv.expr, (Var, Const)):
                raise ParseError(f"line {line}: store operand must be a variable or constant")
            self.expect(";")
            return self.finish(StoreInstr(v, rv), block, line)

        if t.text == "goto":
            self.next()
            target = self.expect_ident()
            self.expect(";")
            return self.finish(Goto(target), block, line)

        if t.text == "if":
            self.next()
            self.expect("(")
            cond = self.parse_rval()
            if not isinstance(cond.expr, (Var, Const)):
                raise ParseError(f"line {line}: branch condition must be a variable or constant")
            self.expect(")")
            self.expect("goto")
            then_t = self.expect_ident()
            self.expect(";")
            self.expect("else")
            self.expect("goto")
            else_t = self.expect_ident()
            self.expect(";")
            return self.finish(CondBr(cond, then_t, else_t), block, line)

        if t.text == "return":
            self.next()
            rv = self.parse_rval()
            if not isinstance(rv.expr, (Var, Const)):
                raise ParseError(f"line {line}: return operand must be a variable or constant")
            self.expect(";")
            return self.finish(ReturnInstr(rv), block, line)

        if t.text == "drop":
            self.next()
            self.expect("(")
            names = []
            while not self.at(")"):
                names.append(self.expect_ident())
                if self.at(","):
                    self.next()
            self.expect(")")
            self.expect(";")
            return self.finish(DropInstr(names), block, line)

        if t.text in ("use", "phi", "alloca") or (t.kind == "ident" and self.peek(1).text == "("):
            # call/use without destination
            return self._parse_assigning(None, None, block, line)

        if t.text == "<":
            dtype = self.parse_type()
            dest = self.expect_ident()
            self.expect("=")
            return self._parse_assigning(dest, dtype, block, line)

        raise ParseError(f"line {t.line}: cannot parse instruction at {t.text!r}")

    def _parse_assigning(
        self, dest: str | None, dtype: SourceType | None, block: str | None, line: int
    ) -> Instr:
        t = self.peek()
        if t.text == "alloca":
            if dest is None:
                raise ParseError(f"line {line}: alloca needs a destination")
            self.next()
            self.expect("(")
            size = self.parse_operand()
            self.expect(")")
            self.expect(";")
            if not isinstance(size, Const):
                raise ParseError(f"line {line}: alloca size must be a constant")
            return self.finish(Alloca(dest, dtype, size), block, line)

        if t.text == "phi":
            if dest is None:
                raise ParseError(f"line {line}: phi needs a destination")
            self.next()
            self.expect("(")
            arms = []
            while not self.at(")"):
                rv = self.parse_rval()
                if not isinstance(rv.expr, (Var, Const)):
                    raise ParseError(f"line {line}: phi operand must be a variable or constant")
                self.expect(":")
                arms.append((rv, self.expect_ident()))
                if self.at(","):
                    self.next()
            self.expect(")")
            self.expect(";")
            return self.finish(PhiInstr(dest, dtype, arms), block, line)

        if t.text == "use":
            self.next()
            self.expect("(")
            ops = []
            while not self.at(")"):
                rv = self.parse_rval()
                if not isinstance(rv.expr, (Var, Const)):
                    raise ParseError(f"line {line}: use operand must be a variable or constant")
                ops.append(rv)
                if self.at(","):
                    self.next()
            self.expect(")")
            self.expect(";")
            return self.finish(UseInstr(dest, dtype, ops), block, line)

        if t.kind == "ident" and self.peek(1).text == "(":
            fname = self.next().text
            self.expect("(")
            args = []
            while not self.at(")"):
                rv = self.parse_rval()
                if not isinstance(rv.expr, (Var, Const)):
                    raise ParseError(f"line {line}: call argument must be a variable or constant")
                args.append(rv)
                if self.at(","):
                    self.next()
            self.expect(")")
            self.expect(";")
            return self.finish(CallInstr(dest, dtype, fname, args), block, line)

        # remaining assignment forms: load / field address / element address
        if dest is None:
            raise ParseError(f"line {line}: expected an instruction")
        rv = self.parse_rval()
        if not isinstance(rv.expr, (Deref, FieldAddr, EltAddr)):
            raise ParseError(
                f"line {line}: right-hand side must be *v, &*(*v).f, or &v[e]"
            )
        self.expect(";")
        return self.finish(Assign(dest, dtype, rv), block, line)

    # -- top level ----------------------------------------------------------

    def parse_program(self) -> Program:
        structs: list[StructDef] = []
        globals_: list[GlobalDef] = []
        functions: list[FuncDef] = []
        while not self.at(""):
            if self.at("struct"):
                line = self.peek().line
                self.next()
                name = self.expect_ident()
                self.expect("{")
                fields = []
                while not self.at("}"):
                    fty = self.parse_type()
                    fname = self.expect_ident()
                    self.expect(";")
                    fields.append((fname, fty))
                self.expect("}")
                if self.at(";"):
                    self.next()
                structs.append(StructDef(name, fields, line))
                continue

            line = self.peek().line
            ty = self.parse_type()
            name = self.expect_ident()
            if self.at("="):
                self.next()
                init = self.parse_operand()
                if not isinstance(init, Const):
                    raise ParseError(f"line {line}: global initializer must be a constant")
                self.expect(";")
                globals_.append(GlobalDef(name, ty, init, line))
                continue

            self.expect("(")
            params = []
            while not self.at(")"):
                pty = self.parse_type()
                pname = self.expect_ident()
                params.append((pname, pty))
                if self.at(","):
                    self.next()
            self.expect(")")
            if self.at(";"):
                self.next()
                functions.append(FuncDef(name, ty, params, None, line))
                continue
            self.expect("{")
            body = []
            while not self.at("}"):
                body.append(self.parse_instr())
            self.expect("}")
            functions.append(FuncDef(name, ty, params, body, line))

        prog = Program(structs, globals_, functions)
        self.assign_labels()
        index_labels(prog)
        resolve_rval_kinds(prog)
        return prog

    def assign_labels(self) -> None:
        used: set[int] = set()
        for explicit, _ in self.sites:
            if explicit is not None:
                if explicit in used:
                    raise ParseError(f"duplicate explicit label @{explicit}")
                used.add(explicit)
        counter = 0
        for explicit, obj in self.sites:
            if explicit is None:
                while counter in used:
                    counter += 1
                label = counter
                used.add(label)
            else:
                label = explicit
            if isinstance(obj, Frag):
                obj.label = label
            else:
                assert isinstance(obj, Rval)
                obj.label = label


def index_labels(prog: Program) -> None:
    """Rebuild the label -> fragment and label -> site tables."""
    prog.frag_of = {}
    prog.site_of = {}

    def add(label: int, frag: Frag, site: LabelSite) -> None:
        if label in prog.frag_of:
            raise ParseError(f"label {label} occurs twice")
        prog.frag_of[label] = frag
        prog.site_of[label] = site

    def add_type(ty: SourceType, kind: str, owner: str, name: str) -> None:
        for i, fr in enumerate(ty):
            add(fr.label, fr, LabelSite(kind, owner, name, i))

    for s in prog.structs:
        for fname, fty in s.fields:
            add_type(fty, "field", s.name, fname)
    for g in prog.globals:
        add_type(g.gtype, "global", g.name, "")
    for f in prog.functions:
        add_type(f.ret_type, "ret", f.name, "")
        for pname, pty in f.params:
            add_type(pty, "param", f.name, pname)
        for ins in f.body or []:
            dct = decl_of(ins)
            if dct is not None:
                add_type(dct[1], "local", f.name, dct[0])
            for rv in rvals_of(ins):
                add(
                    rv.label,
                    Frag("unknown"),
                    LabelSite("rval", f.name, "", ins.iid),
                )


def rvals_of(ins: Instr) -> list[Rval]:
    if isinstance(ins, Assign):
        return [ins.rval]
    if isinstance(ins, StoreInstr):
        return [ins.rval]
    if isinstance(ins, CallInstr):
        return list(ins.args)
    if isinstance(ins, PhiInstr):
        return [rv for rv, _ in ins.arms]
    if isinstance(ins, UseInstr):
        return list(ins.operands)
    if isinstance(ins, CondBr):
        return [ins.cond]
    if isinstance(ins, ReturnInstr):
        return [ins.rval]
    return []


def resolve_rval_kinds(prog: Program) -> None:
    """Compute the fragment kind of every rvalue label from its context.

    A plain variable, load, phi, or use result adopts the kind of the
    fragment it mirrors; address-of expressions are pointers; constants take
    their kind from the expected type at the point of use.
    """
    for f in prog.functions:
        for ins in f.body or []:
            for rv in rvals_of(ins):
                prog.frag_of[rv.label] = _rval_frag(prog, f, ins, rv)


def _var_frag(f: FuncDef, name: str, idx: int) -> Frag:
    try:
        ty = f.var_type(name)
    except KeyError:
        raise ParseError(f"unknown variable {name} in {f.name}") from None
    if idx >= len(ty):
        raise ParseError(f"variable {name} in {f.name}: fragment {idx} out of range")
    return ty[idx]


def _copy_kind(fr: Frag, label: int) -> Frag:
    return Frag(fr.kind, fr.struct, label)


def _rval_frag(prog: Program, f: FuncDef, ins: Instr, rv: Rval) -> Frag:
    e = rv.expr
    if isinstance(e, Var):
        base = _var_frag(f, e.name, 0)
        return _copy_kind(base, rv.label)
    if isinstance(e, Deref):
        return _copy_kind(_var_frag(f, e.var, 1), rv.label)
    if isinstance(e, (FieldAddr, EltAddr)):
        return Frag("ptr", None, rv.label)
    assert isinstance(e, Const)
    return _const_frag(prog, f, ins, rv)


def _const_frag(prog: Program, f: FuncDef, ins: Instr, rv: Rval) -> Frag:
    c = rv.expr
    assert isinstance(c, Const)
    expected: Frag | None = None
    if isinstance(ins, StoreInstr):
        expected = _var_frag(f, ins.var, 1)
    elif isinstance(ins, ReturnInstr):
        expected = f.ret_type[0]
    elif isinstance(ins, PhiInstr):
        expected = ins.dtype[0]
    elif isinstance(ins, UseInstr) and ins.dtype is not None:
        expected = ins.dtype[0]
    elif isinstance(ins, CallInstr):
        if prog.has_function(ins.func):
            callee = prog.function(ins.func)
            for i, arg in enumerate(ins.args):
                if arg is rv and i < len(callee.params):
                    expected = callee.params[i][1][0]
    if expected is not None:
        return _copy_kind(expected, rv.label)
    if c.value is None:
        return Frag("ptr", None, rv.label)
    if isinstance(c.value, float):
        return Frag("f64", None, rv.label)
    if isinstance(ins, CondBr):
        return Frag("i32", None, rv.label)
    return Frag("i64", None, rv.label)


def parse_program(text: str) -> Program:
    return _Parser(text).parse_program()


def parse_file(path: str) -> Program:
    with open(path, encoding="utf-8") as fh:
        return parse_program(fh.read())
