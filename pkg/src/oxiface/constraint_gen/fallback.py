"""A maximally conservative solution built without any solver.

Every pointer fragment becomes a reference-counted, interior-mutable cell
(`Rc<RefCell<_>>`).  That choice satisfies the constraint system whenever one
is satisfiable at all for programs that do not force a plain mutable
reference through an external signature: interior mutability discharges
every mutation and aliasing obligation, reference counting discharges every
ownership obligation, and the empty lifetime/loan relations discharge the
borrow conditions vacuously.

The model is used as an independent oracle in tests and as a last-resort
output when no solver is available.
"""
from __future__ import annotations

from ..source_ir.ir import EltAddr, Program
from ..source_ir.rvals import rval_source_type
from .formulas import Model, struct_base
from .generate import RL_OFFSET, Generator


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


def _struct_ranks(prog: Program) -> dict[str, int]:
    """Longest-path depth over direct (by-value) struct embedding."""
    embeds: dict[str, set[str]] = {s.name: set() for s in prog.structs}
    for s in prog.structs:
        for _, ty in s.fields:
            if len(ty) == 1 and ty[0].kind == "struct":
                embeds[s.name].add(ty[0].struct)

    ranks: dict[str, int] = {}

    def depth(name: str, stack: tuple[str, ...] = ()) -> int:
        if name in ranks:
            return ranks[name]
        if name in stack:  # by-value cycle: invalid program, keep it finite
            return 0
        inner = [depth(e, stack + (name,)) for e in embeds.get(name, ())]
        ranks[name] = 1 + max(inner, default=-1)
        return ranks[name]

    for s in prog.structs:
        depth(s.name)
    return ranks


def label_classes(
    prog: Program, gen: Generator, include_transform: bool = False
) -> dict[int, int]:
    """Label -> class representative under fragment-equality pairings
    (correspondences plus call argument/return pairings).  With
    include_transform, copy sources are merged with their results too."""
    uf = _UnionFind()
    for f in gen.defined_funcs():
        if include_transform:
            for info in gen.rvals[f.name]:
                src = gen._transform_src(info)
                if src is not None and info.head_kind == "ptr":
                    uf.union(src[1], info.label)
        for ins in f.body or []:
            for c in gen.cors(f, ins):
                uf.union(c.dst, c.src)
            if not hasattr(ins, "args") or not prog.has_function(
                getattr(ins, "func", "")
            ):
                continue
            callee = prog.function(ins.func)
            for arg, (_, pty) in zip(ins.args, callee.params):
                aty = rval_source_type(prog, f, arg)
                for fa, fp in zip(aty, pty):
                    uf.union(fa.label, fp.label)
            if getattr(ins, "dtype", None) is not None:
                for fd, fr in zip(ins.dtype, callee.ret_type):
                    uf.union(fd.label, fr.label)
    return {l: uf.find(l) for l in prog.frag_of}


def _array_labels(prog: Program, gen: Generator) -> set[int]:
    """Labels that must carry the array qualifier: element-address results,
    closed under fragment equality and copy pairings."""
    classes = label_classes(prog, gen, include_transform=True)
    seeds: set[int] = set()
    for f in gen.defined_funcs():
        for info in gen.rvals[f.name]:
            if isinstance(info.rval.expr, EltAddr):
                seeds.add(info.label)
    roots = {classes[s] for s in seeds}
    return {l for l in prog.frag_of if classes[l] in roots}


def fallback_model(prog: Program, gen: Generator | None = None) -> Model:
    gen = gen or Generator(prog)
    m = Model()
    for label, fr in prog.frag_of.items():
        if fr.kind == "ptr":
            m.base[label] = "Rc"
            m.cell.add(label)
            rl = gen.fixed_rl(label)
            m.rl[label] = rl if rl is not None else 0
        elif fr.kind == "struct":
            m.base[label] = struct_base(fr.struct)
        else:
            m.base[label] = fr.kind
    m.array = _array_labels(prog, gen)
    m.rank = _struct_ranks(prog)
    for s in prog.structs:
        m.gen[s.name] = 0
    return m


__all__ = ["fallback_model", "label_classes", "RL_OFFSET"]
