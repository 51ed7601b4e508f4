"""Rust-side type fragments, pointer transformations, and rendering.

A Rust type is a sequence of fragments mirroring the source type: every
fragment but the last is a pointer discipline (ghost, Box, Rc, shared, mut),
optionally qualified with interior mutability (Cell) and/or a slice ([]).
The pointer transformation graph records which disciplines convert to which
via safe Rust expressions; solid edges leave the operand usable afterwards,
dashed edges consume it.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

PTR_BASES = ("ghost", "Box", "Rc", "shared", "mut")
SCALAR_BASES = ("unknown", "void", "bool", "i8", "i16", "i32", "i64", "f32", "f64")
OWNING = ("ghost", "Box", "Rc")
REF_BASES = ("shared", "mut")

# Lexicographic objective weights per pointer discipline.
COST_HEIGHT = {"shared": 3, "mut": 2, "ghost": 1, "Box": 1, "Rc": 1}
COST_DEPTH = {"shared": 1, "mut": 2, "ghost": 3, "Box": 3, "Rc": 3}
COST_DYNAMIC = {"shared": 1, "mut": 2, "ghost": 3, "Box": 4, "Rc": 5}

# A graph node is (base, array, cell).
Node = tuple[str, bool, bool]
QUALS: tuple[tuple[bool, bool], ...] = (
    (False, False),
    (False, True),
    (True, False),
    (True, True),
)
ALL_NODES: tuple[Node, ...] = tuple(
    (b, a, c) for b in PTR_BASES for a, c in QUALS
)


@dataclass(frozen=True)
class Edge:
    src: Node
    dst: Node
    solid: bool
    witness: str  # Rust expression transforming p


def _edges() -> tuple[Edge, ...]:
    out: list[Edge] = []
    for a, c in QUALS:

        def n(base: str, a: bool = a, c: bool = c) -> Node:
            return (base, a, c)

        out += [
            Edge(n("ghost"), n("Box"), False, "Box::new(p)"),
            Edge(n("ghost"), n("Rc"), False, "Rc::new(p)"),
            Edge(n("ghost"), n("mut"), True, "&mut p"),
            Edge(n("Box"), n("mut"), True, "&mut *p"),
            Edge(n("Box"), n("ghost"), False, "*p"),
            Edge(n("mut"), n("mut"), True, "&mut *p"),
            Edge(n("mut"), n("shared"), True, "&*p"),
            Edge(n("Rc"), n("Rc"), True, "Rc::clone(&p)"),
            Edge(n("Rc"), n("shared"), True, "&*p"),
            Edge(n("shared"), n("shared"), True, "&*p"),
        ]
    box = lambda a, c: ("Box", a, c)  # noqa: E731
    out += [
        Edge(
            box(True, False),
            box(True, True),
            False,
            "Vec::from_iter(p.into_iter().map(Cell::new)).into_boxed_slice()",
        ),
        Edge(
            box(True, True),
            box(True, False),
            False,
            "Vec::from_iter(p.into_iter().map(Cell::into_inner)).into_boxed_slice()",
        ),
        Edge(box(False, False), box(False, True), False, "Box::new(Cell::new(*p))"),
        Edge(box(False, True), box(False, False), False, "Box::new((*p).into_inner())"),
        Edge(box(True, True), box(False, True), False, "Box::new(p[0])"),
        Edge(box(True, False), box(False, False), False, "Box::new(p[0])"),
    ]
    for r in REF_BASES:
        amp = "&mut " if r == "mut" else "&"
        out += [
            Edge((r, True, False), (r, False, False), True, f"{amp}p[0]"),
            Edge((r, True, True), (r, False, True), True, f"{amp}p[0]"),
        ]
    out.append(
        Edge(("shared", False, True), ("mut", False, False), True, "p.borrow_mut()")
    )
    return tuple(out)


EDGES: tuple[Edge, ...] = _edges()


def _closure(solid_only: bool) -> frozenset[tuple[Node, Node]]:
    """Pairs (s, t) with a path of one or more edges from s to t."""
    succ: dict[Node, set[Node]] = {n: set() for n in ALL_NODES}
    for e in EDGES:
        if e.solid or not solid_only:
            succ[e.src].add(e.dst)
    pairs: set[tuple[Node, Node]] = set()
    for start in ALL_NODES:
        seen: set[Node] = set()
        work = list(succ[start])
        while work:
            cur = work.pop()
            if cur in seen:
                continue
            seen.add(cur)
            work += succ[cur]
        pairs |= {(start, t) for t in seen}
    return frozenset(pairs)


@lru_cache(maxsize=None)
def transformable_pairs() -> frozenset[tuple[Node, Node]]:
    return _closure(solid_only=False)


@lru_cache(maxsize=None)
def nondestructive_pairs() -> frozenset[tuple[Node, Node]]:
    return _closure(solid_only=True)


def transformable(src: Node, dst: Node) -> bool:
    return (src, dst) in transformable_pairs()


def nondestructive(src: Node, dst: Node) -> bool:
    return (src, dst) in nondestructive_pairs()


def witness_path(src: Node, dst: Node, solid_only: bool = False) -> list[Edge] | None:
    """Shortest edge path from src to dst (length >= 1), or None."""
    succ: dict[Node, list[Edge]] = {n: [] for n in ALL_NODES}
    for e in EDGES:
        if e.solid or not solid_only:
            succ[e.src].append(e)
    from collections import deque

    work: deque[tuple[Node, list[Edge]]] = deque([(src, [])])
    seen: set[Node] = set()
    while work:
        cur, path = work.popleft()
        for e in succ[cur]:
            if path and e.dst in seen:
                continue
            np = path + [e]
            if e.dst == dst:
                return np
            if e.dst not in seen:
                seen.add(e.dst)
                work.append((e.dst, np))
    return None


@dataclass(frozen=True)
class RustFrag:
    """A solved Rust type fragment for one label."""

    base: str  # pointer base, scalar base, or "struct"
    struct: str | None = None
    struct_args: tuple[int, ...] = ()  # lifetime variables of a struct fragment
    ref_lifetime: int | None = None  # lifetime variable of shared/mut
    array: bool = False
    cell: bool = False

    @property
    def is_pointer(self) -> bool:
        return self.base in PTR_BASES

    def node(self) -> Node:
        if not self.is_pointer:
            raise ValueError(f"{self.base} is not a pointer fragment")
        return (self.base, self.array, self.cell)


SCALAR_RUST = {
    "void": "()",
    "bool": "bool",
    "i8": "i8",
    "i16": "i16",
    "i32": "i32",
    "i64": "i64",
    "f32": "f32",
    "f64": "f64",
    "unknown": "Unknown",
}


def render_type(
    frags: list[RustFrag],
    lifetime_name,
    nullable=lambda frag: False,
) -> str:
    """Concrete Rust type for a fragment sequence.

    `lifetime_name` maps a lifetime variable to a name like "'a".
    `nullable` says whether a pointer fragment should be Option-wrapped.
    """
    last = frags[-1]
    if last.base == "struct":
        args = ", ".join(lifetime_name(r) for r in last.struct_args)
        inner = f"{last.struct}<{args}>" if args else last.struct
    else:
        inner = SCALAR_RUST[last.base]
    for fr in reversed(frags[:-1]):
        ref = inner
        if fr.cell:
            ref = f"RefCell<{ref}>"
        if fr.array:
            ref = f"[{ref}]"
        if fr.base == "ghost":
            inner = ref
        elif fr.base == "Box":
            inner = f"Box<{ref}>"
        elif fr.base == "Rc":
            inner = f"Rc<{ref}>"
        elif fr.base == "shared":
            lt = lifetime_name(fr.ref_lifetime)
            inner = f"&{lt} {ref}" if lt else f"&{ref}"
        elif fr.base == "mut":
            lt = lifetime_name(fr.ref_lifetime)
            inner = f"&{lt} mut {ref}" if lt else f"&mut {ref}"
        else:
            raise ValueError(f"non-pointer fragment {fr.base} before the last")
        if fr.base != "ghost" and nullable(fr):
            inner = f"Option<{inner}>"
    return inner
