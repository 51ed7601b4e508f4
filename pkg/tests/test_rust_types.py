"""Pointer transformation graph and type rendering.

The reachability tables are checked against an independently transcribed
edge list and a separate BFS, covering all 400 ordered node pairs for both
the any-edge and the nondestructive (solid-only) relation.
"""
from __future__ import annotations

import itertools

from oxiface.rust_types import (
    ALL_NODES,
    EDGES,
    QUALS,
    RustFrag,
    nondestructive,
    nondestructive_pairs,
    render_type,
    transformable,
    transformable_pairs,
    witness_path,
)

SOLID = True
DASHED = False

# Hand-transcribed edge table, kept deliberately separate from the
# implementation's edge constructor.  Entries are (src, dst, solid) with
# nodes written as (base, array, cell).


def oracle_edges():
    edges = []
    # Per-qualifier pointer discipline conversions: the same ten edges exist
    # for every (array, cell) combination.
    for a, c in QUALS:
        q = lambda b: (b, a, c)  # noqa: E731
        edges += [
            (q("ghost"), q("Box"), DASHED),
            (q("ghost"), q("Rc"), DASHED),
            (q("ghost"), q("mut"), SOLID),
            (q("Box"), q("mut"), SOLID),
            (q("Box"), q("ghost"), DASHED),
            (q("mut"), q("mut"), SOLID),
            (q("mut"), q("shared"), SOLID),
            (q("Rc"), q("Rc"), SOLID),
            (q("Rc"), q("shared"), SOLID),
            (q("shared"), q("shared"), SOLID),
        ]
    # Owned rebuilds: a Box can be reallocated with the cell qualifier added
    # or removed, and an owned slice can be collapsed to a single element.
    edges += [
        (("Box", True, False), ("Box", True, True), DASHED),
        (("Box", True, True), ("Box", True, False), DASHED),
        (("Box", False, False), ("Box", False, True), DASHED),
        (("Box", False, True), ("Box", False, False), DASHED),
        (("Box", True, True), ("Box", False, True), DASHED),
        (("Box", True, False), ("Box", False, False), DASHED),
    ]
    # A reference to a slice yields a reference to one element.
    for r in ("shared", "mut"):
        edges += [
            ((r, True, False), (r, False, False), SOLID),
            ((r, True, True), (r, False, True), SOLID),
        ]
    # Interior mutability: a shared reference to a cell grants mutation.
    edges.append((("shared", False, True), ("mut", False, False), SOLID))
    return edges


def bfs_closure(edges, solid_only):
    succ = {n: set() for n in ALL_NODES}
    for src, dst, solid in edges:
        if solid or not solid_only:
            succ[src].add(dst)
    pairs = set()
    for start in ALL_NODES:
        frontier = list(succ[start])
        seen = set()
        while frontier:
            cur = frontier.pop()
            if cur not in seen:
                seen.add(cur)
                frontier.extend(succ[cur])
        pairs |= {(start, t) for t in seen}
    return pairs


def test_node_universe():
    assert len(ALL_NODES) == 20
    assert len(set(ALL_NODES)) == 20
    assert len(list(itertools.product(ALL_NODES, ALL_NODES))) == 400


def test_edge_table_matches_oracle():
    got = {(e.src, e.dst, e.solid) for e in EDGES}
    assert got == set(oracle_edges())


def test_transformable_closure_all_400_pairs():
    oracle = bfs_closure(oracle_edges(), solid_only=False)
    for pair in itertools.product(ALL_NODES, ALL_NODES):
        assert (pair in transformable_pairs()) == (pair in oracle), pair


def test_nondestructive_closure_all_400_pairs():
    oracle = bfs_closure(oracle_edges(), solid_only=True)
    for pair in itertools.product(ALL_NODES, ALL_NODES):
        assert (pair in nondestructive_pairs()) == (pair in oracle), pair


def test_nondestructive_subset_of_transformable():
    assert nondestructive_pairs() <= transformable_pairs()


def test_closures_are_transitive():
    for pairs in (transformable_pairs(), nondestructive_pairs()):
        for (a, b1), (b2, c) in itertools.product(pairs, pairs):
            if b1 == b2:
                assert (a, c) in pairs


def test_self_loops():
    # Rc, mut, and shared convert to themselves without consuming the
    # operand; ghost and Box only get back to themselves through consuming
    # round-trips (e.g. boxing and unboxing), never nondestructively.
    for a, c in QUALS:
        for base in ("Rc", "mut", "shared"):
            assert nondestructive((base, a, c), (base, a, c))
        for base in ("ghost", "Box"):
            assert not nondestructive((base, a, c), (base, a, c))
            assert transformable((base, a, c), (base, a, c))


def test_witness_paths_are_valid():
    for solid_only, rel in (
        (False, transformable_pairs()),
        (True, nondestructive_pairs()),
    ):
        for src, dst in sorted(rel):
            path = witness_path(src, dst, solid_only=solid_only)
            assert path, (src, dst)
            assert path[0].src == src and path[-1].dst == dst
            for e, nxt in zip(path, path[1:]):
                assert e.dst == nxt.src
            if solid_only:
                assert all(e.solid for e in path)
            assert all(e in EDGES for e in path)


def test_witness_path_none_when_unreachable():
    assert witness_path(("shared", False, False), ("Box", False, False)) is None


# ------------------------------------------------------------- rendering


def no_lifetimes(_):
    return ""


def test_render_scalar():
    assert render_type([RustFrag("i32")], no_lifetimes) == "i32"
    assert render_type([RustFrag("void")], no_lifetimes) == "()"


def test_render_pointer_stack():
    frags = [
        RustFrag("Rc", cell=True),
        RustFrag("struct", struct="Node"),
    ]
    assert render_type(frags, no_lifetimes) == "Rc<RefCell<Node>>"


def test_render_ghost_erases_indirection():
    frags = [RustFrag("ghost"), RustFrag("i32")]
    assert render_type(frags, no_lifetimes) == "i32"


def test_render_reference_with_lifetime():
    frags = [RustFrag("mut", ref_lifetime=7), RustFrag("i32")]
    name = lambda r: "'a" if r == 7 else ""  # noqa: E731
    assert render_type(frags, name) == "&'a mut i32"


def test_render_array_and_option():
    frags = [RustFrag("shared", array=True), RustFrag("i32")]
    assert render_type(frags, no_lifetimes) == "&[i32]"
    nullable = lambda fr: True  # noqa: E731
    assert render_type(frags, no_lifetimes, nullable) == "Option<&[i32]>"
    # ghost is erased, so it is never Option-wrapped
    ghost = [RustFrag("ghost"), RustFrag("i32")]
    assert render_type(ghost, no_lifetimes, nullable) == "i32"


def test_render_struct_lifetime_args():
    frags = [RustFrag("struct", struct="Tree", struct_args=(1, 2))]
    name = {1: "'a", 2: "'b"}.get
    assert render_type(frags, name) == "Tree<'a, 'b>"
