"""Property-based checks over randomly generated inputs."""
from __future__ import annotations

import random

from hypothesis import given, settings
from hypothesis import strategies as st

from randcfg import random_program
from oxiface.constraint_gen.formulas import (
    BaseIs,
    CellAt,
    IntConst,
    Model,
    Not,
    conj,
    disj,
)
from oxiface.rust_types import PTR_BASES, RustFrag, render_type
from oxiface.smt_backend import _as_int, _parse_sexprs, _tokenize
from oxiface.source_ir import print_program, validate_program
from oxiface.source_ir.parser import parse_program
from oxiface.type_inference import infer_types

nodes = st.tuples(
    st.sampled_from(PTR_BASES), st.booleans(), st.booleans()
)


@given(st.integers(min_value=-(10**12), max_value=10**12))
def test_int_constant_smt_round_trip(n):
    sexprs, _ = _parse_sexprs(_tokenize(IntConst(n).smt()))
    assert _as_int(sexprs[0]) == n


@given(
    st.lists(nodes, min_size=1, max_size=4),
    st.sampled_from(["i8", "i16", "i32", "i64", "f32", "f64", "bool"]),
)
def test_render_type_is_balanced_and_mentions_scalar(stack, scalar):
    frags = [
        RustFrag(b, array=a, cell=c, ref_lifetime=0) for b, a, c in stack
    ]
    frags.append(RustFrag(scalar))
    text = render_type(frags, lambda r: "'a")
    for open_ch, close_ch in ("<>", "[]"):
        assert text.count(open_ch) == text.count(close_ch)
    base = {"bool": "bool"}.get(scalar, scalar)
    assert base in text


@given(st.lists(st.tuples(st.integers(0, 5), st.booleans()), max_size=6))
def test_conj_disj_agree_with_python_semantics(assignments):
    m = Model()
    formulas = []
    truth = []
    for label, positive in assignments:
        m.base[label] = "mut"
        f = BaseIs(label, "mut") if positive else CellAt(label)
        formulas.append(f)
        truth.append(positive)  # cells are all unset in m
    assert conj(*formulas).eval(m) == all(truth)
    assert disj(*formulas).eval(m) == any(truth)
    for f, t in zip(formulas, truth):
        assert Not(f).eval(m) == (not t)


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_random_programs_parse_print_fixpoint(seed):
    rng = random.Random(seed)
    text = random_program(rng, 3, n_blocks=(2, 5), with_loans=True)
    prog = parse_program(text)
    assert infer_types(prog).diagnostics == []
    assert validate_program(prog) == []
    once = print_program(prog)
    assert print_program(parse_program(once)) == once
