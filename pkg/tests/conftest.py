"""Shared fixtures: corpus loading and a cached solve of the running example."""
from __future__ import annotations

import shutil
from pathlib import Path

import pytest

from oxiface.constraint_gen import Config
from oxiface.smt_backend import solve_program
from oxiface.source_ir import insert_all_drops, parse_file, validate_program
from oxiface.type_inference import infer_types

CORPUS = Path(__file__).resolve().parents[1] / "corpus"
CORPUS_FILES = sorted(CORPUS.glob("*.sir"))


def load_program(path):
    """The full front half of the pipeline: parse, infer, validate, drops."""
    prog = parse_file(str(path))
    inference = infer_types(prog)
    errors = inference.diagnostics + validate_program(prog)
    assert not errors, errors
    return insert_all_drops(prog)


def solver_available() -> bool:
    return shutil.which("node") is not None


requires_solver = pytest.mark.skipif(
    not solver_available(), reason="no node runtime for the bundled solver"
)


@pytest.fixture(scope="session")
def fig2a_program():
    return load_program(CORPUS / "fig2a.sir")


@pytest.fixture(scope="session")
def fig2a_solution(fig2a_program):
    """One shared solver run for every test that inspects the solved model."""
    if not solver_available():
        pytest.skip("no node runtime for the bundled solver")
    import time

    t0 = time.time()
    res, gen, system = solve_program(
        fig2a_program, Config(), filename="fig2a.sir", timeout=120.0
    )
    elapsed = time.time() - t0
    assert res.status == "sat", res.detail
    return res, gen, system, elapsed
