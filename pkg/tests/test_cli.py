"""Command-line behaviour that does not need a solver run."""
from __future__ import annotations

import json

import pytest

from conftest import CORPUS
from oxiface.cli import main

FIG2A = str(CORPUS / "fig2a.sir")


def test_check_ok(capsys):
    assert main(["check", FIG2A]) == 0


def test_check_print_round_trips(capsys):
    assert main(["check", FIG2A, "--print"]) == 0
    text = capsys.readouterr().out
    assert "push" in text and "drop(" in text


def test_check_rejects_malformed(tmp_path, capsys):
    bad = tmp_path / "bad.sir"
    bad.write_text("<i32> main() { return x; }")
    with pytest.raises(SystemExit) as exc:
        main(["check", str(bad)])
    assert exc.value.code == 3
    assert "error:" in capsys.readouterr().err


def test_stats_table(capsys):
    assert main(["stats", FIG2A]) == 0
    stats = json.loads(capsys.readouterr().out)
    assert stats["instructions"] == 34
    assert stats["labels"] == 114
    assert stats["interface_variables"] == 14
    assert stats["interface_labels"] == 22
    assert stats["structs"] == 1
    assert stats["external_functions"] == 4


def test_constraints_dump(capsys):
    assert main(["constraints", FIG2A]) == 0
    out = capsys.readouterr().out
    assert "C-Parity-Ptr" in out and "L-Merge" in out


def test_constraints_smt_dump(capsys):
    assert main(["constraints", FIG2A, "--smt"]) == 0
    out = capsys.readouterr().out
    assert "(declare-datatypes ((BaseTy 0))" in out
    assert "(check-sat)" in out


def test_emit_fallback(capsys):
    assert main(["emit", FIG2A, "--fallback"]) == 0
    out = capsys.readouterr().out
    assert "fn push(list: Rc<RefCell<Node>>, x: i32);" in out


def test_emit_fallback_json(capsys):
    assert main(["emit", FIG2A, "--fallback", "--json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["interface_variables"] == 14
    assert report["declarations"].startswith("struct Node")


def test_transform_query(capsys):
    assert main(["transform-query", "Box", "shared"]) == 0
    out = capsys.readouterr().out
    assert "transformable: yes" in out
    assert "nondestructive: yes" in out  # Box -> mut -> shared, all solid

    assert main(["transform-query", "shared", "Box"]) == 1
    out = capsys.readouterr().out
    assert "transformable: no" in out


def test_transform_query_quals(capsys):
    assert main(["transform-query", "shared+cell", "mut"]) == 0
    assert "p.borrow_mut()" in capsys.readouterr().out
    with pytest.raises(SystemExit):
        main(["transform-query", "lol", "Box"])


def test_out_file(tmp_path):
    target = tmp_path / "decls.rs"
    assert main(["emit", FIG2A, "--fallback", "--out", str(target)]) == 0
    assert "struct Node" in target.read_text()
