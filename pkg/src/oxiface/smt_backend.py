"""Lowering the constraint system to SMT-LIB 2 and driving a solver.

The solver runs as an external process (by default the bundled z3 wrapper at
tools/solver/z3smt2.mjs, overridable with --solver-path or the OXIFACE_SOLVER
environment variable) under lexicographic minimization of the four precision
objectives.  A sequential mode solves the objectives one at a time, fixing
each optimum before minimizing the next; both modes must agree.
"""
from __future__ import annotations

import os
import shlex
import shutil
import subprocess
from dataclasses import dataclass, field
from pathlib import Path

from .constraint_gen.config import Config
from .constraint_gen.formulas import ConstraintSystem, Model, smt_base
from .constraint_gen.generate import Generator
from .source_ir.ir import Program

SCALAR_CONSTRUCTORS = (
    "unknown",
    "void",
    "bool",
    "i8",
    "i16",
    "i32",
    "i64",
    "f32",
    "f64",
)
PTR_CONSTRUCTORS = ("ghost", "Box", "Rc", "shared", "mut")

DEFAULT_WRAPPER = Path(__file__).resolve().parents[2] / "tools" / "solver" / "z3smt2.mjs"


@dataclass
class SolveResult:
    status: str  # 'sat' | 'unsat' | 'timeout' | 'error'
    model: Model | None = None
    objectives: list[int] | None = None
    # (func, lifetime-term-a, lifetime-term-b) -> a outlives b
    outlives: dict[tuple[str, str, str], bool] = field(default_factory=dict)
    values: dict = field(default_factory=dict)
    detail: str = ""

    @property
    def exit_code(self) -> int:
        return {"sat": 0, "unsat": 1, "timeout": 2}.get(self.status, 3)


Query = tuple[tuple, str, str]  # (key, sort, term)


def _base_value(token: str) -> str:
    if token.startswith("BT_struct_"):
        return "struct:" + token[len("BT_struct_") :]
    return token[len("BT_") :]


class Lowering:
    """Deterministic SMT-LIB text for one constraint system."""

    def __init__(
        self,
        prog: Program,
        system: ConstraintSystem,
        gen: Generator,
        extra_asserts: tuple[str, ...] = (),
        extra_queries: tuple[Query, ...] = (),
    ):
        self.prog = prog
        self.system = system
        self.gen = gen
        self.extra_asserts = tuple(extra_asserts)
        self.extra_queries = tuple(extra_queries)
        self.queries: list[Query] = []

    # ------------------------------------------------------------ pieces

    def datatype(self) -> str:
        ctors = [f"(BT_{n})" for n in SCALAR_CONSTRUCTORS + PTR_CONSTRUCTORS]
        ctors += [f"({smt_base(f'struct:{s.name}')})" for s in self.prog.structs]
        return f"(declare-datatypes ((BaseTy 0)) (({' '.join(ctors)})))"

    def declarations(self) -> list[str]:
        out = []
        for label in sorted(self.prog.frag_of):
            fr = self.prog.frag_of[label]
            out.append(f"(declare-const b_{label} BaseTy)")
            out.append(f"(declare-const a_{label} Bool)")
            out.append(f"(declare-const c_{label} Bool)")
            if fr.kind == "ptr":
                out.append(f"(declare-const rl_{label} Int)")
                fixed = self.gen.fixed_rl(label)
                if fixed is not None:
                    out.append(f"(assert (= rl_{label} {fixed}))")
            elif fr.kind == "struct":
                out.append(f"(declare-fun slt_{label} (Int) Int)")
        for s in self.prog.structs:
            out.append(f"(declare-const gen_{s.name} Int)")
            out.append(f"(declare-const rank_{s.name} Int)")
        out.append("(declare-fun lt (Int Int) Bool)")
        out.append("(declare-fun lo (Int Int) Bool)")
        return out

    def asserts(self) -> list[str]:
        return [f"(assert {c.formula.smt()})" for c in self.system.constraints]

    @staticmethod
    def objective_expr(obj) -> str:
        if not obj:
            return "0"
        terms = [f"(ite {f.smt()} {w} 0)" for w, f in obj]
        return terms[0] if len(terms) == 1 else f"(+ {' '.join(terms)})"

    def build_queries(self) -> list[Query]:
        qs: list[Query] = []
        bound = self.gen.cfg.generics_bound
        for label in sorted(self.prog.frag_of):
            fr = self.prog.frag_of[label]
            qs.append((("base", label), "BaseTy", f"b_{label}"))
            qs.append((("array", label), "Bool", f"a_{label}"))
            qs.append((("cell", label), "Bool", f"c_{label}"))
            if fr.kind == "ptr":
                qs.append((("rl", label), "Int", f"rl_{label}"))
            elif fr.kind == "struct":
                for j in range(1, bound + 1):
                    qs.append((("slt", label, j), "Int", f"(slt_{label} {j})"))
        for s in self.prog.structs:
            qs.append((("gen", s.name), "Int", f"gen_{s.name}"))
            qs.append((("rank", s.name), "Int", f"rank_{s.name}"))
        qs += self.outlives_queries()
        qs += list(self.extra_queries)
        return qs

    def outlives_queries(self) -> list[Query]:
        """Does one signature lifetime of a function outlive another?
        True when the first lifetime covers the end of the second."""
        qs: list[Query] = []
        bound = self.gen.cfg.generics_bound
        for f in self.prog.functions:
            terms: list[str] = []
            for label, _, _ in self.gen.sig_labels(f):
                fr = self.prog.frag_of[label]
                if fr.kind == "ptr":
                    terms.append(f"rl_{label}")
                elif fr.kind == "struct":
                    terms += [
                        f"(slt_{label} {j})" for j in range(1, bound + 1)
                    ]
            for t1 in terms:
                for t2 in terms:
                    if t1 != t2:
                        qs.append(
                            (
                                ("outlives", f.name, t1, t2),
                                "Bool",
                                f"(lt {t1} (- 0 (+ {t2} 1)))",
                            )
                        )
        return qs

    # ------------------------------------------------------------- script

    def script(
        self,
        mode: str = "lex",
        fixed: list[int] | None = None,
        objective_index: int | None = None,
    ) -> str:
        """mode 'lex': all objectives at once under lexicographic priority.
        mode 'single': minimize objectives[objective_index] with earlier
        objective sums pinned to the values in `fixed`."""
        lines = ["(set-option :produce-models true)"]
        if mode == "lex":
            lines.append("(set-option :opt.priority lex)")
        lines.append(self.datatype())
        lines += self.declarations()
        lines += self.asserts()
        lines += [f"(assert {a})" for a in self.extra_asserts]
        exprs = [self.objective_expr(o) for o in self.system.objectives]
        if mode == "lex":
            for e in exprs:
                lines.append(f"(minimize {e})")
        else:
            assert objective_index is not None
            for k, v in enumerate(fixed or []):
                lines.append(f"(assert (= {exprs[k]} {v}))")
            lines.append(f"(minimize {exprs[objective_index]})")
        self.queries = self.build_queries()
        for i, (_, sort, term) in enumerate(self.queries):
            lines.append(f"(define-fun q{i} () {sort} {term})")
        lines.append("(check-sat)")
        lines.append("(get-objectives)")
        names = " ".join(f"q{i}" for i in range(len(self.queries)))
        lines.append(f"(get-value ({names}))")
        return "\n".join(lines) + "\n"


# ----------------------------------------------------------- output parsing


def _tokenize(text: str) -> list[str]:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def _parse_sexprs(tokens: list[str], i: int = 0):
    out = []
    while i < len(tokens):
        t = tokens[i]
        if t == "(":
            inner, i = _parse_sexprs(tokens, i + 1)
            out.append(inner)
        elif t == ")":
            return out, i + 1
        else:
            out.append(t)
            i += 1
    return out, i


def _as_int(node) -> int:
    if isinstance(node, list):  # (- N)
        if len(node) == 2 and node[0] == "-":
            return -_as_int(node[1])
        raise ValueError(f"not an integer: {node}")
    return int(node)


def parse_output(text: str, queries: list[Query]) -> tuple[str, list[int], dict]:
    """(status, objective values, query key -> value)."""
    lines = text.splitlines()
    status = "error"
    for ln in lines:
        if ln.strip() in ("sat", "unsat", "unknown"):
            status = ln.strip()
            break
    if status != "sat":
        return status, [], {}
    sexprs, _ = _parse_sexprs(_tokenize(text))
    objectives: list[int] = []
    values: dict = {}
    for node in sexprs:
        if not isinstance(node, list) or not node:
            continue
        if node[0] == "objectives":
            # each entry is `(expression value)`; a bare value also appears
            # when the objective expression is a constant
            objectives = [
                _as_int(x[-1]) if isinstance(x, list) else _as_int(x)
                for x in node[1:]
            ]
        elif all(
            isinstance(p, list) and len(p) == 2 and isinstance(p[0], str)
            for p in node
        ) and all(str(p[0]).startswith("q") for p in node):
            for name, val in node:
                idx = int(name[1:])
                key, sort, _ = queries[idx]
                if sort == "Bool":
                    values[key] = val == "true"
                elif sort == "Int":
                    values[key] = _as_int(val)
                else:
                    values[key] = _base_value(str(val))
    return status, objectives, values


def model_from_values(prog: Program, values: dict) -> Model:
    m = Model()
    for key, val in values.items():
        if key[0] == "base":
            m.base[key[1]] = val
        elif key[0] == "array":
            if val:
                m.array.add(key[1])
        elif key[0] == "cell":
            if val:
                m.cell.add(key[1])
        elif key[0] == "rl":
            m.rl[key[1]] = val
        elif key[0] == "slt":
            m.slt[(key[1], key[2])] = val
        elif key[0] == "gen":
            m.gen[key[1]] = val
        elif key[0] == "rank":
            m.rank[key[1]] = val
    return m


# ------------------------------------------------------------------ driver


def solver_command(solver_path: str | None = None) -> list[str]:
    path = solver_path or os.environ.get("OXIFACE_SOLVER")
    if path:
        return shlex.split(path)
    node = shutil.which("node")
    if node is None:
        raise FileNotFoundError("node not found; install it or pass --solver-path")
    return [node, str(DEFAULT_WRAPPER)]


def run_solver(
    smt2: str, solver_path: str | None = None, timeout: float = 300.0, workdir: str | None = None
) -> tuple[str, str]:
    """(status-or-'ok', raw output). Writes the script to a temp file."""
    import tempfile

    cmd = solver_command(solver_path)
    with tempfile.NamedTemporaryFile(
        "w", suffix=".smt2", dir=workdir, delete=False
    ) as fh:
        fh.write(smt2)
        path = fh.name
    try:
        proc = subprocess.run(
            cmd + [path],
            capture_output=True,
            text=True,
            timeout=timeout,
        )
    except subprocess.TimeoutExpired:
        return "timeout", ""
    finally:
        try:
            os.unlink(path)
        except OSError:
            pass
    if proc.returncode != 0:
        return "error", proc.stdout + proc.stderr
    return "ok", proc.stdout


def _finish(
    prog: Program, low: Lowering, status: str, objectives: list[int], values: dict
) -> SolveResult:
    if status == "unsat":
        return SolveResult("unsat")
    if status != "sat":
        return SolveResult("error", detail=f"solver said {status!r}")
    model = model_from_values(prog, values)
    outlives = {
        key[1:]: val for key, val in values.items() if key[0] == "outlives"
    }
    return SolveResult("sat", model, objectives, outlives, values)


def solve(
    prog: Program,
    system: ConstraintSystem,
    gen: Generator,
    solver_path: str | None = None,
    timeout: float = 300.0,
    extra_asserts: tuple[str, ...] = (),
    extra_queries: tuple[Query, ...] = (),
) -> SolveResult:
    low = Lowering(prog, system, gen, extra_asserts, extra_queries)
    smt2 = low.script(mode="lex")
    status, out = run_solver(smt2, solver_path, timeout)
    if status != "ok":
        return SolveResult(status, detail=out)
    parsed_status, objectives, values = parse_output(out, low.queries)
    return _finish(prog, low, parsed_status, objectives, values)


def solve_sequential(
    prog: Program,
    system: ConstraintSystem,
    gen: Generator,
    solver_path: str | None = None,
    timeout: float = 300.0,
) -> SolveResult:
    """Fix-and-resolve: minimize each objective alone, pinning the optima of
    the preceding ones. Must agree with the lexicographic mode."""
    low = Lowering(prog, system, gen)
    fixed: list[int] = []
    result = SolveResult("error", detail="no objectives")
    for k in range(len(system.objectives)):
        smt2 = low.script(mode="single", fixed=fixed, objective_index=k)
        status, out = run_solver(smt2, solver_path, timeout)
        if status != "ok":
            return SolveResult(status, detail=out)
        parsed_status, objectives, values = parse_output(out, low.queries)
        if parsed_status != "sat":
            return _finish(prog, low, parsed_status, objectives, values)
        fixed.append(objectives[0])
        result = _finish(prog, low, parsed_status, fixed.copy(), values)
    return result


def solve_program(
    prog: Program,
    cfg: Config | None = None,
    filename: str = "<input>",
    solver_path: str | None = None,
    timeout: float = 300.0,
    sequential: bool = False,
) -> tuple[SolveResult, Generator, ConstraintSystem]:
    gen = Generator(prog, cfg, filename)
    system = gen.generate()
    fn = solve_sequential if sequential else solve
    res = fn(prog, system, gen, solver_path=solver_path, timeout=timeout)
    return res, gen, system
