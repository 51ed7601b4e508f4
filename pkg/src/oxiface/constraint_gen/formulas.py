"""Formula terms for the constraint system.

Every term and formula can render itself as SMT-LIB text and evaluate itself
directly against a candidate assignment, so solver results can be checked
without trusting the solver encoding.

Vocabulary per type label ℓ:
  base(ℓ)   enumerated base type (scalars, struct(s), pointer disciplines)
  array(ℓ)  Bool: slice qualifier
  cell(ℓ)   Bool: interior mutability qualifier
  rl(ℓ)     Int: lifetime variable of a reference fragment
  slt_ℓ(i)  Int: i-th lifetime argument of a struct fragment
Per struct s: gen(s) (number of lifetime generics), rank(s).
Global relations: lt(ρ, p) — point p is in the lifetime of ρ; lo(ℓ, p) —
the loan created by rvalue ℓ is in scope at p. Membership of ρ' in the
set of lifetime parameters that ρ outlives is encoded as lt(ρ, end(ρ'))
with end(ρ') = -(ρ' + 1), a token that can never be a real program point.
"""
from __future__ import annotations

from dataclasses import dataclass, field


class Model:
    """A candidate assignment for direct evaluation."""

    def __init__(self) -> None:
        self.base: dict[int, str] = {}  # label -> base name ("struct:Node" form)
        self.array: set[int] = set()
        self.cell: set[int] = set()
        self.rl: dict[int, int] = {}
        self.slt: dict[tuple[int, int], int] = {}
        self.gen: dict[str, int] = {}
        self.rank: dict[str, int] = {}
        self.lt: set[tuple[int, int]] = set()
        self.lo: set[tuple[int, int]] = set()

    def slt_at(self, label: int, idx: int) -> int:
        return self.slt.get((label, idx), 0)


def struct_base(name: str) -> str:
    return f"struct:{name}"


def smt_base(name: str) -> str:
    """SMT constructor name for a base."""
    return "BT_" + name.replace(":", "_")


# ---------------------------------------------------------------- int terms


@dataclass(frozen=True)
class IntTerm:
    def smt(self) -> str:
        raise NotImplementedError

    def eval(self, m: Model) -> int:
        raise NotImplementedError


@dataclass(frozen=True)
class IntConst(IntTerm):
    value: int

    def smt(self) -> str:
        return str(self.value) if self.value >= 0 else f"(- {-self.value})"

    def eval(self, m: Model) -> int:
        return self.value


@dataclass(frozen=True)
class RL(IntTerm):
    label: int

    def smt(self) -> str:
        return f"rl_{self.label}"

    def eval(self, m: Model) -> int:
        return m.rl.get(self.label, 0)


@dataclass(frozen=True)
class SLT(IntTerm):
    label: int
    index: IntTerm

    def smt(self) -> str:
        return f"(slt_{self.label} {self.index.smt()})"

    def eval(self, m: Model) -> int:
        return m.slt_at(self.label, self.index.eval(m))


@dataclass(frozen=True)
class Gen(IntTerm):
    struct: str

    def smt(self) -> str:
        return f"gen_{self.struct}"

    def eval(self, m: Model) -> int:
        return m.gen.get(self.struct, 0)


@dataclass(frozen=True)
class Rank(IntTerm):
    struct: str

    def smt(self) -> str:
        return f"rank_{self.struct}"

    def eval(self, m: Model) -> int:
        return m.rank.get(self.struct, 0)


@dataclass(frozen=True)
class End(IntTerm):
    """Token standing for 'the end region of lifetime rho'."""

    rho: IntTerm

    def smt(self) -> str:
        return f"(- 0 (+ {self.rho.smt()} 1))"

    def eval(self, m: Model) -> int:
        return -(self.rho.eval(m) + 1)


# ------------------------------------------------------------------ formulas


@dataclass(frozen=True)
class Formula:
    def smt(self) -> str:
        raise NotImplementedError

    def eval(self, m: Model) -> bool:
        raise NotImplementedError


@dataclass(frozen=True)
class Lit(Formula):
    value: bool

    def smt(self) -> str:
        return "true" if self.value else "false"

    def eval(self, m: Model) -> bool:
        return self.value


TRUE = Lit(True)
FALSE = Lit(False)


@dataclass(frozen=True)
class BaseIs(Formula):
    label: int
    name: str  # base name, struct bases as "struct:Name"

    def smt(self) -> str:
        return f"(= b_{self.label} {smt_base(self.name)})"

    def eval(self, m: Model) -> bool:
        return m.base.get(self.label) == self.name


@dataclass(frozen=True)
class BaseEq(Formula):
    label1: int
    label2: int

    def smt(self) -> str:
        return f"(= b_{self.label1} b_{self.label2})"

    def eval(self, m: Model) -> bool:
        return m.base.get(self.label1) == m.base.get(self.label2)


@dataclass(frozen=True)
class ArrayAt(Formula):
    label: int

    def smt(self) -> str:
        return f"a_{self.label}"

    def eval(self, m: Model) -> bool:
        return self.label in m.array


@dataclass(frozen=True)
class CellAt(Formula):
    label: int

    def smt(self) -> str:
        return f"c_{self.label}"

    def eval(self, m: Model) -> bool:
        return self.label in m.cell


@dataclass(frozen=True)
class IntLe(Formula):
    lhs: IntTerm
    rhs: IntTerm

    def smt(self) -> str:
        return f"(<= {self.lhs.smt()} {self.rhs.smt()})"

    def eval(self, m: Model) -> bool:
        return self.lhs.eval(m) <= self.rhs.eval(m)


@dataclass(frozen=True)
class IntLt(Formula):
    lhs: IntTerm
    rhs: IntTerm

    def smt(self) -> str:
        return f"(< {self.lhs.smt()} {self.rhs.smt()})"

    def eval(self, m: Model) -> bool:
        return self.lhs.eval(m) < self.rhs.eval(m)


@dataclass(frozen=True)
class IntEq(Formula):
    lhs: IntTerm
    rhs: IntTerm

    def smt(self) -> str:
        return f"(= {self.lhs.smt()} {self.rhs.smt()})"

    def eval(self, m: Model) -> bool:
        return self.lhs.eval(m) == self.rhs.eval(m)


@dataclass(frozen=True)
class Lt(Formula):
    """Point (or end token) `point` is in the lifetime of `rho`."""

    rho: IntTerm
    point: IntTerm

    def smt(self) -> str:
        return f"(lt {self.rho.smt()} {self.point.smt()})"

    def eval(self, m: Model) -> bool:
        return (self.rho.eval(m), self.point.eval(m)) in m.lt


@dataclass(frozen=True)
class Lo(Formula):
    """The loan created by rvalue label `label` is in scope at `point`."""

    label: int
    point: int

    def smt(self) -> str:
        return f"(lo {self.label} {IntConst(self.point).smt()})"

    def eval(self, m: Model) -> bool:
        return (self.label, self.point) in m.lo


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def smt(self) -> str:
        return f"(not {self.arg.smt()})"

    def eval(self, m: Model) -> bool:
        return not self.arg.eval(m)


@dataclass(frozen=True)
class And(Formula):
    args: tuple[Formula, ...]

    def smt(self) -> str:
        if not self.args:
            return "true"
        if len(self.args) == 1:
            return self.args[0].smt()
        return "(and " + " ".join(a.smt() for a in self.args) + ")"

    def eval(self, m: Model) -> bool:
        return all(a.eval(m) for a in self.args)


@dataclass(frozen=True)
class Or(Formula):
    args: tuple[Formula, ...]

    def smt(self) -> str:
        if not self.args:
            return "false"
        if len(self.args) == 1:
            return self.args[0].smt()
        return "(or " + " ".join(a.smt() for a in self.args) + ")"

    def eval(self, m: Model) -> bool:
        return any(a.eval(m) for a in self.args)


@dataclass(frozen=True)
class Implies(Formula):
    lhs: Formula
    rhs: Formula

    def smt(self) -> str:
        return f"(=> {self.lhs.smt()} {self.rhs.smt()})"

    def eval(self, m: Model) -> bool:
        return (not self.lhs.eval(m)) or self.rhs.eval(m)


@dataclass(frozen=True)
class Iff(Formula):
    lhs: Formula
    rhs: Formula

    def smt(self) -> str:
        return f"(= {self.lhs.smt()} {self.rhs.smt()})"

    def eval(self, m: Model) -> bool:
        return self.lhs.eval(m) == self.rhs.eval(m)


def conj(*args: Formula) -> Formula:
    flat = [a for a in args if a is not TRUE]
    if any(a is FALSE for a in flat):
        return FALSE
    if not flat:
        return TRUE
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def disj(*args: Formula) -> Formula:
    flat = [a for a in args if a is not FALSE]
    if any(a is TRUE for a in flat):
        return TRUE
    if not flat:
        return FALSE
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def base_in(label: int, names: tuple[str, ...]) -> Formula:
    return disj(*(BaseIs(label, n) for n in names))


@dataclass(frozen=True)
class Constraint:
    """A tagged constraint with its source location."""

    tag: str  # rule name, e.g. "C-Parity-Ptr"
    origin: str  # "file:line" of the instruction or declaration
    formula: Formula

    def dump(self) -> str:
        return f"{self.tag} @ {self.origin} :: {self.formula.smt()}"


@dataclass
class ConstraintSystem:
    constraints: list[Constraint] = field(default_factory=list)
    # Objective sums, in lexicographic order (first is most significant).
    # Each objective is a list of (weight, Formula) pairs to sum when true.
    objectives: list[list[tuple[int, Formula]]] = field(default_factory=list)
    objective_names: list[str] = field(default_factory=list)

    def add(self, tag: str, origin: str, formula: Formula) -> None:
        if formula is not TRUE:
            self.constraints.append(Constraint(tag, origin, formula))

    def failures(self, m: Model) -> list[Constraint]:
        return [c for c in self.constraints if not c.formula.eval(m)]

    def objective_values(self, m: Model) -> list[int]:
        return [
            sum(w for w, f in obj if f.eval(m)) for obj in self.objectives
        ]
