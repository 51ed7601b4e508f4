"""Random small control-flow graphs rendered as source programs.

Used by the dataflow and drop-placement tests: each generated function is a
handful of blocks connected by gotos and conditional branches, with scalar
work inside the blocks and (optionally) pointer borrows and stores that
create and kill loans.
"""
from __future__ import annotations

import random


def random_function(
    rng: random.Random,
    name: str,
    n_blocks: int,
    dag_only: bool,
    with_loans: bool,
) -> str:
    """One function over params p, r (pointers), c (bool), v (i32)."""
    lines = [f"<i32> {name}(<ptr, i32> p, <ptr, i32> r, <bool> c, <i32> v) {{"]
    fresh = 0
    for b in range(n_blocks):
        body: list[str] = []
        for _ in range(rng.randint(1, 3)):
            roll = rng.random()
            if with_loans and roll < 0.35:
                src = rng.choice(["p", "r"])
                body.append(f"<ptr, i32> q{fresh} = use({src});")
                fresh += 1
            elif with_loans and roll < 0.55:
                body.append(f"*{rng.choice(['p', 'r'])} = v;")
            else:
                body.append(f"<i32> x{fresh} = use(v);")
                fresh += 1
        if b == n_blocks - 1:
            body.append("return v;")
        else:
            # The first target always moves forward so the exit stays
            # reachable; the second may form a back edge unless dag_only.
            lo = b + 1 if dag_only else max(0, b - 1)
            t1 = rng.randint(b + 1, n_blocks - 1)
            if rng.random() < 0.5:
                body.append(f"goto b{t1};")
            else:
                t2 = rng.randint(lo, n_blocks - 1)
                body.append(f"if (c) goto b{t1}; else goto b{t2};")
        body[0] = f"b{b}: {body[0]}"
        lines += [f"  {ln}" for ln in body]
    lines.append("}")
    return "\n".join(lines)


def random_program(
    rng: random.Random,
    n_functions: int,
    n_blocks=(2, 5),
    dag_only: bool = False,
    with_loans: bool = False,
) -> str:
    parts = [
        random_function(
            rng, f"f{k}", rng.randint(*n_blocks), dag_only, with_loans
        )
        for k in range(n_functions)
    ]
    parts.append("<i32> main() {\n  return 0;\n}")
    return "\n\n".join(parts)
