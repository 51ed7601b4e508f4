"""Drop insertion.

Each local and parameter is dropped once, at the earliest block that
postdominates its whole live region: let A be the nearest common ancestor in
the postdominator tree of all blocks where the variable is live (the entry
block if it is never live). If the live region reaches A itself the drop
moves to A's immediate postdominator; otherwise it goes at the start of A.
A drop at the synthetic exit node becomes a trailing drop instruction when
the body falls through to exit, and is recorded on the function otherwise
(there is no textual position after a return). Drops merged at one point
list their operands in reverse declaration order.
"""
from __future__ import annotations

from .cfg import EXIT, build_cfg, live_blocks, liveness, postdom_nca, postdominators
from .ir import CondBr, DropInstr, FuncDef, Goto, Instr, Program, ReturnInstr


def drop_points(func: FuncDef) -> dict[str, str]:
    """Map each local/param to the block where it is dropped (or EXIT)."""
    cfg = build_cfg(func)
    if not cfg.instrs:
        return {name: EXIT for name in func.decl_order()}
    lv = liveness(cfg)
    ipdom = postdominators(cfg)
    out: dict[str, str] = {}
    for name in func.decl_order():
        blocks = live_blocks(cfg, lv, name)
        if not blocks:
            blocks = [cfg.entry_block]
        nca = postdom_nca(ipdom, blocks)
        if nca in blocks:
            dest = ipdom[nca]
            assert dest is not None
        else:
            dest = nca
        out[name] = dest
    return out


def insert_drops(func: FuncDef) -> FuncDef:
    """Return a copy of the function with drops materialized.

    The input must not already contain drop instructions.
    """
    if any(isinstance(ins, DropInstr) for ins in func.body or []):
        raise ValueError(f"{func.name} already contains drop instructions")
    points = drop_points(func)
    order = func.decl_order()

    def ordered(names: list[str]) -> list[str]:
        return sorted(names, key=lambda n: -order.index(n))

    by_block: dict[str, list[str]] = {}
    for name, blk in points.items():
        by_block.setdefault(blk, []).append(name)

    body: list[Instr] = []
    cfg = build_cfg(func)
    block_heads = {iids[0]: bname for bname, iids in cfg.blocks.items()}
    for ins in func.body or []:
        if ins.iid in block_heads:
            bname = block_heads[ins.iid]
            if bname in by_block:
                d = DropInstr(ordered(by_block[bname]))
                # The drop takes over the block label position.
                d.block = ins.block
                d.line = ins.line
                ins.block = None
                body.append(d)
        body.append(ins)

    exit_names = ordered(by_block.get(EXIT, []))
    exit_drops: list[str] = []
    if exit_names:
        falls_through = not body or not isinstance(body[-1], (ReturnInstr, Goto, CondBr))
        if falls_through:
            d = DropInstr(exit_names)
            d.line = body[-1].line if body else func.line
            body.append(d)
        else:
            exit_drops = exit_names

    out = FuncDef(func.name, func.ret_type, func.params, body, func.line)
    out.exit_drops = exit_drops
    return out


def insert_all_drops(prog: Program) -> Program:
    """Insert drops in every defined function and renumber instructions."""
    funcs = []
    for f in prog.functions:
        if f.is_external or any(isinstance(i, DropInstr) for i in f.body or []):
            funcs.append(f)
        else:
            funcs.append(insert_drops(f))
    out = Program(prog.structs, prog.globals, funcs, prog.frag_of, prog.site_of)
    renumber_instructions(out)
    return out


def renumber_instructions(prog: Program) -> None:
    iid = 0
    for f in prog.functions:
        for ins in f.body or []:
            ins.iid = iid
            iid += 1
    # Rvalue label sites reference instruction ids; refresh them.
    from .parser import index_labels, resolve_rval_kinds

    index_labels(prog)
    resolve_rval_kinds(prog)
