"""Control flow graphs, postdominator trees, and liveness.

Instructions form the fine-grained graph used by liveness and the loan
dataflow; basic blocks and the block-level postdominator tree drive drop
placement. The synthetic exit node is named EXIT.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .ir import (
    CondBr,
    Deref,
    EltAddr,
    FieldAddr,
    FuncDef,
    Goto,
    Instr,
    ReturnInstr,
    StoreInstr,
    Var,
    decl_of,
)
from .parser import rvals_of

EXIT = "__exit__"


def var_uses(ins: Instr) -> set[str]:
    """Variables read by an instruction. Drop operands are not uses."""
    out: set[str] = set()
    for rv in rvals_of(ins):
        e = rv.expr
        if isinstance(e, Var):
            out.add(e.name)
        elif isinstance(e, (Deref, FieldAddr, EltAddr)):
            out.add(e.var)
            if isinstance(e, EltAddr) and isinstance(e.index, Var):
                out.add(e.index.name)
    if isinstance(ins, StoreInstr):
        out.add(ins.var)
    return out


def var_def(ins: Instr) -> str | None:
    decl = decl_of(ins)
    return decl[0] if decl else None


@dataclass
class Cfg:
    func: FuncDef
    instrs: list[Instr] = field(default_factory=list)
    succ: dict[int, list[int]] = field(default_factory=dict)  # iid -> iids
    pred: dict[int, list[int]] = field(default_factory=dict)
    exit_preds: list[int] = field(default_factory=list)
    blocks: dict[str, list[int]] = field(default_factory=dict)  # name -> iids
    block_of: dict[int, str] = field(default_factory=dict)
    block_succ: dict[str, list[str]] = field(default_factory=dict)
    entry_block: str = ""
    block_order: list[str] = field(default_factory=list)


def build_cfg(func: FuncDef) -> Cfg:
    cfg = Cfg(func, list(func.body or []))
    instrs = cfg.instrs
    by_label = {}
    leaders = set()
    if instrs:
        leaders.add(0)
    for i, ins in enumerate(instrs):
        if ins.block is not None:
            by_label[ins.block] = i
            leaders.add(i)
        if isinstance(ins, (Goto, CondBr, ReturnInstr)) and i + 1 < len(instrs):
            leaders.add(i + 1)

    # Block partition in textual order.
    names = []
    cur = None
    for i, ins in enumerate(instrs):
        if i in leaders:
            cur = ins.block if ins.block is not None else f"__b{i}"
            cfg.blocks[cur] = []
            names.append(cur)
        cfg.blocks[cur].append(ins.iid)
        cfg.block_of[ins.iid] = cur
    cfg.block_order = names
    cfg.entry_block = names[0] if names else EXIT

    def target_iid(label: str) -> int:
        if label not in by_label:
            raise ValueError(f"{func.name}: goto target {label!r} not found")
        return instrs[by_label[label]].iid

    index_of = {ins.iid: i for i, ins in enumerate(instrs)}
    for i, ins in enumerate(instrs):
        succs: list[int] = []
        if isinstance(ins, Goto):
            succs = [target_iid(ins.target)]
        elif isinstance(ins, CondBr):
            succs = [target_iid(ins.then_target), target_iid(ins.else_target)]
        elif isinstance(ins, ReturnInstr):
            cfg.exit_preds.append(ins.iid)
        elif i + 1 < len(instrs):
            succs = [instrs[i + 1].iid]
        else:
            cfg.exit_preds.append(ins.iid)
        cfg.succ[ins.iid] = succs
    for ins in instrs:
        cfg.pred.setdefault(ins.iid, [])
    for iid, succs in cfg.succ.items():
        for s in succs:
            cfg.pred[s].append(iid)

    # Block-level edges, derived from the last instruction of each block.
    for name in names:
        last = cfg.blocks[name][-1]
        bsucc = sorted({cfg.block_of[s] for s in cfg.succ[last]})
        if not cfg.succ[last]:
            bsucc = [EXIT]
        cfg.block_succ[name] = bsucc
    return cfg


def postdominators(cfg: Cfg) -> dict[str, str | None]:
    """Immediate postdominator of each block; EXIT is the tree root."""
    nodes = list(cfg.block_order) + [EXIT]
    succ = dict(cfg.block_succ)
    succ[EXIT] = []
    pdom: dict[str, set[str]] = {n: set(nodes) for n in nodes}
    pdom[EXIT] = {EXIT}
    changed = True
    while changed:
        changed = False
        for n in reversed(nodes):
            if n == EXIT:
                continue
            outs = [pdom[s] for s in succ[n]]
            new = set.intersection(*outs) | {n} if outs else {n}
            if new != pdom[n]:
                pdom[n] = new
                changed = True
    ipdom: dict[str, str | None] = {EXIT: None}
    for n in cfg.block_order:
        strict = pdom[n] - {n}
        # The immediate postdominator is the strict postdominator that is
        # postdominated by every other strict postdominator.
        best = None
        for c in strict:
            if all(d in pdom[c] or d == c for d in strict):
                best = c
                break
        ipdom[n] = best
    return ipdom


def postdom_depth(ipdom: dict[str, str | None]) -> dict[str, int]:
    depth: dict[str, int] = {}

    def rec(n: str) -> int:
        if n in depth:
            return depth[n]
        p = ipdom.get(n)
        depth[n] = 0 if p is None else rec(p) + 1
        return depth[n]

    for n in ipdom:
        rec(n)
    return depth


def postdom_nca(ipdom: dict[str, str | None], nodes: list[str]) -> str:
    depth = postdom_depth(ipdom)
    cur = nodes[0]
    for other in nodes[1:]:
        a, b = cur, other
        while a != b:
            if depth[a] < depth[b]:
                b = ipdom[b]  # type: ignore[assignment]
            else:
                a = ipdom[a]  # type: ignore[assignment]
        cur = a
    return cur


@dataclass
class Liveness:
    live_in: dict[int, set[str]]
    live_out: dict[int, set[str]]

    def live_at(self, iid: int, point: str) -> set[str]:
        return self.live_in[iid] if point == "in" else self.live_out[iid]


def liveness(cfg: Cfg) -> Liveness:
    """Standard backward may-liveness over instructions."""
    live_in = {ins.iid: set() for ins in cfg.instrs}
    live_out = {ins.iid: set() for ins in cfg.instrs}
    changed = True
    while changed:
        changed = False
        for ins in reversed(cfg.instrs):
            out = set()
            for s in cfg.succ[ins.iid]:
                out |= live_in[s]
            new_in = var_uses(ins) | (out - {var_def(ins)})
            if out != live_out[ins.iid] or new_in != live_in[ins.iid]:
                live_out[ins.iid] = out
                live_in[ins.iid] = new_in
                changed = True
    return Liveness(live_in, live_out)


def live_blocks(cfg: Cfg, lv: Liveness, name: str) -> list[str]:
    """Blocks containing any point where the variable is live."""
    out = []
    for bname in cfg.block_order:
        for iid in cfg.blocks[bname]:
            if name in lv.live_in[iid] or name in lv.live_out[iid]:
                out.append(bname)
                break
    return out
