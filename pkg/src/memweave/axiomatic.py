"""Axiomatic WMM: enumerate memory orders and keep the consistent ones.

A candidate execution is a total order ``mo`` over every load, store and
fence.  Values are recovered by a fixpoint: a load is resolved once every
store that precedes it in ``mo`` or in program order has a known address,
and then reads the ``mo``-latest same-address store among those (the
implicit initial store if there is none).  The execution is kept when
every program-ordered pair the order table marks as preserved is also
ordered that way in ``mo``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .explore import OutcomeSet
from .litmus import (
    Assign,
    Commit,
    ExitIf,
    Load,
    Outcome,
    Program,
    Reconcile,
    Store,
    eval_expr,
    expr_registers,
    observed_registers,
)

LD, ST, REC, COM = "Ld", "St", "Reconcile", "Commit"

DEFAULT_BOUND = 10


class TooLarge(ValueError):
    pass


class NotBranchFree(ValueError):
    pass


class UnresolvedAddress(ValueError):
    pass


# (X kind, Y kind) -> True / False / "same-address"
ORDER_TABLE = {
    (LD, LD): "a=b", (LD, ST): True, (LD, REC): True, (LD, COM): True,
    (ST, LD): False, (ST, ST): "a=b", (ST, REC): False, (ST, COM): True,
    (REC, LD): True, (REC, ST): True, (REC, REC): True, (REC, COM): True,
    (COM, LD): False, (COM, ST): True, (COM, REC): True, (COM, COM): True,
}


@dataclass(frozen=True)
class Event:
    id: tuple[int, int]  # (thread index, instruction index)
    kind: str
    ins: object
    addr: Optional[int] = None


def order(x, y) -> bool:
    """Whether program order ``x`` before ``y`` must be kept in memory order."""
    cell = ORDER_TABLE[(x.kind, y.kind)]
    if cell != "a=b":
        return cell
    if x.addr is None or y.addr is None:
        raise UnresolvedAddress(f"order({x.kind}, {y.kind}) needs both addresses")
    return x.addr == y.addr


@dataclass
class AxExecution:
    po: tuple[tuple[tuple[int, int], ...], ...]
    mo: tuple[tuple[int, int], ...]
    rf: dict  # load id -> store id, or None for the initial store
    resolved: dict  # event id -> (address, value); (None, None) for fences
    stores: frozenset = frozenset()
    registers: list = field(default_factory=list)

    def final_memory(self, init: dict[int, int]) -> dict[int, int]:
        """Value of the ``mo``-latest store per address."""
        mem = dict(init)
        for e in self.mo:
            if e in self.stores:
                addr, value = self.resolved[e]
                mem[addr] = value
        return mem


_KIND = {Load: LD, Store: ST, Reconcile: REC, Commit: COM}


def events(program: Program) -> list[list[Event]]:
    if not program.is_branch_free:
        raise NotBranchFree("axiomatic WMM handles branch-free programs only")
    out = []
    for tid, t in enumerate(program.threads):
        evs = []
        for k, ins in enumerate(t.code):
            if isinstance(ins, Assign):
                continue
            addr = None
            if isinstance(ins, (Load, Store)) and not expr_registers(ins.addr):
                addr = eval_expr(ins.addr, {}, program.encoding)
            evs.append(Event((tid, k), _KIND[type(ins)], ins, addr))
        out.append(evs)
    return out


class _Diagnostics:
    stalls = 0


def resolve_execution(program: Program, mo, diagnostics: Optional[_Diagnostics] = None) -> Optional[AxExecution]:
    """Resolve values for memory order ``mo``; None if an axiom fails."""
    enc = program.encoding
    pos = {e: i for i, e in enumerate(mo)}
    nthreads = len(program.threads)
    regs = [dict() for _ in range(nthreads)]
    ip = [0] * nthreads
    resolved: dict = {}
    rf: dict = {}
    stores = {}  # id -> (addr, value) once resolved
    store_ids = [
        (tid, k)
        for tid, t in enumerate(program.threads)
        for k, ins in enumerate(t.code)
        if isinstance(ins, Store)
    ]
    init = program.initial_memory()

    progress = True
    while progress:
        progress = False
        for tid, t in enumerate(program.threads):
            code = t.code
            while ip[tid] < len(code):
                k = ip[tid]
                ins = code[k]
                r = regs[tid]
                if isinstance(ins, Assign):
                    r[ins.reg] = eval_expr(ins.expr, r, enc)
                elif isinstance(ins, Store):
                    av = (eval_expr(ins.addr, r, enc), eval_expr(ins.data, r, enc))
                    stores[(tid, k)] = av
                    resolved[(tid, k)] = av
                elif isinstance(ins, Load):
                    a = eval_expr(ins.addr, r, enc)
                    me = pos[(tid, k)]
                    cands = [s for s in store_ids if pos[s] < me or (s[0] == tid and s[1] < k)]
                    if any(s not in stores for s in cands):
                        break
                    same = [s for s in cands if stores[s][0] == a]
                    if same:
                        src = max(same, key=pos.__getitem__)
                        v = stores[src][1]
                    else:
                        src, v = None, init.get(a, 0)
                    rf[(tid, k)] = src
                    r[ins.reg] = v
                    resolved[(tid, k)] = (a, v)
                else:
                    resolved[(tid, k)] = (None, None)
                ip[tid] += 1
                progress = True
    if any(ip[tid] < len(t.code) for tid, t in enumerate(program.threads)):
        if diagnostics is not None:
            diagnostics.stalls += 1
        return None

    # Inst-Order over every program-ordered pair
    po = []
    for tid, t in enumerate(program.threads):
        evs = [
            Event((tid, k), _KIND[type(ins)], ins, resolved[(tid, k)][0])
            for k, ins in enumerate(t.code)
            if not isinstance(ins, Assign)
        ]
        for x, y in itertools.combinations(evs, 2):
            if order(x, y) and pos[x.id] > pos[y.id]:
                return None
        po.append(tuple(e.id for e in evs))
    return AxExecution(tuple(po), tuple(mo), rf, resolved, frozenset(stores), regs)


def _static_preds(evs: list[list[Event]]) -> dict:
    preds = {}
    for thread in evs:
        for j, y in enumerate(thread):
            ps = set()
            for x in thread[:j]:
                try:
                    if order(x, y):
                        ps.add(x.id)
                except UnresolvedAddress:
                    pass
            preds[y.id] = ps
    return preds


def linear_extensions(evs: list[list[Event]]):
    """Total orders of all events that respect statically-known order constraints."""
    preds = _static_preds(evs)
    ids = [e.id for thread in evs for e in thread]
    placed: list = []
    done: set = set()

    def rec():
        if len(placed) == len(ids):
            yield tuple(placed)
            return
        for e in ids:
            if e not in done and preds[e] <= done:
                placed.append(e)
                done.add(e)
                yield from rec()
                placed.pop()
                done.discard(e)

    yield from rec()


def axiomatic_outcomes(program: Program, observed=None, *, bound: int = DEFAULT_BOUND, prune: bool = True) -> OutcomeSet:
    evs = events(program)
    n = sum(len(t) for t in evs)
    if n > bound:
        raise TooLarge(f"{n} memory/fence instructions exceed the enumeration bound {bound}")
    observed = tuple(observed) if observed is not None else observed_registers(program)
    names = [t.name for t in program.threads]
    init = program.initial_memory()
    if prune:
        candidates = linear_extensions(evs)
    else:
        candidates = itertools.permutations([e.id for t in evs for e in t])
    diag = _Diagnostics()
    outcomes = set()
    examined = consistent = 0
    for mo in candidates:
        examined += 1
        ex = resolve_execution(program, mo, diag)
        if ex is None:
            continue
        consistent += 1
        mem = ex.final_memory(init)
        outcomes.add(Outcome.build(
            {(t, r): ex.registers[names.index(t)].get(r, 0) for t, r in observed},
            {program.address_name(a): v for a, v in mem.items()},
        ))
    return OutcomeSet(frozenset(outcomes), examined, consistent, 0, diag.stalls)


def is_axiomatic_candidate(program: Program, bound: int = DEFAULT_BOUND) -> bool:
    if not program.is_branch_free:
        return False
    return sum(1 for t in program.threads for i in t.code if not isinstance(i, (Assign, ExitIf))) <= bound
