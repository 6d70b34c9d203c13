"""The WMM machine: per-processor store buffer plus invalidation buffer.

An invalidation buffer is a tuple of ``(address, stale_values)`` sorted by
address, where ``stale_values`` is ordered oldest first.  A dequeued
store appends the overwritten memory value as the newest stale entry.
"""

from __future__ import annotations

from collections import Counter

from ..litmus import Outcome
from .base import (
    ASSIGN,
    COMMIT,
    EXIT,
    LD,
    REC,
    ST,
    InvariantViolation,
    Machine,
    Transition,
    mem_get,
    mem_set,
    replace,
    set_reg,
)


def ib_get(ib: tuple, addr: int) -> tuple:
    for a, vals in ib:
        if a == addr:
            return vals
    return ()


def ib_set(ib: tuple, addr: int, vals: tuple) -> tuple:
    out = [(a, v) for a, v in ib if a != addr]
    if vals:
        out.append((addr, vals))
        out.sort()
    return tuple(out)


def ib_append(ib: tuple, addr: int, value: int) -> tuple:
    return ib_set(ib, addr, ib_get(ib, addr) + (value,))


def sb_has(sb: tuple, addr: int) -> bool:
    return any(e[0] == addr for e in sb)


class WMMMachine(Machine):
    """State: ``(threads, memory, store_buffers, invalidation_buffers)``.

    Store-buffer entries are ``(address, value, tag)``; WMM leaves the tag
    as ``None``.
    """

    model_id = "WMM"
    prefix = "WMM"

    def initial_state(self):
        n = len(self.threads)
        return (self.initial_threads(), self.initial_memory(), ((),) * n, ((),) * n)

    def is_final(self, state) -> bool:
        return self.threads_done(state[0]) and not any(state[2])

    def final_parts(self, state):
        return state[0], state[1]

    def check_invariants(self, state) -> None:
        _, _, sbs, ibs = state
        for tid, (sb, ib) in enumerate(zip(sbs, ibs)):
            clash = {e[0] for e in sb} & {a for a, _ in ib}
            if clash:
                labels = ", ".join(self.addr_label(a) for a in sorted(clash))
                raise InvariantViolation(f"{self.names[tid]}: address {labels} in both sb and ib")

    # -- instruction rules ---------------------------------------------------

    def store_entry(self, tid: int, pc: int, addr: int, value: int) -> tuple:
        return (addr, value, None)

    def load_successors(self, state, tid: int, reg: int, a: int):
        threads, mem, sbs, ibs = state
        pc, regs = threads[tid]
        name = self.names[tid]
        label = self.addr_label(a)
        sb, ib = sbs[tid], ibs[tid]

        def finish(v, new_ib, new_sbs=sbs):
            th = (pc + 1, set_reg(regs, reg, v))
            return (replace(threads, tid, th), mem, new_sbs, replace(ibs, tid, new_ib))

        hits = [e[1] for e in sb if e[0] == a]
        if hits:
            return [(Transition(name, f"{self.prefix}-Ld", f"sb {label}={hits[-1]}"), finish(hits[-1], ib))]
        v = mem_get(mem, a)
        out = [(Transition(name, f"{self.prefix}-Ld", f"mem {label}={v}"), finish(v, ib_set(ib, a, ())))]
        stale = ib_get(ib, a)
        dup = Counter(stale)
        for k, sv in enumerate(stale):
            tag = f" #{k}" if dup[sv] > 1 else ""
            out.append((Transition(name, f"{self.prefix}-Ld", f"ib {label}={sv}{tag}"),
                        finish(sv, ib_set(ib, a, stale[k:]))))
        return out

    def successors(self, state):
        threads, mem, sbs, ibs = state
        out = []
        p = self.prefix
        for tid, (pc, regs) in enumerate(threads):
            code = self.threads[tid].code
            if pc >= len(code):
                continue
            name = self.names[tid]
            ins = code[pc]
            kind = ins[0]
            if kind == LD:
                out.extend(self.load_successors(state, tid, ins[1], ins[2](regs)))
            elif kind == ST:
                a, v = ins[1](regs), ins[2](regs)
                entry = self.store_entry(tid, pc, a, v)
                out.append((Transition(name, f"{p}-St", f"{self.addr_label(a)}={v}"),
                            (replace(threads, tid, (pc + 1, regs)), mem,
                             replace(sbs, tid, sbs[tid] + (entry,)),
                             replace(ibs, tid, ib_set(ibs[tid], a, ())))))
            elif kind == COMMIT:
                if not sbs[tid]:
                    out.append((Transition(name, f"{p}-Com"),
                                (replace(threads, tid, (pc + 1, regs)), mem, sbs, ibs)))
            elif kind == REC:
                out.append((Transition(name, f"{p}-Rec"),
                            (replace(threads, tid, (pc + 1, regs)), mem, sbs, replace(ibs, tid, ()))))
            else:
                assert kind in (ASSIGN, EXIT)
                out.append((Transition(name, f"{p}-Nm", f"pc={pc}"),
                            (replace(threads, tid, self.local_step(tid, (pc, regs), ins)), mem, sbs, ibs)))
        out.extend(self.dequeues(state))
        return out

    # -- background ------------------------------------------------------------

    def dequeues(self, state):
        threads, mem, sbs, ibs = state
        out = []
        for tid, sb in enumerate(sbs):
            for a in dict.fromkeys(e[0] for e in sb):
                j = next(i for i, e in enumerate(sb) if e[0] == a)
                v = sb[j][1]
                old = mem_get(mem, a)
                new_ibs = tuple(
                    ib if k == tid or sb_has(sbs[k], a) else ib_append(ib, a, old)
                    for k, ib in enumerate(ibs)
                )
                out.append((Transition(self.names[tid], "WMM-DeqSb", f"{self.addr_label(a)}={v}"),
                            (threads, mem_set(mem, a, v), replace(sbs, tid, sb[:j] + sb[j + 1:]), new_ibs)))
        return out


def wmm_transitions(machine: WMMMachine, state):
    return machine.successors(state)


def wmm_observe(machine: WMMMachine, state) -> Outcome:
    return machine.observe(state)
