"""SC, TSO and PSO machines.

TSO adds a FIFO store buffer per processor; PSO relaxes the dequeue to
the oldest store of *some* address.  ``Reconcile`` is a no-op on all three.
"""

from __future__ import annotations

from .base import (
    ASSIGN,
    COMMIT,
    EXIT,
    LD,
    REC,
    ST,
    Machine,
    Transition,
    mem_get,
    mem_set,
    replace,
    set_reg,
)


class SCMachine(Machine):
    """State: ``(threads, memory)``; each ``thread`` is ``(pc, regs)``."""

    model_id = "SC"

    def initial_state(self):
        return (self.initial_threads(), self.initial_memory())

    def is_final(self, state) -> bool:
        return self.threads_done(state[0])

    def final_parts(self, state):
        return state

    def successors(self, state):
        threads, mem = state
        out = []
        for tid, (pc, regs) in enumerate(threads):
            code = self.threads[tid].code
            if pc >= len(code):
                continue
            name = self.names[tid]
            ins = code[pc]
            kind = ins[0]
            if kind == LD:
                a = ins[2](regs)
                v = mem_get(mem, a)
                th = (pc + 1, set_reg(regs, ins[1], v))
                out.append((Transition(name, "SC-Ld", f"{self.addr_label(a)}={v}"), (replace(threads, tid, th), mem)))
            elif kind == ST:
                a, v = ins[1](regs), ins[2](regs)
                out.append((Transition(name, "SC-St", f"{self.addr_label(a)}={v}"),
                            (replace(threads, tid, (pc + 1, regs)), mem_set(mem, a, v))))
            else:
                rule = "SC-Nm" if kind in (ASSIGN, EXIT) else "SC-Fence"
                out.append((Transition(name, rule, f"pc={pc}"),
                            (replace(threads, tid, self.local_step(tid, (pc, regs), ins)), mem)))
        return out


def sc_transitions(machine: SCMachine, state):
    return machine.successors(state)


class TSOMachine(Machine):
    """State: ``(threads, memory, store_buffers)``.

    A store buffer is a tuple of ``(address, value)`` entries, oldest first.
    """

    model_id = "TSO"
    prefix = "TSO"

    def initial_state(self):
        return (self.initial_threads(), self.initial_memory(), ((),) * len(self.threads))

    def is_final(self, state) -> bool:
        return self.threads_done(state[0]) and not any(state[2])

    def final_parts(self, state):
        return state[0], state[1]

    def successors(self, state):
        threads, mem, sbs = state
        out = []
        p = self.prefix
        for tid, (pc, regs) in enumerate(threads):
            code = self.threads[tid].code
            if pc >= len(code):
                continue
            name = self.names[tid]
            ins = code[pc]
            kind = ins[0]
            sb = sbs[tid]
            if kind == LD:
                a = ins[2](regs)
                hits = [v for addr, v in sb if addr == a]
                if hits:
                    v, src = hits[-1], "sb"
                else:
                    v, src = mem_get(mem, a), "mem"
                th = (pc + 1, set_reg(regs, ins[1], v))
                out.append((Transition(name, f"{p}-Ld", f"{src} {self.addr_label(a)}={v}"),
                            (replace(threads, tid, th), mem, sbs)))
            elif kind == ST:
                a, v = ins[1](regs), ins[2](regs)
                out.append((Transition(name, f"{p}-St", f"{self.addr_label(a)}={v}"),
                            (replace(threads, tid, (pc + 1, regs)), mem, replace(sbs, tid, sb + ((a, v),)))))
            elif kind == COMMIT:
                if not sb:
                    out.append((Transition(name, f"{p}-Com"), (replace(threads, tid, (pc + 1, regs)), mem, sbs)))
            else:
                rule = f"{p}-Rec" if kind == REC else f"{p}-Nm"
                out.append((Transition(name, rule, f"pc={pc}"),
                            (replace(threads, tid, self.local_step(tid, (pc, regs), ins)), mem, sbs)))
        out.extend(self.dequeues(state))
        return out

    def dequeues(self, state):
        threads, mem, sbs = state
        out = []
        for tid, sb in enumerate(sbs):
            if sb:
                a, v = sb[0]
                out.append((Transition(self.names[tid], "TSO-DeqSb", f"{self.addr_label(a)}={v}"),
                            (threads, mem_set(mem, a, v), replace(sbs, tid, sb[1:]))))
        return out


def tso_transitions(machine: TSOMachine, state):
    return machine.successors(state)


def pso_deq_sb(state, pid: int, addr: int):
    """Dequeue the oldest store for ``addr`` from processor ``pid``'s buffer."""
    threads, mem, sbs = state
    sb = sbs[pid]
    for j, (a, v) in enumerate(sb):
        if a == addr:
            return (threads, mem_set(mem, a, v), replace(sbs, pid, sb[:j] + sb[j + 1:]))
    raise ValueError(f"address {addr} not in store buffer of processor {pid}")


class PSOMachine(TSOMachine):
    model_id = "PSO"
    prefix = "PSO"

    def dequeues(self, state):
        sbs = state[2]
        out = []
        for tid, sb in enumerate(sbs):
            for a in dict.fromkeys(addr for addr, _ in sb):
                v = next(val for addr, val in sb if addr == a)
                out.append((Transition(self.names[tid], "PSO-DeqSb", f"{self.addr_label(a)}={v}"),
                            pso_deq_sb(state, tid, a)))
        return out
