"""WMM-S: WMM plus tagged stores that may be copied between store buffers.

Copies are only made immediately before a load that reads the copy
(the restricted form).  ``unrestricted_copy=True`` additionally enables
the free-standing background copy, which is only practical on small tests.
"""

from __future__ import annotations

import graphlib
from dataclasses import dataclass

from .base import InvariantViolation, Transition, mem_get, mem_set, replace, set_reg
from .wmm import WMMMachine, ib_append, ib_set, sb_has


@dataclass(frozen=True)
class CoherenceGraph:
    """Tags currently buffered, with older -> younger edges per address."""

    nodes: frozenset
    edges: frozenset

    def successors(self, tag) -> list:
        return [y for x, y in self.edges if x == tag]

    def reaches(self, src, dst) -> bool:
        seen, stack = set(), [src]
        while stack:
            n = stack.pop()
            if n == dst:
                return True
            if n in seen:
                continue
            seen.add(n)
            stack.extend(self.successors(n))
        return False

    def is_acyclic(self) -> bool:
        sorter = graphlib.TopologicalSorter({n: set() for n in self.nodes})
        for x, y in self.edges:
            sorter.add(y, x)
        try:
            sorter.prepare()
        except graphlib.CycleError:
            return False
        return True


def coherence_graph(state) -> CoherenceGraph:
    sbs = state[2]
    nodes, edges = set(), set()
    for sb in sbs:
        last: dict[int, object] = {}
        for addr, _, tag in sb:
            nodes.add(tag)
            if addr in last:
                edges.add((last[addr], tag))
            last[addr] = tag
    return CoherenceGraph(frozenset(nodes), frozenset(edges))


def copy_allowed(state, tag, from_pid: int, to_pid: int) -> bool:
    """Whether copying store ``tag`` into ``to_pid``'s buffer keeps ``<co`` acyclic."""
    sbs = state[2]
    entry = next((e for e in sbs[from_pid] if e[2] == tag), None)
    if entry is None:
        raise ValueError(f"store {tag!r} is not buffered by processor {from_pid}")
    target = sbs[to_pid]
    if any(e[2] == tag for e in target):
        return False
    same_addr = [e[2] for e in target if e[0] == entry[0]]
    if not same_addr:
        return True
    # the copy becomes the youngest entry: one new edge youngest -> tag
    return not coherence_graph(state).reaches(tag, same_addr[-1])


def insert_copy(state, tag, from_pid: int, to_pid: int):
    threads, mem, sbs, ibs = state
    entry = next(e for e in sbs[from_pid] if e[2] == tag)
    return (threads, mem, replace(sbs, to_pid, sbs[to_pid] + (entry,)),
            replace(ibs, to_pid, ib_set(ibs[to_pid], entry[0], ())))


class WMMSMachine(WMMMachine):
    """Tags are ``(thread index, instruction index)``: unique since code has no loops."""

    model_id = "WMM-S"
    prefix = "WMM"

    def __init__(self, program, observed=None, unrestricted_copy: bool = False):
        super().__init__(program, observed)
        self.unrestricted_copy = unrestricted_copy

    def store_entry(self, tid, pc, addr, value):
        return (addr, value, (tid, pc))

    def tag_label(self, tag) -> str:
        return f"{self.names[tag[0]]}:{tag[1]}"

    def check_invariants(self, state) -> None:
        super().check_invariants(state)
        for tid, sb in enumerate(state[2]):
            tags = [e[2] for e in sb]
            if len(tags) != len(set(tags)):
                raise InvariantViolation(f"{self.names[tid]}: duplicate tag in sb")
        if not coherence_graph(state).is_acyclic():
            raise InvariantViolation("partial coherence order has a cycle")

    def load_successors(self, state, tid, reg, a):
        out = super().load_successors(state, tid, reg, a)
        threads, mem, sbs, ibs = state
        pc, regs = threads[tid]
        done = set()
        for src, sb in enumerate(sbs):
            if src == tid:
                continue
            for addr, v, tag in sb:
                if addr != a or tag in done or not copy_allowed(state, tag, src, tid):
                    continue
                done.add(tag)
                _, _, new_sbs, new_ibs = insert_copy(state, tag, src, tid)
                th = (pc + 1, set_reg(regs, reg, v))
                out.append((Transition(self.names[tid], "WMM-S-Copy+Ld",
                                       f"{self.tag_label(tag)} {self.addr_label(a)}={v}"),
                            (replace(threads, tid, th), mem, new_sbs, new_ibs)))
        return out

    def successors(self, state):
        out = super().successors(state)
        if self.unrestricted_copy:
            out.extend(self.background_copies(state))
        return out

    def background_copies(self, state):
        sbs = state[2]
        out, seen = [], set()
        for src, sb in enumerate(sbs):
            for _, _, tag in sb:
                for dst in range(len(sbs)):
                    if dst == src or (tag, dst) in seen:
                        continue
                    if copy_allowed(state, tag, src, dst):
                        seen.add((tag, dst))
                        out.append((Transition(self.names[dst], "WMM-S-Copy", self.tag_label(tag)),
                                    insert_copy(state, tag, src, dst)))
        return out

    def dequeues(self, state):
        threads, mem, sbs, ibs = state
        out = []
        tags = dict.fromkeys(e[2] for sb in sbs for e in sb)
        for tag in tags:
            holders = [k for k, sb in enumerate(sbs) if any(e[2] == tag for e in sb)]
            a, v = next((e[0], e[1]) for e in sbs[holders[0]] if e[2] == tag)
            if not all(next(e for e in sbs[k] if e[0] == a)[2] == tag for k in holders):
                continue
            old = mem_get(mem, a)
            new_ibs = tuple(ib if sb_has(sbs[k], a) else ib_append(ib, a, old) for k, ib in enumerate(ibs))
            new_sbs = tuple(tuple(e for e in sb if e[2] != tag) for sb in sbs)
            out.append((Transition(self.names[tag[0]], "WMM-S-DeqSb",
                                   f"{self.tag_label(tag)} {self.addr_label(a)}={v}"),
                        (threads, mem_set(mem, a, v), new_sbs, new_ibs)))
        return out


def wmms_transitions(machine: WMMSMachine, state):
    return machine.successors(state)
