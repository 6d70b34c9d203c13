"""Flowing model: a tree of request segments in front of an atomic memory.

Processors issue in order and block on loads and ``Commit`` until the
response arrives; stores are fire-and-forget.  Within a segment, index 0
is the head (closest to the parent, oldest) and the last element is the
tail where new requests arrive.

Topology syntax (statements separated by ``;`` or newlines)::

    seg s5 parent mem
    seg s1 parent s5
    proc P1 at s1
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Sequence

from .base import (
    COMMIT,
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

MEM = "mem"


class TopologyError(ValueError):
    pass


@dataclass(frozen=True)
class Topology:
    segments: tuple[tuple[str, Optional[str]], ...]  # (name, parent); None parent = memory
    procs: tuple[tuple[str, str], ...]  # (processor, leaf segment)

    def __post_init__(self):
        names = [s for s, _ in self.segments]
        if len(set(names)) != len(names):
            raise TopologyError("segment declared twice")
        parents = dict(self.segments)
        for s, parent in self.segments:
            if parent is not None and parent not in parents:
                raise TopologyError(f"segment {s} has unknown parent {parent}")
        for s in names:
            seen, cur = set(), s
            while cur is not None:
                if cur in seen:
                    raise TopologyError(f"cycle in parent relation through segment {s}")
                seen.add(cur)
                cur = parents[cur]
        procs = [p for p, _ in self.procs]
        if len(set(procs)) != len(procs):
            raise TopologyError("processor bound twice")
        for p, seg in self.procs:
            if seg not in parents:
                raise TopologyError(f"processor {p} bound to missing segment {seg}")

    @property
    def parent(self) -> dict[str, Optional[str]]:
        return dict(self.segments)

    def segment_of(self, proc: str) -> str:
        return dict(self.procs)[proc]

    def check_processors(self, thread_names: Sequence[str]) -> None:
        bound = dict(self.procs)
        missing = [t for t in thread_names if t not in bound]
        if missing:
            raise TopologyError(f"processor(s) {', '.join(missing)} not attached to any segment")

    def format(self, indent: str = "") -> str:
        lines = [f"{indent}seg {s} parent {p or MEM};" for s, p in self.segments]
        lines += [f"{indent}proc {p} at {s};" for p, s in self.procs]
        return "\n".join(lines)


_STMT_RE = {
    "seg": re.compile(r"seg\s+(\w+)\s+parent\s+(\w+)\Z"),
    "proc": re.compile(r"proc\s+(\w+)\s+at\s+(\w+)\Z"),
}


def parse_topology(text: str) -> Topology:
    segments, procs = [], []
    for raw in re.split(r"[;\n]", text):
        stmt = raw.split("#", 1)[0].strip()
        if not stmt:
            continue
        m = _STMT_RE["seg"].match(stmt)
        if m:
            segments.append((m.group(1), None if m.group(2) == MEM else m.group(2)))
            continue
        m = _STMT_RE["proc"].match(stmt)
        if m:
            procs.append((m.group(1), m.group(2)))
            continue
        raise TopologyError(f"bad topology statement {stmt!r}")
    return Topology(tuple(segments), tuple(procs))


def default_topology(thread_names: Sequence[str]) -> Topology:
    """One private segment per processor, each parented to memory."""
    return Topology(tuple((f"s_{t}", None) for t in thread_names),
                    tuple((t, f"s_{t}") for t in thread_names))


# P1/P2 share one write-through subtree, P3/P4 another
SHARED_TOPOLOGY_TEXT = """\
seg s5 parent mem; seg s6 parent mem
seg s1 parent s5; seg s2 parent s5
seg s3 parent s6; seg s4 parent s6
proc P1 at s1; proc P2 at s2; proc P3 at s3; proc P4 at s4
"""


def shared_topology() -> Topology:
    return parse_topology(SHARED_TOPOLOGY_TEXT)


# request tuples
LOAD, STORE, FENCE = "L", "S", "C"


def _is_access(r) -> bool:
    return r[0] in (LOAD, STORE)


def _req_addr(r) -> int:
    return r[3] if r[0] == LOAD else r[1]


class FMMachine(Machine):
    """State: ``(threads, blocked, memory, segments)``.

    Requests are ``("L", tid, reg, addr)``, ``("S", addr, value, tid)`` or
    ``("C", tid)``.
    """

    model_id = "FM"

    def __init__(self, program, observed=None, topology: Optional[Topology] = None):
        super().__init__(program, observed)
        self.topology = topology or default_topology(self.names)
        self.topology.check_processors(self.names)
        seg_names = [s for s, _ in self.topology.segments]
        self.seg_names = seg_names
        self.seg_parent = [None if p is None else seg_names.index(p) for _, p in self.topology.segments]
        self.leaf = [seg_names.index(self.topology.segment_of(n)) for n in self.names]

    def initial_state(self):
        n = len(self.threads)
        return (self.initial_threads(), (False,) * n, self.initial_memory(), ((),) * len(self.seg_names))

    def is_final(self, state) -> bool:
        threads, blocked, _, segs = state
        return self.threads_done(threads) and not any(blocked) and not any(segs)

    def final_parts(self, state):
        return state[0], state[2]

    def describe(self, r) -> str:
        if r[0] == LOAD:
            return f"Ld {self.names[r[1]]} {self.addr_label(r[3])}"
        if r[0] == STORE:
            return f"St {self.names[r[3]]} {self.addr_label(r[1])}={r[2]}"
        return f"Commit {self.names[r[1]]}"

    def respond(self, threads, blocked, tid, reg=None, value=None):
        if reg is not None:
            pc, regs = threads[tid]
            threads = replace(threads, tid, (pc, set_reg(regs, reg, value)))
        return threads, replace(blocked, tid, False)

    def successors(self, state):
        threads, blocked, mem, segs = state
        out = []
        # issue
        for tid, (pc, regs) in enumerate(threads):
            code = self.threads[tid].code
            if blocked[tid] or pc >= len(code):
                continue
            name = self.names[tid]
            ins = code[pc]
            kind = ins[0]
            leaf = self.leaf[tid]
            nthreads = replace(threads, tid, (pc + 1, regs))
            if kind == LD:
                a = ins[2](regs)
                req = (LOAD, tid, ins[1], a)
                out.append((Transition(name, "FM-Issue", f"Ld {self.addr_label(a)}"),
                            (nthreads, replace(blocked, tid, True), mem, replace(segs, leaf, segs[leaf] + (req,)))))
            elif kind == ST:
                a, v = ins[1](regs), ins[2](regs)
                req = (STORE, a, v, tid)
                out.append((Transition(name, "FM-Issue", f"St {self.addr_label(a)}={v}"),
                            (nthreads, blocked, mem, replace(segs, leaf, segs[leaf] + (req,)))))
            elif kind == COMMIT:
                out.append((Transition(name, "FM-Issue", "Commit"),
                            (nthreads, replace(blocked, tid, True), mem, replace(segs, leaf, segs[leaf] + ((FENCE, tid),)))))
            else:
                rule = "FM-Rec" if kind == REC else "FM-Nm"
                out.append((Transition(name, rule, f"pc={pc}"),
                            (replace(threads, tid, self.local_step(tid, (pc, regs), ins)), blocked, mem, segs)))
        # background
        for si, seg in enumerate(segs):
            sname = self.seg_names[si]
            for k in range(len(seg) - 1):
                old, new = seg[k], seg[k + 1]
                same_addr = _is_access(old) and _is_access(new) and _req_addr(old) == _req_addr(new)
                if new[0] == LOAD and old[0] == STORE and same_addr:
                    th, bl = self.respond(threads, blocked, new[1], new[2], old[2])
                    out.append((Transition(None, "FM-Bypass", f"{sname}[{k}] {self.describe(new)}={old[2]}"),
                                (th, bl, mem, replace(segs, si, seg[:k + 1] + seg[k + 2:]))))
                if same_addr or (new[0] == FENCE and old[0] == STORE):
                    continue
                swapped = seg[:k] + (new, old) + seg[k + 2:]
                out.append((Transition(None, "FM-Reorder", f"{sname}[{k}]"),
                            (threads, blocked, mem, replace(segs, si, swapped))))
            if seg:
                head, rest = seg[0], seg[1:]
                parent = self.seg_parent[si]
                label = f"{sname} {self.describe(head)}"
                if parent is not None:
                    nsegs = replace(replace(segs, si, rest), parent, segs[parent] + (head,))
                    out.append((Transition(None, "FM-Flow", f"{label} -> {self.seg_names[parent]}"),
                                (threads, blocked, mem, nsegs)))
                    continue
                nsegs = replace(segs, si, rest)
                if head[0] == LOAD:
                    v = mem_get(mem, head[3])
                    th, bl = self.respond(threads, blocked, head[1], head[2], v)
                    out.append((Transition(None, "FM-Flow", f"{label} -> mem ={v}"), (th, bl, mem, nsegs)))
                elif head[0] == STORE:
                    out.append((Transition(None, "FM-Flow", f"{label} -> mem"),
                                (threads, blocked, mem_set(mem, head[1], head[2]), nsegs)))
                else:
                    th, bl = self.respond(threads, blocked, head[1])
                    out.append((Transition(None, "FM-Flow", f"{label} -> mem"), (th, bl, mem, nsegs)))
        return out


def fm_transitions(machine: FMMachine, state):
    return machine.successors(state)
