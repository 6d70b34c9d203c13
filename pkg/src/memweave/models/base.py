"""Shared plumbing for the abstract machines.

Every machine works on a compiled form of the program: registers become
tuple slots, expressions become closures over the register tuple, and
memory is a sorted tuple of ``(address, value)`` pairs so that states are
hashable values.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass
from typing import Callable, Hashable, Optional, Sequence

from ..litmus import (
    RELOPS,
    AddrRef,
    Assign,
    BinOp,
    Commit,
    Const,
    ExitIf,
    Load,
    Outcome,
    Program,
    Reconcile,
    Reg,
    Store,
    observed_registers,
    written_registers,
)


class InvariantViolation(AssertionError):
    """A machine invariant failed on a reachable state."""


@dataclass(frozen=True)
class Transition:
    """One enabled step.  ``detail`` pins down every nondeterministic choice."""

    proc: Optional[str]
    rule: str
    detail: str = ""

    def __str__(self) -> str:
        parts = [p for p in (self.proc, self.rule, self.detail) if p]
        return " ".join(parts)


# -- compiled program -------------------------------------------------------

LD, ST, COMMIT, REC, ASSIGN, EXIT = range(6)


def compile_expr(e, reg_index: dict[str, int], enc: dict[str, int]) -> Callable[[tuple], int]:
    if isinstance(e, Const):
        v = e.value
        return lambda regs: v
    if isinstance(e, AddrRef):
        v = enc[e.name]
        return lambda regs: v
    if isinstance(e, Reg):
        i = reg_index[e.name]
        return lambda regs: regs[i]
    assert isinstance(e, BinOp)
    f, g = compile_expr(e.lhs, reg_index, enc), compile_expr(e.rhs, reg_index, enc)
    op = operator.add if e.op == "+" else operator.sub
    return lambda regs: op(f(regs), g(regs))


@dataclass
class CompiledThread:
    name: str
    registers: list[str]
    code: list[tuple]
    source: tuple

    @property
    def length(self) -> int:
        return len(self.code)


def _all_registers(thread) -> list[str]:
    from ..litmus import expr_registers, instruction_exprs

    regs = dict.fromkeys(written_registers(thread))
    for ins in thread.code:
        for e in instruction_exprs(ins):
            for r in sorted(expr_registers(e)):
                regs.setdefault(r, None)
    return list(regs)


def compile_thread(thread, enc: dict[str, int], extra_regs: Sequence[str] = ()) -> CompiledThread:
    registers = _all_registers(thread)
    for r in extra_regs:
        if r not in registers:
            registers.append(r)
    idx = {r: i for i, r in enumerate(registers)}
    code = []
    for ins in thread.code:
        if isinstance(ins, Load):
            code.append((LD, idx[ins.reg], compile_expr(ins.addr, idx, enc)))
        elif isinstance(ins, Store):
            code.append((ST, compile_expr(ins.addr, idx, enc), compile_expr(ins.data, idx, enc)))
        elif isinstance(ins, Commit):
            code.append((COMMIT,))
        elif isinstance(ins, Reconcile):
            code.append((REC,))
        elif isinstance(ins, Assign):
            code.append((ASSIGN, idx[ins.reg], compile_expr(ins.expr, idx, enc)))
        elif isinstance(ins, ExitIf):
            code.append((EXIT, compile_expr(ins.lhs, idx, enc), RELOPS[ins.relop], compile_expr(ins.rhs, idx, enc)))
        else:
            raise TypeError(f"unknown instruction {ins!r}")
    return CompiledThread(thread.name, registers, code, thread.code)


# -- immutable memory helpers ----------------------------------------------


def mem_get(mem: tuple, addr: int) -> int:
    for a, v in mem:
        if a == addr:
            return v
    return 0


def mem_set(mem: tuple, addr: int, value: int) -> tuple:
    out = [(a, v) for a, v in mem if a != addr]
    out.append((addr, value))
    out.sort()
    return tuple(out)


def set_reg(regs: tuple, i: int, value: int) -> tuple:
    return regs[:i] + (value,) + regs[i + 1:]


def replace(seq: tuple, i: int, item) -> tuple:
    return seq[:i] + (item,) + seq[i + 1:]


# -- machine base -----------------------------------------------------------


class Machine:
    """Base class for abstract machines.

    Subclasses implement :meth:`initial_state`, :meth:`successors`,
    :meth:`is_final` and :meth:`final_parts`.  States must be hashable
    values; :meth:`successors` must be a pure function of its argument.
    """

    model_id = "?"

    def __init__(self, program: Program, observed: Optional[Sequence[tuple[str, str]]] = None):
        self.program = program
        self.observed = tuple(observed) if observed is not None else observed_registers(program)
        self.enc = program.encoding
        extra: dict[str, list[str]] = {}
        for t, r in self.observed:
            extra.setdefault(t, []).append(r)
        self.threads = [compile_thread(t, self.enc, extra.get(t.name, ())) for t in program.threads]
        self.names = [t.name for t in program.threads]
        self._observe_slots = [
            (t, r, self.names.index(t), self.threads[self.names.index(t)].registers.index(r))
            for t, r in self.observed
        ]

    # contract -------------------------------------------------------------

    def initial_state(self) -> Hashable:
        raise NotImplementedError

    def successors(self, state) -> list[tuple[Transition, Hashable]]:
        raise NotImplementedError

    def is_final(self, state) -> bool:
        raise NotImplementedError

    def final_parts(self, state) -> tuple[Sequence[tuple[int, tuple]], tuple]:
        """Return ``(per-thread (pc, regs), memory)`` of a final state."""
        raise NotImplementedError

    def check_invariants(self, state) -> None:
        """Raise :class:`InvariantViolation` if ``state`` is malformed."""

    # derived ----------------------------------------------------------------

    def enabled(self, state) -> list[Transition]:
        return [t for t, _ in self.successors(state)]

    def apply(self, state, transition: Transition):
        for t, nxt in self.successors(state):
            if t == transition:
                return nxt
        raise ValueError(f"{transition} is not enabled")

    def observe(self, state) -> Outcome:
        if not self.is_final(state):
            raise ValueError("observe() called on a non-final state")
        threads, mem = self.final_parts(state)
        regs = {(t, r): threads[ti][1][ri] for t, r, ti, ri in self._observe_slots}
        memory = {self.program.address_name(a): v for a, v in mem}
        return Outcome.build(regs, memory)

    # helpers for subclasses ---------------------------------------------------

    def initial_threads(self) -> tuple:
        return tuple((0, (0,) * len(t.registers)) for t in self.threads)

    def initial_memory(self) -> tuple:
        return tuple(sorted(self.program.initial_memory().items()))

    def addr_label(self, addr: int) -> str:
        return self.program.address_name(addr)

    def local_step(self, tid: int, thread: tuple, ins: tuple) -> tuple:
        """Execute Assign/ExitIf (and fences that are no-ops) on ``thread``."""
        pc, regs = thread
        kind = ins[0]
        if kind == ASSIGN:
            return (pc + 1, set_reg(regs, ins[1], ins[2](regs)))
        if kind == EXIT:
            if ins[2](ins[1](regs), ins[3](regs)):
                return (self.threads[tid].length, regs)
            return (pc + 1, regs)
        return (pc + 1, regs)

    def threads_done(self, threads: tuple) -> bool:
        return all(th[0] >= ct.length for th, ct in zip(threads, self.threads))
