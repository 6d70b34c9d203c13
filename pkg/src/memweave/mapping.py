"""C++11 atomics to WMM, and conservative fence insertion for SC.

The C++ side is a flat list of memory operations; ``parse_cpp_ops`` reads
a one-operation-per-line text form::

    thread P1
      store_relaxed a 1
      store_release b 1
    thread P2
      load_acquire r1 b
      load_relaxed r2 a
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Union

from .litmus import (
    Commit,
    Const,
    Expr,
    Instruction,
    Load,
    Program,
    Reconcile,
    Store,
    Thread,
)


class CppKind(enum.Enum):
    NON_ATOMIC_LOAD = "load_na"
    LOAD_RELAXED = "load_relaxed"
    LOAD_CONSUME = "load_consume"
    LOAD_ACQUIRE = "load_acquire"
    LOAD_SC = "load_sc"
    NON_ATOMIC_STORE = "store_na"
    STORE_RELAXED = "store_relaxed"
    STORE_RELEASE = "store_release"
    STORE_SC = "store_sc"

    @property
    def is_load(self) -> bool:
        return self.value.startswith("load")


@dataclass(frozen=True)
class CppOp:
    kind: CppKind
    addr: Expr
    reg: Optional[str] = None  # loads
    data: Optional[Expr] = None  # stores

    def __post_init__(self):
        if self.kind.is_load and self.reg is None:
            raise ValueError(f"{self.kind.value} needs a destination register")
        if not self.kind.is_load and self.data is None:
            raise ValueError(f"{self.kind.value} needs a value")

    @classmethod
    def load(cls, kind: Union[CppKind, str], reg: str, addr: Expr) -> "CppOp":
        return cls(CppKind(kind), addr, reg=reg)

    @classmethod
    def store(cls, kind: Union[CppKind, str], addr: Expr, data: Union[Expr, int]) -> "CppOp":
        if isinstance(data, int):
            data = Const(data)
        return cls(CppKind(kind), addr, data=data)


def map_cpp(ops) -> list[Instruction]:
    out: list[Instruction] = []
    for op in ops:
        k = op.kind
        if k in (CppKind.NON_ATOMIC_LOAD, CppKind.LOAD_RELAXED):
            out.append(Load(op.reg, op.addr))
        elif k in (CppKind.LOAD_CONSUME, CppKind.LOAD_ACQUIRE):
            out += [Load(op.reg, op.addr), Reconcile()]
        elif k is CppKind.LOAD_SC:
            out += [Commit(), Reconcile(), Load(op.reg, op.addr), Reconcile()]
        elif k in (CppKind.NON_ATOMIC_STORE, CppKind.STORE_RELAXED):
            out.append(Store(op.addr, op.data))
        else:
            out += [Commit(), Store(op.addr, op.data)]
    return out


def insert_sc_fences(program: Program) -> Program:
    """Commit before every store; Commit then Reconcile before every load.

    Not idempotent: applying it twice adds a second round of fences.
    """
    threads = []
    for t in program.threads:
        code: list[Instruction] = []
        for ins in t.code:
            if isinstance(ins, Store):
                code.append(Commit())
            elif isinstance(ins, Load):
                code += [Commit(), Reconcile()]
            code.append(ins)
        threads.append(Thread(t.name, tuple(code)))
    return program.replace_threads(threads)


def parse_cpp_ops(text: str) -> list[tuple[str, list[CppOp]]]:
    """Parse the one-op-per-line form into ``(thread name, ops)`` pairs."""
    from .parser import LitmusSyntaxError, parse_expr

    threads: list[tuple[str, list[CppOp]]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split(None, 1)
        if words[0] == "thread":
            if len(words) != 2 or not words[1].isidentifier():
                raise LitmusSyntaxError("expected 'thread NAME'", lineno, 1)
            threads.append((words[1], []))
            continue
        if not threads:
            raise LitmusSyntaxError("operation outside a thread", lineno, 1)
        try:
            kind = CppKind(words[0])
        except ValueError:
            raise LitmusSyntaxError(f"unknown operation {words[0]!r}", lineno, 1) from None
        rest = words[1] if len(words) > 1 else ""
        try:
            if kind.is_load:
                reg, addr = rest.split(None, 1)
                op = CppOp.load(kind, reg, parse_expr(addr))
            else:
                addr, data = rest.split(None, 1)
                op = CppOp.store(kind, parse_expr(addr), parse_expr(data))
        except (ValueError, LitmusSyntaxError) as e:
            raise LitmusSyntaxError(f"bad operands for {kind.value}: {e}", lineno, 1) from None
        threads[-1][1].append(op)
    return threads


def map_cpp_program(threads, init=()) -> Program:
    return Program(tuple(Thread(name, tuple(map_cpp(ops))) for name, ops in threads), tuple(init))
