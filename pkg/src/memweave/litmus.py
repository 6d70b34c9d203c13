"""Program representation shared by every machine.

Threads are straight-line code over symbolic addresses; the only control
flow is ``if <lhs> <relop> <rhs> exit``.  Addresses evaluate to opaque
integers (see :data:`ADDRESS_BASE`) so address arithmetic such as
``b + r1 - 1`` is exact.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

ADDRESS_BASE = 1024

# --------------------------------------------------------------------------
# Expressions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class AddrRef:
    name: str


@dataclass(frozen=True)
class Reg:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str  # "+" or "-"
    lhs: "Expr"
    rhs: "Expr"


Expr = Union[Const, AddrRef, Reg, BinOp]


def eval_expr(e: Expr, regs: Mapping[str, int], addr_encoding: Mapping[str, int]) -> int:
    """Evaluate ``e``; registers missing from ``regs`` read as 0."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Reg):
        return regs.get(e.name, 0)
    if isinstance(e, AddrRef):
        return addr_encoding[e.name]
    lhs = eval_expr(e.lhs, regs, addr_encoding)
    rhs = eval_expr(e.rhs, regs, addr_encoding)
    return lhs + rhs if e.op == "+" else lhs - rhs


def expr_registers(e: Expr) -> set[str]:
    if isinstance(e, Reg):
        return {e.name}
    if isinstance(e, BinOp):
        return expr_registers(e.lhs) | expr_registers(e.rhs)
    return set()


def expr_addresses(e: Expr) -> list[str]:
    if isinstance(e, AddrRef):
        return [e.name]
    if isinstance(e, BinOp):
        return expr_addresses(e.lhs) + expr_addresses(e.rhs)
    return []


def format_expr(e: Expr) -> str:
    if isinstance(e, Const):
        return str(e.value) if e.value >= 0 else f"({e.value})"
    if isinstance(e, (AddrRef, Reg)):
        return e.name
    rhs = format_expr(e.rhs)
    if isinstance(e.rhs, BinOp):
        rhs = f"({rhs})"
    return f"{format_expr(e.lhs)}{e.op}{rhs}"


# --------------------------------------------------------------------------
# Instructions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Load:
    reg: str
    addr: Expr


@dataclass(frozen=True)
class Store:
    addr: Expr
    data: Expr


@dataclass(frozen=True)
class Commit:
    pass


@dataclass(frozen=True)
class Reconcile:
    pass


@dataclass(frozen=True)
class Assign:
    reg: str
    expr: Expr


RELOPS = {
    "=": lambda x, y: x == y,
    "!=": lambda x, y: x != y,
    "<": lambda x, y: x < y,
    ">": lambda x, y: x > y,
}


@dataclass(frozen=True)
class ExitIf:
    lhs: Expr
    relop: str
    rhs: Expr

    def holds(self, lhs: int, rhs: int) -> bool:
        return RELOPS[self.relop](lhs, rhs)


Instruction = Union[Load, Store, Commit, Reconcile, Assign, ExitIf]


def format_instruction(ins: Instruction) -> str:
    if isinstance(ins, Load):
        return f"{ins.reg} = Ld {format_expr(ins.addr)}"
    if isinstance(ins, Store):
        return f"St {format_expr(ins.addr)} {format_expr(ins.data)}"
    if isinstance(ins, Commit):
        return "Commit"
    if isinstance(ins, Reconcile):
        return "Reconcile"
    if isinstance(ins, Assign):
        return f"{ins.reg} = {format_expr(ins.expr)}"
    return f"if {format_expr(ins.lhs)} {ins.relop} {format_expr(ins.rhs)} exit"


# --------------------------------------------------------------------------
# Programs
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Thread:
    name: str
    code: tuple[Instruction, ...]


@dataclass(frozen=True)
class Program:
    threads: tuple[Thread, ...]
    init: tuple[tuple[str, int], ...] = ()
    addresses: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.addresses:
            object.__setattr__(self, "addresses", collect_addresses(self.threads, self.init))

    @property
    def encoding(self) -> dict[str, int]:
        return {name: ADDRESS_BASE + i for i, name in enumerate(self.addresses)}

    @property
    def decoding(self) -> dict[int, str]:
        return {ADDRESS_BASE + i: name for i, name in enumerate(self.addresses)}

    def address_name(self, addr: int) -> str:
        return self.decoding.get(addr, f"@{addr}")

    def initial_memory(self) -> dict[int, int]:
        enc = self.encoding
        mem = {enc[a]: 0 for a in self.addresses}
        for name, value in self.init:
            mem[enc[name]] = value
        return mem

    def thread_index(self, name: str) -> int:
        for i, t in enumerate(self.threads):
            if t.name == name:
                return i
        raise KeyError(name)

    @property
    def instruction_count(self) -> int:
        return sum(len(t.code) for t in self.threads)

    @property
    def is_branch_free(self) -> bool:
        return not any(isinstance(ins, ExitIf) for t in self.threads for ins in t.code)

    def replace_threads(self, threads) -> "Program":
        return Program(tuple(threads), self.init, self.addresses)


def collect_addresses(threads, init=()) -> tuple[str, ...]:
    """Init labels first, then address literals in order of appearance."""
    seen: dict[str, None] = {name: None for name, _ in init}
    for t in threads:
        for ins in t.code:
            for e in instruction_exprs(ins):
                for a in expr_addresses(e):
                    seen.setdefault(a, None)
    return tuple(seen)


def instruction_exprs(ins: Instruction) -> tuple[Expr, ...]:
    if isinstance(ins, Load):
        return (ins.addr,)
    if isinstance(ins, Store):
        return (ins.addr, ins.data)
    if isinstance(ins, Assign):
        return (ins.expr,)
    if isinstance(ins, ExitIf):
        return (ins.lhs, ins.rhs)
    return ()


def written_registers(thread: Thread) -> list[str]:
    out: dict[str, None] = {}
    for ins in thread.code:
        if isinstance(ins, (Load, Assign)):
            out.setdefault(ins.reg, None)
    return list(out)


# --------------------------------------------------------------------------
# Conditions, outcomes, verdicts
# --------------------------------------------------------------------------

Value = Union[int, str]  # str: an address literal, compared by its encoding


@dataclass(frozen=True)
class RegisterEq:
    thread: str
    reg: str
    value: Value


@dataclass(frozen=True)
class MemoryEq:
    addr: str
    value: Value


@dataclass(frozen=True)
class And:
    items: tuple["Condition", ...]


@dataclass(frozen=True)
class Or:
    items: tuple["Condition", ...]


Condition = Union[RegisterEq, MemoryEq, And, Or]


def condition_atoms(c: Condition):
    if isinstance(c, (And, Or)):
        for item in c.items:
            yield from condition_atoms(item)
    else:
        yield c


def format_condition(c: Condition, top: bool = True) -> str:
    if isinstance(c, RegisterEq):
        return f"{c.thread}.{c.reg} = {c.value}"
    if isinstance(c, MemoryEq):
        return f"m[{c.addr}] = {c.value}"
    sep = r" /\ " if isinstance(c, And) else r" \/ "
    body = sep.join(format_condition(i, top=False) for i in c.items)
    return body if top else f"({body})"


@dataclass(frozen=True)
class Outcome:
    """A final observation.  Equality is map equality over both parts."""

    registers: tuple[tuple[tuple[str, str], int], ...]
    memory: tuple[tuple[str, int], ...]

    @classmethod
    def build(cls, registers: Mapping[tuple[str, str], int], memory: Mapping[str, int]) -> "Outcome":
        return cls(tuple(sorted(registers.items())), tuple(sorted(memory.items())))

    def reg(self, thread: str, reg: str) -> int:
        return dict(self.registers)[(thread, reg)]

    def mem(self, addr: str) -> int:
        return dict(self.memory)[addr]

    def to_dict(self) -> dict:
        return {
            "registers": {f"{t}.{r}": v for (t, r), v in self.registers},
            "memory": dict(self.memory),
        }

    def __str__(self) -> str:
        regs = ", ".join(f"{t}.{r}={v}" for (t, r), v in self.registers)
        mem = ", ".join(f"m[{a}]={v}" for a, v in self.memory)
        return "; ".join(p for p in (regs, mem) if p)


def observed_registers(program: Program, condition: Optional[Condition] = None) -> tuple[tuple[str, str], ...]:
    """Load targets of every thread, plus registers named by ``condition``."""
    regs: dict[tuple[str, str], None] = {}
    for t in program.threads:
        for ins in t.code:
            if isinstance(ins, Load):
                regs.setdefault((t.name, ins.reg), None)
    if condition is not None:
        for atom in condition_atoms(condition):
            if isinstance(atom, RegisterEq):
                regs.setdefault((atom.thread, atom.reg), None)
    return tuple(sorted(regs))


class ConditionError(KeyError):
    """An atom names a register or address missing from the outcome."""


def _atom_value(v: Value, encoding: Mapping[str, int]) -> int:
    return encoding[v] if isinstance(v, str) else v


def check_condition(c: Condition, o: Outcome, encoding: Mapping[str, int] = None) -> bool:
    encoding = encoding or {}
    if isinstance(c, And):
        return all(check_condition(i, o, encoding) for i in c.items)
    if isinstance(c, Or):
        return any(check_condition(i, o, encoding) for i in c.items)
    try:
        if isinstance(c, RegisterEq):
            actual = dict(o.registers)[(c.thread, c.reg)]
        else:
            actual = dict(o.memory)[c.addr]
        expected = _atom_value(c.value, encoding)
    except KeyError as exc:
        raise ConditionError(f"condition atom {format_condition(c)} not observable: {exc}") from None
    return actual == expected


class Verdict(enum.Enum):
    ALLOW = "allow"
    FORBID = "forbid"

    def __str__(self) -> str:
        return self.value


MODEL_IDS = ("SC", "TSO", "PSO", "WMM", "WMM-S", "FM", "WMM-AX")


@dataclass(frozen=True)
class LitmusTest:
    name: str
    program: Program
    condition: Condition
    expectations: tuple[tuple[str, Verdict], ...] = ()
    topology: Optional[object] = None  # memweave.models.fm.Topology
    observed: tuple[tuple[str, str], ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not self.observed:
            object.__setattr__(self, "observed", observed_registers(self.program, self.condition))

    @property
    def expected(self) -> dict[str, Verdict]:
        return dict(self.expectations)
