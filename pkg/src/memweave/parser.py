"""Reader and writer for the line-oriented ``.litmus`` format.

Example::

    test SB
    init { a=0, b=0 }
    thread P1 { St a 1; r1 = Ld b }
    thread P2 { St b 1; r2 = Ld a }
    exists (P1.r1 = 0 /\\ P2.r2 = 0)
    expect { SC: forbid, TSO: allow }

Registers are identifiers of the form ``r<digits>``; every other
identifier in an expression is an address label.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .litmus import (
    MODEL_IDS,
    AddrRef,
    And,
    Assign,
    BinOp,
    Commit,
    Condition,
    Const,
    ExitIf,
    Expr,
    Instruction,
    LitmusTest,
    Load,
    MemoryEq,
    Or,
    Program,
    Reconcile,
    Reg,
    RegisterEq,
    Store,
    Thread,
    Verdict,
    expr_registers,
    format_condition,
    format_instruction,
    written_registers,
)

REGISTER_RE = re.compile(r"r\d+\Z")
KEYWORDS = {"test", "init", "thread", "exists", "expect", "topology", "St", "Ld",
            "Commit", "Reconcile", "Fence", "if", "exit", "m"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>/\\|\\/|!=|≠|[{}()\[\];,:=<>+\-.])
    """,
    re.VERBOSE,
)


class LitmusSyntaxError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int
    pos: int


def tokenize(text: str) -> list[_Tok]:
    toks = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise LitmusSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tok_text = "!=" if m.group() == "≠" else m.group()
            toks.append(_Tok(kind, tok_text, line, pos - line_start + 1, pos))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1, pos))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    # -- token helpers -----------------------------------------------------

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, message: str, tok: Optional[_Tok] = None):
        tok = tok or self.tok
        raise LitmusSyntaxError(message, tok.line, tok.col)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "ident") and self.tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> _Tok:
        if not self.at(text):
            self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        tok = self.tok
        self.i += 1
        return tok

    def ident(self, what: str = "identifier") -> str:
        if self.tok.kind != "ident":
            self.error(f"expected {what}, found {self.tok.text or 'end of input'!r}")
        tok = self.tok
        self.i += 1
        return tok.text

    def number(self) -> int:
        neg = self.accept("-")
        if self.tok.kind != "num":
            self.error(f"expected number, found {self.tok.text or 'end of input'!r}")
        value = int(self.tok.text)
        self.i += 1
        return -value if neg else value

    # -- document ----------------------------------------------------------

    def test_name(self) -> str:
        """Identifiers joined by ``+`` or ``-`` with no whitespace, e.g. ``MP+Commit``."""
        parts = [self.ident("test name")]
        while (self.tok.kind == "op" and self.tok.text in "+-"
               and self.toks[self.i + 1].kind in ("ident", "num")
               and self.tok.pos == self.toks[self.i - 1].pos + len(self.toks[self.i - 1].text)
               and self.toks[self.i + 1].pos == self.tok.pos + 1):
            parts.append(self.tok.text)
            parts.append(self.toks[self.i + 1].text)
            self.i += 2
        return "".join(parts)

    def document(self) -> LitmusTest:
        self.expect("test")
        name = self.test_name()
        init: list[tuple[str, int]] = []
        threads: list[Thread] = []
        condition = None
        expectations: dict[str, Verdict] = {}
        topology = None
        while self.tok.kind != "eof":
            tok = self.tok
            if self.accept("init"):
                init.extend(self.init_block())
            elif self.accept("thread"):
                thread = self.thread_block()
                if any(t.name == thread.name for t in threads):
                    self.error(f"duplicate thread name {thread.name!r}", tok)
                threads.append(thread)
            elif self.accept("exists"):
                if condition is not None:
                    self.error("duplicate exists clause", tok)
                condition = self.condition()
            elif self.accept("expect"):
                expectations.update(self.expect_block())
            elif self.accept("topology"):
                topology = self.topology_block()
            else:
                self.error(f"unexpected {tok.text!r}")
        if not threads:
            self.error("test has no threads")
        if condition is None:
            self.error("missing exists clause")
        program = Program(tuple(threads), tuple(init))
        self.check_condition_refs(condition, program)
        if topology is not None:
            topology.check_processors([t.name for t in threads])
        return LitmusTest(name, program, condition, tuple(expectations.items()), topology)

    def init_block(self):
        self.expect("{")
        out = []
        while not self.accept("}"):
            addr = self.ident("address")
            self.expect("=")
            out.append((addr, self.number()))
            if not self.accept(","):
                self.accept(";")
        return out

    def thread_block(self) -> Thread:
        name = self.ident("thread name")
        self.expect("{")
        code: list[Instruction] = []
        defined: set[str] = set()
        while not self.accept("}"):
            start = self.tok
            ins = self.instruction()
            for r in _read_registers(ins):
                if r not in defined:
                    self.error(f"register {r!r} read before it is defined in thread {name}", start)
            if isinstance(ins, tuple):
                code.extend(ins)
            else:
                code.append(ins)
                if isinstance(ins, (Load, Assign)):
                    defined.add(ins.reg)
            if not self.at("}"):
                self.expect(";")
        return Thread(name, tuple(code))

    def instruction(self):
        if self.accept("St"):
            return Store(self.expr(), self.expr())
        if self.accept("Commit"):
            return Commit()
        if self.accept("Reconcile"):
            return Reconcile()
        if self.accept("Fence"):
            return (Commit(), Reconcile())
        if self.accept("if"):
            lhs = self.expr()
            if self.tok.text not in ("=", "!=", "<", ">"):
                self.error(f"expected relational operator, found {self.tok.text!r}")
            relop = self.tok.text
            self.i += 1
            rhs = self.expr()
            self.expect("exit")
            return ExitIf(lhs, relop, rhs)
        tok = self.tok
        reg = self.ident("instruction")
        if not REGISTER_RE.match(reg):
            self.error(f"unknown instruction {reg!r}", tok)
        self.expect("=")
        if self.accept("Ld"):
            return Load(reg, self.expr())
        return Assign(reg, self.expr())

    def expr(self) -> Expr:
        e = self.primary()
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            op = self.tok.text
            self.i += 1
            e = BinOp(op, e, self.primary())
        return e

    def primary(self) -> Expr:
        tok = self.tok
        if self.accept("("):
            if self.at("-") and self.toks[self.i + 1].kind == "num":
                e = Const(self.number())
            else:
                e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "num":
            self.i += 1
            return Const(int(tok.text))
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            self.i += 1
            return Reg(tok.text) if REGISTER_RE.match(tok.text) else AddrRef(tok.text)
        self.error(f"expected expression, found {tok.text or 'end of input'!r}")

    # -- condition ---------------------------------------------------------

    def condition(self) -> Condition:
        items = [self.conjunction()]
        while self.accept("\\/"):
            items.append(self.conjunction())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def conjunction(self) -> Condition:
        items = [self.atom()]
        while self.accept("/\\"):
            items.append(self.atom())
        return items[0] if len(items) == 1 else And(tuple(items))

    def atom(self) -> Condition:
        if self.accept("("):
            c = self.condition()
            self.expect(")")
            return c
        if self.accept("m"):
            self.expect("[")
            addr = self.ident("address")
            self.expect("]")
            self.expect("=")
            return MemoryEq(addr, self.atom_value())
        thread = self.ident("thread name")
        self.expect(".")
        tok = self.tok
        reg = self.ident("register")
        if not REGISTER_RE.match(reg):
            self.error(f"{reg!r} is not a register", tok)
        self.expect("=")
        return RegisterEq(thread, reg, self.atom_value())

    def atom_value(self):
        if self.tok.kind == "ident" and self.tok.text not in KEYWORDS:
            return self.ident()
        return self.number()

    def check_condition_refs(self, cond: Condition, program: Program):
        from .litmus import condition_atoms

        threads = {t.name: t for t in program.threads}
        for atom in condition_atoms(cond):
            values = [atom.value]
            if isinstance(atom, MemoryEq):
                values.append(atom.addr)
            else:
                if atom.thread not in threads:
                    self.error(f"condition names unknown thread {atom.thread!r}")
                if atom.reg not in written_registers(threads[atom.thread]):
                    self.error(f"condition names undefined register {atom.thread}.{atom.reg}")
            for v in values:
                if isinstance(v, str) and v not in program.addresses:
                    self.error(f"condition names unknown address {v!r}")

    # -- expect / topology -------------------------------------------------

    def expect_block(self) -> dict[str, Verdict]:
        self.expect("{")
        out = {}
        while not self.accept("}"):
            tok = self.tok
            model = self.ident("model id")
            while self.at("-"):
                self.i += 1
                model += "-" + self.ident("model id")
            if model not in MODEL_IDS:
                self.error(f"unknown model id {model!r}", tok)
            self.expect(":")
            vtok = self.tok
            verdict = self.ident("allow/forbid").lower()
            if verdict not in ("allow", "forbid"):
                self.error(f"expected allow or forbid, found {vtok.text!r}", vtok)
            out[model] = Verdict(verdict)
            if not self.accept(","):
                self.accept(";")
        return out

    def topology_block(self):
        from .models.fm import TopologyError, parse_topology

        open_tok = self.expect("{")
        depth = 1
        while depth:
            if self.tok.kind == "eof":
                self.error("unterminated topology block", open_tok)
            if self.at("{"):
                depth += 1
            elif self.at("}"):
                depth -= 1
            self.i += 1
        close_tok = self.toks[self.i - 1]
        body = self.text[open_tok.pos + 1:close_tok.pos]
        try:
            return parse_topology(body)
        except TopologyError as exc:
            self.error(str(exc), open_tok)


def _read_registers(ins) -> set[str]:
    if isinstance(ins, tuple):
        return set()
    if isinstance(ins, Load):
        return expr_registers(ins.addr)
    if isinstance(ins, Store):
        return expr_registers(ins.addr) | expr_registers(ins.data)
    if isinstance(ins, Assign):
        return expr_registers(ins.expr)
    if isinstance(ins, ExitIf):
        return expr_registers(ins.lhs) | expr_registers(ins.rhs)
    return set()


def parse_litmus(text: str) -> LitmusTest:
    """Parse one complete litmus document."""
    return _Parser(text).document()


def parse_expr(text: str) -> Expr:
    p = _Parser(text)
    e = p.expr()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r} after expression")
    return e


def parse_condition(text: str, program: Program) -> Condition:
    p = _Parser(text)
    c = p.condition()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r} after condition")
    p.check_condition_refs(c, program)
    return c


def load_litmus(path) -> LitmusTest:
    with open(path, encoding="utf-8") as f:
        return parse_litmus(f.read())


def format_program(prog: Program) -> list[str]:
    lines = []
    if prog.init:
        lines.append("init { " + ", ".join(f"{a}={v}" for a, v in prog.init) + " }")
    for t in prog.threads:
        if t.code:
            body = ";\n  ".join(format_instruction(i) for i in t.code)
            lines.append(f"thread {t.name} {{\n  {body}\n}}")
        else:
            lines.append(f"thread {t.name} {{ }}")
    return lines


def format_litmus(test: LitmusTest) -> str:
    lines = [f"test {test.name}", *format_program(test.program)]
    lines.append(f"exists ({format_condition(test.condition)})")
    if test.expectations:
        lines.append("expect { " + ", ".join(f"{m}: {v}" for m, v in test.expectations) + " }")
    if test.topology is not None:
        lines.append("topology {\n" + test.topology.format(indent="  ") + "\n}")
    return "\n".join(lines) + "\n"
