import pytest

from memweave.litmus import (
    AddrRef,
    And,
    BinOp,
    ConditionError,
    Const,
    MemoryEq,
    Outcome,
    Reg,
    RegisterEq,
    check_condition,
    eval_expr,
)
from memweave.parser import parse_expr

ENC = {"a": 1024, "b": 1025}


def test_address_arithmetic_yields_encoding():
    e = BinOp("-", BinOp("+", AddrRef("b"), Reg("r1")), Const(1))
    assert eval_expr(e, {"r1": 1}, ENC) == ENC["b"]


def test_constant():
    assert eval_expr(Const(42), {}, ENC) == 42


def test_undefined_register_reads_zero():
    assert eval_expr(Reg("r3"), {}, ENC) == 0


def test_parse_expr_left_associative():
    assert eval_expr(parse_expr("b+r1-1"), {"r1": 1}, ENC) == ENC["b"]
    assert eval_expr(parse_expr("5-2-1"), {}, ENC) == 2


def _o(regs=None, mem=None):
    return Outcome.build(regs or {}, mem or {})


def test_condition_conjunction_true():
    c = And((RegisterEq("P1", "r1", 0), RegisterEq("P2", "r2", 0)))
    assert check_condition(c, _o({("P1", "r1"): 0, ("P2", "r2"): 0}), ENC)


def test_memory_atom_false():
    assert not check_condition(MemoryEq("a", 2), _o(mem={"a": 1}), ENC)


def test_wwc_condition_on_witness_outcome(get):
    t = get("WWC")
    o = _o({("P2", "r1"): 2, ("P3", "r2"): 1}, {"a": 2, "b": 1})
    assert check_condition(t.condition, o, t.program.encoding)


def test_address_valued_atom_compares_encoding():
    o = _o({("P2", "r1"): ENC["a"]})
    assert check_condition(RegisterEq("P2", "r1", "a"), o, ENC)
    assert not check_condition(RegisterEq("P2", "r1", "b"), o, ENC)


def test_unobserved_register_is_an_error():
    with pytest.raises(ConditionError):
        check_condition(RegisterEq("P9", "r1", 0), _o(), ENC)


def test_outcome_accessors_and_str():
    o = _o({("P1", "r1"): 3}, {"a": 1})
    assert o.reg("P1", "r1") == 3 and o.mem("a") == 1
    assert "P1.r1=3" in str(o)
