import pytest
from hypothesis import given
from hypothesis import strategies as st

from memweave.litmus import (
    AddrRef,
    BinOp,
    Commit,
    Const,
    ExitIf,
    Load,
    Reconcile,
    Reg,
    Verdict,
    eval_expr,
    format_expr,
)
from memweave.models.fm import TopologyError
from memweave.parser import LitmusSyntaxError, format_litmus, parse_expr, parse_litmus

from .conftest import SB_SRC


def test_sb_shape():
    t = parse_litmus(SB_SRC)
    assert t.name == "SB"
    assert [th.name for th in t.program.threads] == ["P1", "P2"]
    assert t.program.instruction_count == 4
    assert t.program.encoding == {"a": 1024, "b": 1025}


def test_empty_thread():
    t = parse_litmus("test E\ninit { a=0 }\nthread P1 { }\nexists m[a] = 0\n")
    assert len(t.program.threads) == 1
    assert t.program.threads[0].code == ()


def test_corpus_round_trip(corpus):
    for entry in corpus:
        again = parse_litmus(format_litmus(entry.test))
        assert again == entry.test, entry.name


def test_fence_desugars():
    t = parse_litmus("test F\nthread P1 { St a 1; Fence; r1 = Ld a }\nexists P1.r1 = 1\n")
    assert t.program.threads[0].code[1:3] == (Commit(), Reconcile())


def test_compound_test_names():
    t = parse_litmus("test MP+Commit+Reconcile\ninit { a=0 }\nthread P1 { }\nexists m[a] = 0\n")
    assert t.name == "MP+Commit+Reconcile"


def test_unicode_not_equal_and_branch():
    t = parse_litmus("test B\nthread P1 { r1 = Ld a; if r1 ≠ 0 exit; St b 1 }\nexists P1.r1 = 0\n")
    assert t.program.threads[0].code[1] == ExitIf(Reg("r1"), "!=", Const(0))
    assert not t.program.is_branch_free


def test_expectations_and_observed():
    t = parse_litmus(SB_SRC + "expect { SC: forbid, WMM-S: allow }\n")
    assert t.expected == {"SC": Verdict.FORBID, "WMM-S": Verdict.ALLOW}
    assert t.observed == (("P1", "r1"), ("P2", "r2"))


def test_computed_address_load():
    t = parse_litmus("test D\ninit { a=0 }\nthread P1 { r1 = Ld a; r2 = Ld r1+a }\nexists P1.r2 = 0\n")
    assert t.program.threads[0].code[1] == Load("r2", BinOp("+", Reg("r1"), AddrRef("a")))


@pytest.mark.parametrize("src, fragment", [
    ("thread P1 { }\nexists m[a] = 0", "expected 'test'"),
    ("test X\nthread P1 { St a 1 }", "missing exists"),
    ("test X\nthread P1 { }\nthread P1 { }\nexists m[a]=0", "duplicate thread"),
    ("test X\nthread P1 { St a r1 }\nexists m[a]=0", "read before it is defined"),
    ("test X\nthread P1 { St a 1 }\nexists P2.r1 = 0", "unknown thread"),
    ("test X\nthread P1 { St a 1 }\nexists P1.r1 = 0", "undefined register"),
    ("test X\nthread P1 { St a 1 }\nexists m[zz] = 0", "unknown address"),
    ("test X\nthread P1 { St a 1 }\nexists m[a]=1\nexpect { ARM: allow }", "ARM"),
    ("test X\nthread P1 { St a 1 $ }\nexists m[a]=1", "unexpected character"),
    ("test X\nthread P1 { St a 1 }\nexists m[a]=1\nexpect { SC: maybe }", "maybe"),
])
def test_syntax_errors(src, fragment):
    with pytest.raises(LitmusSyntaxError) as exc:
        parse_litmus(src)
    assert fragment in str(exc.value)


def test_error_position():
    with pytest.raises(LitmusSyntaxError) as exc:
        parse_litmus("test X\nthread P1 {\n  St a 1;\n  r1 = Ld ;\n}\nexists m[a]=1\n")
    assert exc.value.line == 4


def test_topology_must_cover_threads():
    src = SB_SRC + "topology { seg s1 parent mem; proc P1 at s1 }\n"
    with pytest.raises(TopologyError, match="P2"):
        parse_litmus(src)


addr = st.sampled_from(["a", "b"]).map(AddrRef)
leaf = st.one_of(st.integers(-50, 50).map(Const), st.sampled_from(["r1", "r2"]).map(Reg), addr)
exprs = st.recursive(leaf, lambda sub: st.builds(BinOp, st.sampled_from("+-"), sub, sub), max_leaves=6)


@given(exprs, st.integers(-5, 5), st.integers(-5, 5))
def test_expression_format_round_trip(e, r1, r2):
    enc = {"a": 1024, "b": 1025}
    back = parse_expr(format_expr(e))
    assert eval_expr(back, {"r1": r1, "r2": r2}, enc) == eval_expr(e, {"r1": r1, "r2": r2}, enc)
