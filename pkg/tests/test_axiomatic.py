import itertools

import pytest
from hypothesis import given, settings

from memweave.axiomatic import (
    COM,
    LD,
    ORDER_TABLE,
    REC,
    ST,
    Event,
    NotBranchFree,
    TooLarge,
    UnresolvedAddress,
    axiomatic_outcomes,
    events,
    is_axiomatic_candidate,
    linear_extensions,
    order,
    resolve_execution,
)
from memweave.explore import enumerate_outcomes
from memweave.parser import parse_litmus

from .conftest import regs
from .test_explore import small_programs


def ev(kind, addr=None):
    return Event((0, 0), kind, None, addr)


def test_order_table_cells():
    expected = {
        LD: {LD: "a=b", ST: True, REC: True, COM: True},
        ST: {LD: False, ST: "a=b", REC: False, COM: True},
        REC: {LD: True, ST: True, REC: True, COM: True},
        COM: {LD: False, ST: True, REC: True, COM: True},
    }
    assert len(ORDER_TABLE) == 16
    for x, row in expected.items():
        for y, cell in row.items():
            assert ORDER_TABLE[(x, y)] == cell, (x, y)


def test_order_examples():
    assert order(ev(ST, 1024), ev(LD, 1025)) is False
    assert order(ev(REC), ev(LD, 1025)) is True
    assert order(ev(LD, 1024), ev(LD, 1024)) is True
    assert order(ev(LD, 1024), ev(LD, 1025)) is False
    assert order(ev(ST, 1024), ev(ST, 1024)) is True


def test_order_same_address_cell_needs_addresses():
    with pytest.raises(UnresolvedAddress):
        order(ev(LD, None), ev(LD, 1024))


def test_lb_cycle_impossible(get):
    t = get("LB")
    assert (1, 1) not in regs(axiomatic_outcomes(t.program), ("P1", "r1"), ("P2", "r2"))


def test_sb_hand_checked_memory_order(sb):
    # I1 St a, I2 Ld b, I3 St b, I4 Ld a; mo = I2, I4, I1, I3
    mo = ((0, 1), (1, 1), (0, 0), (1, 0))
    ex = resolve_execution(sb.program, mo)
    assert ex is not None
    assert ex.rf == {(0, 1): None, (1, 1): None}
    assert ex.registers[0]["r1"] == 0 and ex.registers[1]["r2"] == 0
    assert ex.final_memory(sb.program.initial_memory()) == {1024: 1, 1025: 1}


def test_same_address_loads_keep_program_order():
    t = parse_litmus("test S\ninit { a=0 }\nthread P1 { r1 = Ld a; r2 = Ld a }\nexists P1.r1 = 0\n")
    assert resolve_execution(t.program, ((0, 1), (0, 0))) is None


def test_single_thread_reads_own_store():
    t = parse_litmus("test S\ninit { a=0 }\nthread P1 { St a 1; r1 = Ld a }\nexists P1.r1 = 1\n")
    seen = 0
    for mo in itertools.permutations([(0, 0), (0, 1)]):
        ex = resolve_execution(t.program, mo)
        if ex is not None:
            seen += 1
            assert ex.registers[0]["r1"] == 1
    assert seen == 2


def test_sb_matches_operational(sb):
    ax = axiomatic_outcomes(sb.program)
    assert regs(ax, ("P1", "r1"), ("P2", "r2")) == {(0, 0), (0, 1), (1, 0), (1, 1)}
    assert ax == enumerate_outcomes("WMM", sb.program)


def test_mp_allows_reordering(get):
    assert (1, 0) in regs(axiomatic_outcomes(get("MP").program), ("P2", "r1"), ("P2", "r2"))


def test_no_thin_air(get):
    outs = axiomatic_outcomes(get("OOTA").program)
    assert (42, 42) not in regs(outs, ("P1", "r1"), ("P2", "r2"))


def test_computed_addresses(get):
    t = get("MP+Data")
    assert axiomatic_outcomes(t.program, t.observed) == enumerate_outcomes("WMM", t.program, observed=t.observed)


def test_rejects_branches_and_large_programs(get):
    with pytest.raises(NotBranchFree):
        events(get("MP+Ctrl").program)
    with pytest.raises(TooLarge):
        axiomatic_outcomes(get("IRIW+Commits").program, bound=5)
    assert not is_axiomatic_candidate(get("MP+Ctrl").program)


def test_linear_extensions_respect_static_order(sb):
    evs = events(sb.program)
    exts = list(linear_extensions(evs))
    # no statically ordered pairs in SB, so every permutation
    assert len(exts) == 24
    t = parse_litmus("test L\ninit { a=0, b=0 }\nthread P1 { r1 = Ld a; St b 1 }\nexists P1.r1 = 0\n")
    assert list(linear_extensions(events(t.program))) == [((0, 0), (0, 1))]


def test_pruned_equals_unpruned_on_corpus(corpus):
    for e in corpus:
        p = e.test.program
        if is_axiomatic_candidate(p, 8):
            assert axiomatic_outcomes(p, e.test.observed, bound=8) == \
                axiomatic_outcomes(p, e.test.observed, bound=8, prune=False), e.name


@settings(max_examples=120, deadline=None)
@given(small_programs())
def test_pruned_equals_unpruned_random(p):
    if is_axiomatic_candidate(p, 8):
        assert axiomatic_outcomes(p, bound=8) == axiomatic_outcomes(p, bound=8, prune=False)


@settings(max_examples=300, deadline=None)
@given(small_programs())
def test_matches_operational_wmm_random(p):
    if is_axiomatic_candidate(p, 8):
        assert axiomatic_outcomes(p, bound=8) == enumerate_outcomes("WMM", p)
