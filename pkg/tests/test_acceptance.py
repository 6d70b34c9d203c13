"""Acceptance criteria.  Each check prints one PASS/FAIL line.

Run under pytest (lines appear in the terminal summary) or directly:
``python -m tests.test_acceptance``.
"""

import itertools
import random
import time

from memweave.axiomatic import is_axiomatic_candidate
from memweave.corpus import builtin_corpus, corpus_test
from memweave.explore import enumerate_outcomes, verdict
from memweave.litmus import (
    AddrRef,
    Commit,
    Const,
    Load,
    Program,
    Reconcile,
    Reg,
    Store,
    Thread,
    check_condition,
)
from memweave.mapping import insert_sc_fences
from memweave.models import MACHINES, copy_allowed, shared_topology
from memweave.runner import model_outcomes

from .oracle import interleavings

RESULTS: list[str] = []


def report(n, title, ok, detail=""):
    line = f"criterion {n} {'PASS' if ok else 'FAIL'}: {title}" + (f" ({detail})" if detail else "")
    RESULTS.append(line)
    print(line)
    return ok


def outs(model, test, **kw):
    return model_outcomes(model, test, **kw)


def is_fence_free(p):
    return not any(isinstance(i, (Commit, Reconcile)) for t in p.threads for i in t.code)


# -- 1 -----------------------------------------------------------------------

MINIMUM_GRID = {
    "SBE": {"SC": "forbid", "TSO": "allow", "WMM": "allow"},
    "SB": {"SC": "forbid", "TSO": "allow", "PSO": "allow", "WMM": "allow", "WMM-S": "allow"},
    "MP": {"TSO": "forbid", "PSO": "allow", "WMM": "allow"},
    "MP+Commit+Reconcile": {"WMM": "forbid"},
    "LB": {m: "forbid" for m in ("SC", "TSO", "PSO", "WMM", "WMM-S", "WMM-AX", "FM")},
    "WRC": {"WMM": "forbid", "WMM-S": "allow"},
    "WWC": {"WMM": "forbid", "WMM-S": "allow"},
    "IRIW": {"WMM": "forbid", "WMM-S": "allow"},
    "WRC+Commit": {"WMM-S": "forbid"},
    "WWC+Commit": {"WMM-S": "forbid"},
    "IRIW+Commits": {"WMM-S": "forbid"},
    "MP+Ctrl": {"WMM": "allow"},
    "MP+Mem": {"WMM": "allow"},
    "MP+Data": {"WMM": "allow"},
    "CoRR": {m: "forbid" for m in ("SC", "TSO", "PSO", "WMM", "WMM-S", "WMM-AX", "FM")},
    "OOTA": {m: "forbid" for m in ("SC", "TSO", "PSO", "WMM", "WMM-S", "WMM-AX", "FM")},
}


def check_verdict_grid():
    mismatches, slowest = [], ("", 0.0)
    start = time.perf_counter()
    for e in builtin_corpus():
        t = e.test
        # the shipped expectations must cover the minimum grid
        for m, v in MINIMUM_GRID.get(t.name, {}).items():
            if t.expected.get(m) is None or t.expected[m].value != v:
                mismatches.append(f"{t.name}/{m} expectation missing or wrong")
        t0 = time.perf_counter()
        for m, exp in t.expected.items():
            got = verdict(outs(m, t), t.condition, t.program.encoding)
            if got != exp:
                mismatches.append(f"{t.name}/{m}: {got.value} != {exp.value}")
        dt = time.perf_counter() - t0
        if dt > slowest[1]:
            slowest = (t.name, dt)
    total = time.perf_counter() - start
    missing = set(MINIMUM_GRID) - {e.name for e in builtin_corpus()}
    mismatches += [f"{n} missing" for n in sorted(missing)]
    ok = not mismatches and slowest[1] < 10 and total < 120
    detail = "; ".join(mismatches[:5]) or f"total {total:.1f}s, slowest {slowest[0]} {slowest[1]:.2f}s"
    return report(1, "corpus verdict grid", ok, detail)


# -- 2 -----------------------------------------------------------------------

def check_axiomatic_equivalence():
    bad, checked = [], 0
    for e in builtin_corpus():
        p = e.test.program
        if not p.is_branch_free:
            continue
        if not is_axiomatic_candidate(p):
            bad.append(f"{e.name} exceeds the enumeration bound")
            continue
        checked += 1
        if outs("WMM", e.test) != outs("WMM-AX", e.test):
            bad.append(e.name)
    return report(2, "operational WMM equals axiomatic WMM", not bad and checked > 0,
                  "; ".join(bad) or f"{checked} branch-free tests, set equality")


# -- 3 -----------------------------------------------------------------------

CHAIN = ("SC", "TSO", "PSO", "WMM", "WMM-S")
WITNESSES = {("SC", "TSO"): "SB", ("TSO", "PSO"): "MP", ("PSO", "WMM"): "WRC+noFence", ("WMM", "WMM-S"): "WRC"}


def check_containment_chain():
    bad, checked = [], 0
    for e in builtin_corpus():
        if not is_fence_free(e.test.program):
            continue
        checked += 1
        sets = [outs(m, e.test) for m in CHAIN]
        for (a, b), sa, sb in zip(zip(CHAIN, CHAIN[1:]), sets, sets[1:]):
            if not sa <= sb:
                bad.append(f"{e.name}: {a} not within {b}")
    for (a, b), name in WITNESSES.items():
        t = corpus_test(name)
        if not outs(a, t) < outs(b, t):
            bad.append(f"{name} does not separate {a} from {b}")
        elif name != "WRC" and not is_fence_free(t.program):
            bad.append(f"{name} is not fence-free")
    return report(3, "SC <= TSO <= PSO <= WMM <= WMM-S with strict witnesses", not bad and checked > 0,
                  "; ".join(bad) or f"{checked} fence-free tests; witnesses {', '.join(WITNESSES.values())}")


# -- 4 -----------------------------------------------------------------------

def check_fm_containment():
    topo = shared_topology()
    bad = []
    for e in builtin_corpus():
        if not outs("FM", e.test, topology=topo) <= outs("WMM-S", e.test):
            bad.append(e.name)
    wrc = corpus_test("WRC")
    enc = wrc.program.encoding
    fm_hit = any(check_condition(wrc.condition, o, enc) for o in outs("FM", wrc, topology=topo))
    wmm_hit = any(check_condition(wrc.condition, o, enc) for o in outs("WMM", wrc))
    if not fm_hit or wmm_hit:
        bad.append("WRC outcome r1=2, r2=1, r3=0 not separating FM from WMM")
    return report(4, "FM <= WMM-S on the shared-subtree topology", not bad, "; ".join(bad) or "all corpus tests")


# -- 5 -----------------------------------------------------------------------

def copy_rejection_example():
    a = 1024
    tA, tB, tC, tD = ("P1", 0), ("P2", 1), ("P3", 0), ("P2", 0)
    sbs = (((a, 1, tA),), ((a, 4, tD), (a, 2, tB), (a, 1, tA)), ((a, 3, tC), (a, 2, tB)))
    state = ((), (), sbs, ((), (), ()))
    return not copy_allowed(state, tC, 2, 0) and not copy_allowed(state, tA, 0, 1)


def check_wmms_acyclicity():
    violations, states = [], 0
    for e in builtin_corpus():
        for unrestricted in (False, True):
            if unrestricted and e.test.program.instruction_count > 6:
                continue
            try:
                states += enumerate_outcomes("WMM-S", e.test.program, observed=e.test.observed,
                                             check_invariants=True, unrestricted_copy=unrestricted).states
            except AssertionError as exc:
                violations.append(f"{e.name}: {exc}")
    ok = not violations and copy_rejection_example()
    return report(5, "WMM-S coherence graph stays acyclic", ok,
                  "; ".join(violations) or f"{states} states checked, copy-rejection example reproduced")


# -- 6 -----------------------------------------------------------------------

def check_sc_recovery():
    bad = []
    for name in ("SB", "MP", "LB", "CoRR", "SBE"):
        t = corpus_test(name)
        fenced = insert_sc_fences(t.program)
        sc = outs("SC", t)
        for m in ("WMM", "WMM-S"):
            if enumerate_outcomes(m, fenced, observed=t.observed) != sc:
                bad.append(f"{name}/{m}")
    return report(6, "SC fences recover SC under WMM and WMM-S", not bad, "; ".join(bad) or "SB, MP, LB, CoRR, SBE")


# -- 7 -----------------------------------------------------------------------

ALPHABET = (
    Store(AddrRef("a"), Const(1)),
    Store(AddrRef("b"), Reg("r1")),
    Load("r1", AddrRef("a")),
    Load("r2", AddrRef("b")),
    Commit(),
)


def exhaustive_small_programs(max_total=4):
    for total in range(max_total + 1):
        for split in range(total + 1):
            for a in itertools.product(ALPHABET, repeat=split):
                for b in itertools.product(ALPHABET, repeat=total - split):
                    yield Program((Thread("P1", a), Thread("P2", b)), (("a", 0), ("b", 0)))


def random_programs(n, seed=7):
    rng = random.Random(seed)
    regs = ("r1", "r2")
    def ins():
        k = rng.randrange(4)
        addr = AddrRef(rng.choice("ab"))
        if k == 0:
            return Load(rng.choice(regs), addr)
        if k == 1:
            return Store(addr, rng.choice([Const(rng.randrange(3)), Reg(rng.choice(regs))]))
        return rng.choice([Commit(), Reconcile()])
    for _ in range(n):
        total = rng.randint(0, 6)
        cuts = sorted(rng.randint(0, total) for _ in range(2))
        lens = (cuts[0], cuts[1] - cuts[0], total - cuts[1])
        yield Program(tuple(Thread(f"P{i + 1}", tuple(ins() for _ in range(k))) for i, k in enumerate(lens)),
                      (("a", 0), ("b", 0)))


def check_explorer():
    bad, checked = [], 0
    corpus_small = [e.test.program for e in builtin_corpus() if e.test.program.instruction_count <= 6]
    for p in itertools.chain(corpus_small, exhaustive_small_programs(), random_programs(400)):
        checked += 1
        if enumerate_outcomes("SC", p) != interleavings(p):
            bad.append(str(p))
            break
    for e in builtin_corpus():
        for m in MACHINES:
            kw = {"topology": e.test.topology} if m == "FM" and e.test.topology else {}
            o = dict(observed=e.test.observed, **kw)
            if enumerate_outcomes(m, e.test.program, order="dfs", **o) != \
                    enumerate_outcomes(m, e.test.program, order="bfs", **o):
                bad.append(f"dfs/bfs {e.name}/{m}")
    return report(7, "explorer matches brute force; DFS equals BFS", not bad,
                  "; ".join(bad)[:200] or f"{checked} small programs, full corpus under {len(MACHINES)} machines")


CHECKS = [check_verdict_grid, check_axiomatic_equivalence, check_containment_chain, check_fm_containment,
          check_wmms_acyclicity, check_sc_recovery, check_explorer]


def test_criterion_1_verdict_grid():
    assert check_verdict_grid()


def test_criterion_2_axiomatic_equivalence():
    assert check_axiomatic_equivalence()


def test_criterion_3_containment_chain():
    assert check_containment_chain()


def test_criterion_4_fm_containment():
    assert check_fm_containment()


def test_criterion_5_wmms_acyclicity():
    assert check_wmms_acyclicity()


def test_criterion_6_sc_recovery():
    assert check_sc_recovery()


def test_criterion_7_explorer_oracle():
    assert check_explorer()


if __name__ == "__main__":
    import sys

    sys.exit(0 if all([c() for c in CHECKS]) else 1)
