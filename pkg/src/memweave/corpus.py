"""Built-in litmus tests, shipped as ``.litmus`` files in ``memweave/corpus``."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .litmus import LitmusTest
from .parser import parse_litmus


@dataclass(frozen=True)
class CorpusEntry:
    test: LitmusTest
    provenance: str
    family: str

    @property
    def name(self) -> str:
        return self.test.name


# name -> (family, why each expectation holds)
_NOTES = {
    "SBE": ("SBE", "SC forbids; TSO and WMM allow because each load of the own store is forwarded from the local store buffer before it drains."),
    "SBE+Reconciles": ("SBE", "WMM still allows SBE with Reconcile between the Ld-Ld pairs: forwarding from the local buffer is not stopped by a Reconcile."),
    "WRC": ("WRC", "WMM forbids with Reconcile as the load-load fence since stores are multi-copy atomic; WMM-S allows once a store is copied early to P2; FM allows when P1 and P2 share a segment."),
    "WRC+Commit": ("WRC", "A Commit between P2's load and store makes the fence cumulative: WMM-S forbids because the copied store must reach memory before P2's store issues."),
    "WRC+noFence": ("WRC", "Without the load-load fence P3 may read the stale a=0 from its invalidation buffer; PSO, which never reorders loads, forbids."),
    "WWC": ("WWC", "Final m[a]=2 with r1=2 and r2=1 needs P1's store to be visible to P2 before P3; WMM forbids, WMM-S and FM allow."),
    "WWC+Commit": ("WWC", "A Commit between P2's load and store forces the copied store to memory first: forbidden everywhere."),
    "IRIW": ("IRIW", "The two readers disagree on the store order; multi-copy atomic WMM forbids with Reconciles, WMM-S and FM with shared subtrees allow."),
    "IRIW+Commits": ("IRIW", "A Commit after each first load makes the observed store globally visible before the second load: forbidden everywhere."),
    "SB": ("SB", "SC forbids; every buffered model allows because a store can wait in the buffer past a later load."),
    "SB+Fence": ("SB", "Commit;Reconcile between each store and the following load restores SC: forbidden everywhere."),
    "MP": ("MP", "SC and TSO forbid; PSO reorders the two stores and WMM can also reorder the loads."),
    "MP+Commit": ("MP", "With the stores ordered by Commit, WMM still allows because P2 may read the stale a=0 from its invalidation buffer."),
    "MP+Commit+Reconcile": ("MP", "Adding Reconcile between the loads clears the stale value: forbidden everywhere."),
    "LB": ("LB", "No implemented model reorders a load with a later store, so load buffering is forbidden everywhere."),
    "MP+Ctrl": ("MP+dependency", "A control dependency does not order the loads in WMM: allowed."),
    "MP+Mem": ("MP+dependency", "A potential memory dependency through a store to a computed address does not order the loads in WMM: allowed."),
    "MP+Data": ("MP+dependency", "WMM enforces no dependency ordering: a load whose address depends on an earlier load may still read a stale value."),
    "CoRR": ("CoRR", "Models with per-location SC forbid a later read of one location seeing an older value."),
    "OOTA": ("OOTA", "Values cannot appear out of thin air: forbidden everywhere."),
    "RMO-dep": ("RMO-dep", "Speculative load execution plus store forwarding breaks the transitive dependency; WMM and WMM-S, which keep no dependency order, allow."),
    "LockCounter": ("lock", "Reconcile after acquire and Commit before release make the protected counter behave as under SC: the lost update is forbidden."),
}


def _corpus_dir():
    return resources.files("memweave") / "corpus"


@lru_cache(maxsize=None)
def builtin_corpus() -> tuple[CorpusEntry, ...]:
    entries = []
    for path in sorted(_corpus_dir().iterdir(), key=lambda p: p.name):
        if not path.name.endswith(".litmus"):
            continue
        test = parse_litmus(path.read_text())
        family, note = _NOTES.get(test.name, (test.name.split("+")[0], ""))
        entries.append(CorpusEntry(test, note, family))
    return tuple(entries)


def corpus_test(name: str) -> LitmusTest:
    for e in builtin_corpus():
        if e.name == name:
            return e.test
    raise KeyError(name)


def corpus_path(name: str):
    """Filesystem location of a shipped test, for tools that want the file."""
    return _corpus_dir() / f"{name}.litmus"
