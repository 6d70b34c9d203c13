"""Exhaustive litmus-test exploration for weak memory models.

Operational machines for SC, TSO, PSO, WMM, WMM-S and the flowing model
(FM), plus an axiomatic checker for WMM.
"""

from .axiomatic import axiomatic_outcomes
from .corpus import CorpusEntry, builtin_corpus, corpus_test
from .explore import Limits, OutcomeSet, Trace, enumerate_outcomes, verdict, witness_trace
from .litmus import MODEL_IDS, LitmusTest, Outcome, Program, Verdict, check_condition
from .mapping import CppKind, CppOp, insert_sc_fences, map_cpp
from .models import MACHINES, make_machine
from .parser import format_litmus, load_litmus, parse_litmus
from .runner import model_outcomes

__all__ = [
    "MODEL_IDS", "MACHINES", "LitmusTest", "Program", "Outcome", "Verdict", "OutcomeSet", "Trace", "Limits",
    "CorpusEntry", "CppKind", "CppOp",
    "parse_litmus", "load_litmus", "format_litmus", "check_condition",
    "make_machine", "enumerate_outcomes", "verdict", "witness_trace", "model_outcomes",
    "axiomatic_outcomes", "builtin_corpus", "corpus_test", "insert_sc_fences", "map_cpp",
]
