"""Run litmus tests under models and collect report records."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from .axiomatic import NotBranchFree, TooLarge, axiomatic_outcomes
from .explore import ExplorationError, Limits, OutcomeSet, enumerate_outcomes, verdict, witness_trace
from .litmus import LitmusTest, Verdict

AXIOMATIC = "WMM-AX"


class Skip(Exception):
    """The model cannot handle this test (e.g. branches under WMM-AX)."""


def model_outcomes(model: str, test: LitmusTest, limits: Limits = Limits(), topology=None,
                   check_invariants: bool = False) -> OutcomeSet:
    if model == AXIOMATIC:
        try:
            return axiomatic_outcomes(test.program, test.observed)
        except (NotBranchFree, TooLarge) as e:
            raise Skip(str(e)) from None
    opts = {}
    if model == "FM":
        topo = topology or test.topology
        if topo is not None:
            opts["topology"] = topo
    return enumerate_outcomes(model, test.program, limits, observed=test.observed,
                              check_invariants=check_invariants, **opts)


@dataclass
class ModelResult:
    test: str
    model: str
    status: str  # ok | mismatch | skipped | error
    verdict: Optional[str] = None
    expected: Optional[str] = None
    match: Optional[bool] = None
    outcomes: int = 0
    states: int = 0
    seconds: float = 0.0
    message: Optional[str] = None
    trace: Optional[list] = None
    outcome_list: list = field(default_factory=list)

    def to_dict(self, with_outcomes: bool = False) -> dict:
        d = {k: getattr(self, k) for k in
             ("test", "model", "status", "verdict", "expected", "match", "outcomes", "states", "seconds")}
        d["seconds"] = round(self.seconds, 4)
        if self.message is not None:
            d["message"] = self.message
        if self.trace is not None:
            d["trace"] = self.trace
        if with_outcomes:
            d["outcome_list"] = self.outcome_list
        return d


def run_test(test: LitmusTest, model: str, limits: Limits = Limits(), topology=None,
             trace: bool = False) -> ModelResult:
    exp = test.expected.get(model)
    res = ModelResult(test.name, model, "ok", expected=exp.value if exp else None)
    start = time.perf_counter()
    try:
        outs = model_outcomes(model, test, limits, topology)
    except Skip as e:
        res.status, res.message = "skipped", str(e)
        return res
    except ExplorationError as e:
        res.status, res.message = "error", str(e)
        res.seconds = time.perf_counter() - start
        return res
    v = verdict(outs, test.condition, test.program.encoding)
    res.seconds = time.perf_counter() - start
    res.verdict = v.value
    res.outcomes, res.states = len(outs), outs.states
    res.outcome_list = [str(o) for o in outs]
    if exp is not None:
        res.match = v == exp
        if not res.match:
            res.status = "mismatch"
    if trace and v == Verdict.ALLOW and model != AXIOMATIC:
        opts = {}
        topo = topology or test.topology
        if model == "FM" and topo is not None:
            opts["topology"] = topo
        w = witness_trace(model, test.program, test.condition, limits, observed=test.observed, **opts)
        res.trace = w.render() if w else None
    return res
