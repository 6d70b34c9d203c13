"""Exhaustive exploration of an abstract machine's transition graph."""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Union

from .litmus import Condition, Outcome, Program, Verdict, check_condition
from .models import Machine, Transition, make_machine

DEFAULT_MAX_STATES = 5_000_000


class ExplorationError(RuntimeError):
    pass


class StateLimitExceeded(ExplorationError):
    pass


class DepthLimitExceeded(ExplorationError):
    pass


class StuckState(ExplorationError):
    """A non-final state has no enabled transition: a machine bug."""


def default_max_states() -> int:
    env = os.environ.get("MEMWEAVE_MAX_STATES")
    return int(env) if env else DEFAULT_MAX_STATES


@dataclass(frozen=True)
class Limits:
    max_states: Optional[int] = None
    max_depth: Optional[int] = None

    @property
    def states(self) -> int:
        return self.max_states if self.max_states is not None else default_max_states()


@dataclass
class OutcomeSet:
    outcomes: frozenset
    states: int = 0
    transitions: int = 0
    max_frontier: int = 0
    stalls: int = 0

    def __iter__(self) -> Iterator[Outcome]:
        return iter(sorted(self.outcomes, key=str))

    def __len__(self) -> int:
        return len(self.outcomes)

    def __contains__(self, o) -> bool:
        return o in self.outcomes

    def __le__(self, other) -> bool:
        return self.outcomes <= _as_set(other)

    def __lt__(self, other) -> bool:
        return self.outcomes < _as_set(other)

    def __eq__(self, other) -> bool:
        if isinstance(other, (OutcomeSet, set, frozenset)):
            return self.outcomes == _as_set(other)
        return NotImplemented

    __hash__ = None


def _as_set(x) -> frozenset:
    return x.outcomes if isinstance(x, OutcomeSet) else frozenset(x)


@dataclass
class Trace:
    """Transitions from the initial state, each paired with the hash of its target state."""

    steps: list[tuple[Transition, int]] = field(default_factory=list)
    outcome: Optional[Outcome] = None

    def __len__(self) -> int:
        return len(self.steps)

    def transitions(self) -> list[Transition]:
        return [t for t, _ in self.steps]

    def render(self) -> list[str]:
        return [f"{i}: {t}" for i, (t, _) in enumerate(self.steps, 1)]

    def replay(self, machine: Machine):
        state = machine.initial_state()
        for t, h in self.steps:
            state = machine.apply(state, t)
            if hash(state) != h:
                raise ExplorationError(f"replay diverged at {t}")
        return state


MachineLike = Union[str, Machine, type]


def _machine(machine: MachineLike, program: Optional[Program], **kw) -> Machine:
    if isinstance(machine, Machine):
        return machine
    if isinstance(machine, str):
        return make_machine(machine, program, **kw)
    topology = kw.pop("topology", None)
    if topology is not None:
        kw["topology"] = topology
    return machine(program, **kw)


def enumerate_outcomes(
    machine: MachineLike,
    program: Optional[Program] = None,
    limits: Limits = Limits(),
    *,
    order: str = "dfs",
    check_invariants: bool = False,
    **machine_options,
) -> OutcomeSet:
    """Every ``observe(final)`` over the states reachable from the initial state.

    ``machine`` is a :class:`Machine`, a machine class, or a model id; the
    latter two are instantiated on ``program`` with ``machine_options``.
    """
    m = _machine(machine, program, **machine_options)
    max_states = limits.states
    start = m.initial_state()
    visited = {start}
    frontier = deque([(start, 0)])
    pop = frontier.pop if order == "dfs" else frontier.popleft
    outcomes = set()
    fired = 0
    widest = 1
    while frontier:
        state, depth = pop()
        if check_invariants:
            m.check_invariants(state)
        succs = m.successors(state)
        if m.is_final(state):
            outcomes.add(m.observe(state))
        elif not succs:
            raise StuckState(f"{m.model_id}: no enabled transition in non-final state {state!r}")
        if limits.max_depth is not None and succs and depth >= limits.max_depth:
            raise DepthLimitExceeded(f"{m.model_id}: depth limit {limits.max_depth} exceeded")
        for _, nxt in succs:
            fired += 1
            if nxt not in visited:
                visited.add(nxt)
                if len(visited) > max_states:
                    raise StateLimitExceeded(f"{m.model_id}: more than {max_states} states")
                frontier.append((nxt, depth + 1))
        widest = max(widest, len(frontier))
    return OutcomeSet(frozenset(outcomes), len(visited), fired, widest)


def verdict(outcomes: Iterable[Outcome], cond: Condition, encoding=None) -> Verdict:
    return Verdict.ALLOW if any(check_condition(cond, o, encoding) for o in outcomes) else Verdict.FORBID


def witness_trace(
    machine: MachineLike,
    program: Optional[Program],
    cond: Condition,
    limits: Limits = Limits(),
    **machine_options,
) -> Optional[Trace]:
    """A shortest trace (breadth-first) to a final state satisfying ``cond``."""
    m = _machine(machine, program, **machine_options)
    enc = m.program.encoding
    start = m.initial_state()
    parent: dict = {start: None}
    frontier = deque([start])
    while frontier:
        state = frontier.popleft()
        if m.is_final(state):
            outcome = m.observe(state)
            if check_condition(cond, outcome, enc):
                return _build_trace(parent, state, outcome)
        for t, nxt in m.successors(state):
            if nxt not in parent:
                parent[nxt] = (state, t)
                if len(parent) > limits.states:
                    raise StateLimitExceeded(f"{m.model_id}: more than {limits.states} states")
                frontier.append(nxt)
    return None


def _build_trace(parent, state, outcome) -> Trace:
    steps = []
    while parent[state] is not None:
        prev, t = parent[state]
        steps.append((t, hash(state)))
        state = prev
    steps.reverse()
    return Trace(steps, outcome)
