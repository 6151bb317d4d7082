"""Mealy automata that observe co-located collective members.

Indices of automata are 0-based in the Python API; rendered output
(traces, reports, DSL) uses 1-based indices.

An observation is a tuple of length ``m`` whose entry ``j`` is the state
of automaton ``j`` when it shares the observer's vertex, and ``None``
(the blank symbol) otherwise, including at the observer's own slot.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import DirectionError, NoMatchingRule, ResourceLimit
from .groups import Direction, GroupBackend, GroupElement

Observation = tuple  # tuple[int | None, ...]

MAX_OBSERVATION_CLASSES = 1_000_000


class Slot(enum.Enum):
    THETA = "theta"
    ANY = "any"
    SELF = "self"

    def __repr__(self) -> str:
        return self.name


THETA = Slot.THETA
ANY = Slot.ANY
SELF = Slot.SELF


@dataclass(frozen=True, slots=True)
class Exact:
    """Pattern slot matching exactly one state of the observed automaton."""

    state: int


PatternSlot = Slot | Exact


def slot_matches(p: PatternSlot, seen: int | None) -> bool:
    if p is ANY:
        return True
    if p is THETA or p is SELF:
        return seen is None
    return seen == p.state


@dataclass(frozen=True)
class TransitionRule:
    state: int
    pattern: tuple[PatternSlot, ...]
    next_state: int
    move: Direction

    def matches(self, state: int, obs: Observation) -> bool:
        return state == self.state and all(map(slot_matches, self.pattern, obs))


@dataclass(frozen=True)
class Automaton:
    """A Mealy machine with first-match rules over observation patterns."""

    name: str
    state_count: int
    rules: tuple[TransitionRule, ...]
    _memo: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))

    @property
    def arity(self) -> int | None:
        return len(self.rules[0].pattern) if self.rules else None

    def transition(self, state: int, obs: Observation) -> tuple[int, Direction]:
        key = (state, obs)
        hit = self._memo.get(key)
        if hit is None:
            hit = lookup_transition(self, state, obs)
            self._memo[key] = hit
        return hit


def lookup_transition(aut: Automaton, state: int, obs: Observation) -> tuple[int, Direction]:
    """Next state and move from the first rule matching ``(state, obs)``."""
    for rule in aut.rules:
        if rule.matches(state, obs):
            return rule.next_state, rule.move
    raise NoMatchingRule(aut.name, state, obs)


@dataclass(frozen=True)
class Collective:
    members: tuple[Automaton, ...]
    start_states: tuple[int, ...]
    start_positions: tuple[GroupElement, ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        object.__setattr__(self, "start_states", tuple(self.start_states))
        object.__setattr__(self, "start_positions", tuple(self.start_positions))

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def max_states(self) -> int:
        return max(a.state_count for a in self.members)


def partition_from_positions(positions: Sequence[GroupElement]) -> tuple[int, ...]:
    """``leaders[i]`` is the smallest index sharing the vertex of automaton ``i``."""
    first: dict = {}
    return tuple(first.setdefault(v, i) for i, v in enumerate(positions))


def observe(i: int, states: Sequence[int], leaders: Sequence[int]) -> Observation:
    li = leaders[i]
    return tuple(
        q if (leaders[j] == li and j != i) else None for j, q in enumerate(states)
    )


def encode_collective_state(states: Sequence[int], leaders: Sequence[int]) -> tuple:
    return (tuple(states), tuple(leaders))


def _slot_classes(rules: Sequence[TransitionRule], j: int, state_count: int) -> list[int | None]:
    """Representative observed values for slot ``j``.

    States never named by an ``Exact`` slot behave identically under every
    rule, so one of them stands in for all.
    """
    named = sorted({r.pattern[j].state for r in rules
                    if isinstance(r.pattern[j], Exact) and r.pattern[j].state < state_count})
    reps: list[int | None] = [None, *named]
    spare = next((q for q in range(state_count) if q not in named), None)
    if spare is not None:
        reps.append(spare)
    return reps


def uncovered_observations(aut: Automaton, index: int, state_counts: Sequence[int]) -> list[tuple[int, Observation]]:
    """``(state, observation)`` pairs for which no rule of ``aut`` fires."""
    m = len(state_counts)
    missing = []
    for q in range(aut.state_count):
        rules = [r for r in aut.rules if r.state == q]
        axes = [
            [None] if j == index else _slot_classes(rules, j, state_counts[j])
            for j in range(m)
        ]
        if math.prod(map(len, axes)) > MAX_OBSERVATION_CLASSES:
            raise ResourceLimit(f"too many observation classes to check state {q}")
        for obs in itertools.product(*axes):
            if not any(all(map(slot_matches, r.pattern, obs)) for r in rules):
                missing.append((q, tuple(obs)))
    return missing


def admissibility_check(c: Collective, backend: GroupBackend) -> list[str]:
    """Every reason ``c`` is not an admissible collective on ``backend``.

    An empty list means the collective is valid.
    """
    problems: list[str] = []
    m = c.size
    if m < 1:
        return ["collective has no members"]
    if len(c.start_states) != m or len(c.start_positions) != m:
        problems.append("start vectors do not match the collective size")
    counts = [a.state_count for a in c.members]
    for i, aut in enumerate(c.members):
        label = f"automaton {i + 1} ({aut.name})"
        if aut.state_count < 1:
            problems.append(f"{label}: needs at least one state")
            continue
        if i < len(c.start_states) and not 0 <= c.start_states[i] < aut.state_count:
            problems.append(f"{label}: start state {c.start_states[i]} out of range")
        shape_ok = True
        for k, r in enumerate(aut.rules):
            where = f"{label} rule {k + 1}"
            if len(r.pattern) != m:
                problems.append(f"{where}: pattern arity {len(r.pattern)} != {m}")
                shape_ok = False
                continue
            if not 0 <= r.state < aut.state_count:
                problems.append(f"{where}: state {r.state} out of range")
            if not 0 <= r.next_state < aut.state_count:
                problems.append(f"{where}: next state {r.next_state} out of range")
            try:
                backend.check_direction(r.move)
            except DirectionError:
                problems.append(f"{where}: direction out of range ({r.move})")
            for j, p in enumerate(r.pattern):
                if j == i and p is not SELF:
                    problems.append(f"{where}: own slot {j + 1} must be the self slot")
                elif j != i and p is SELF:
                    problems.append(f"{where}: self slot used at foreign slot {j + 1}")
                elif isinstance(p, Exact) and not 0 <= p.state < counts[j]:
                    problems.append(f"{where}: slot {j + 1} state {p.state} out of range")
        if shape_ok:
            try:
                missing = uncovered_observations(aut, i, counts)
            except ResourceLimit as exc:
                problems.append(f"{label}: {exc}")
                continue
            if missing:
                q, obs = missing[0]
                problems.append(
                    f"{label}: not total, no rule for state {q} observing "
                    + render_observation(obs)
                )
    return problems


def render_observation(obs: Observation) -> str:
    return "(" + ", ".join("theta" if x is None else str(x) for x in obs) + ")"


def catch_all(m: int, index: int) -> tuple[PatternSlot, ...]:
    """Pattern matching every observation of automaton ``index`` in a size-``m`` collective."""
    return tuple(SELF if j == index else ANY for j in range(m))


def pattern(m: int, index: int, **slots: PatternSlot) -> tuple[PatternSlot, ...]:
    """Build a pattern from 1-based keyword slots, e.g. ``pattern(3, 0, s3=Exact(0))``."""
    base = list(catch_all(m, index))
    for key, value in slots.items():
        base[int(key.lstrip("s")) - 1] = value
    return tuple(base)
