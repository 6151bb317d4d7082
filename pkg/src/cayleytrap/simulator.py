"""Synchronous simulation, cycle detection and trap certification.

The dynamics commute with left translation of every position by a common
group element, so cycle detection runs on configurations normalized by the
first automaton's position. A quotient cycle of length ``T_q`` translates
the whole configuration by a conjugate of the holonomy ``h``; finite order
of ``h`` means the raw configuration is periodic and the visited set is
finite, infinite order means the collective drifts forever.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .automata import Collective, observe, partition_from_positions
from .errors import BudgetExhausted, CapExceeded, InvariantViolation
from .groups import FreeAbelian, FreeGroup, GroupBackend, GroupElement


@dataclass(frozen=True)
class Configuration:
    states: tuple[int, ...]
    positions: tuple[GroupElement, ...]
    time: int = 0

    @property
    def pair(self) -> tuple:
        """The time-free part that determines the future."""
        return (self.states, self.positions)


@dataclass(frozen=True)
class NormalizedConfiguration:
    states: tuple[int, ...]
    leaders: tuple[int, ...]
    relative_positions: tuple[GroupElement, ...]


class Verdict(str, enum.Enum):
    FINITE_EXPLORATION = "FiniteExploration"
    DRIFT_UNBOUNDED = "DriftUnbounded"
    BUDGET_EXHAUSTED = "BudgetExhausted"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Cycle:
    """Minimal tail ``U`` and period ``T_q`` of the normalized dynamics."""

    U: int
    T_q: int
    holonomy: GroupElement
    at_U: Configuration
    steps_used: int


@dataclass
class ExplorationReport:
    verdict: Verdict
    U: int | None = None
    T_state: int | None = None
    T_quotient: int | None = None
    T_pair: int | None = None
    holonomy: GroupElement | None = None
    holonomy_order: int | float | None = None
    visited_count: int = 0
    steps_used: int = 0
    visited: frozenset = field(default_factory=frozenset, repr=False, compare=False)


def initial_configuration(collective: Collective) -> Configuration:
    return Configuration(collective.start_states, collective.start_positions, 0)


def step(backend: GroupBackend, collective: Collective, config: Configuration) -> Configuration:
    """Advance every automaton once, all reading the time-t configuration."""
    states, positions = config.states, config.positions
    leaders = partition_from_positions(positions)
    new_states = []
    new_positions = []
    for i, aut in enumerate(collective.members):
        q, d = aut.transition(states[i], observe(i, states, leaders))
        new_states.append(q)
        new_positions.append(backend.apply(positions[i], d))
    return Configuration(tuple(new_states), tuple(new_positions), config.time + 1)


def iterate(backend: GroupBackend, collective: Collective, config: Configuration) -> Iterator[Configuration]:
    """Yield ``config`` and then every successor, forever."""
    while True:
        yield config
        config = step(backend, collective, config)


@dataclass
class Trace:
    configurations: list[Configuration]
    visited_by: list[set]

    @property
    def visited(self) -> set:
        return set().union(*self.visited_by)


def run_trace(backend: GroupBackend, collective: Collective, steps: int,
              start: Configuration | None = None, keep: bool = True) -> Trace:
    """Simulate ``steps`` steps, recording per-automaton visited vertices.

    The start configuration counts as visited. With ``keep=False`` only the
    first and last configurations are retained.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    config = start if start is not None else initial_configuration(collective)
    visited_by = [{v} for v in config.positions]
    configs = [config]
    for _ in range(steps):
        config = step(backend, collective, config)
        for seen, v in zip(visited_by, config.positions):
            seen.add(v)
        if keep:
            configs.append(config)
    if not keep and steps:
        configs.append(config)
    return Trace(configs, visited_by)


def normalize(backend: GroupBackend, config: Configuration) -> NormalizedConfiguration:
    base = backend.inverse(config.positions[0])
    rel = tuple(backend.multiply(base, v) for v in config.positions)
    return NormalizedConfiguration(config.states, partition_from_positions(config.positions), rel)


def _key(backend: GroupBackend, config: Configuration) -> tuple:
    base = backend.inverse(config.positions[0])
    return (config.states, tuple(backend.multiply(base, v) for v in config.positions))


def detect_cycle(backend: GroupBackend, collective: Collective,
                 start: Configuration | None, budget: int) -> Cycle:
    """Brent's cycle detection on the normalized dynamics.

    Raises BudgetExhausted when no quotient repeat shows up within
    ``budget`` steps. At most about ``3 * budget`` steps are evaluated.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    x0 = start if start is not None else initial_configuration(collective)
    # Leaders are a function of the relative positions, so the key omits them.
    power = lam = 1
    tortoise_key = _key(backend, x0)
    hare = step(backend, collective, x0)
    used = 1
    while _key(backend, hare) != tortoise_key:
        if used >= budget:
            raise BudgetExhausted(budget, used)
        if power == lam:
            tortoise_key = _key(backend, hare)
            power *= 2
            lam = 0
        hare = step(backend, collective, hare)
        used += 1
        lam += 1

    tortoise = hare = x0
    for _ in range(lam):
        hare = step(backend, collective, hare)
    used += lam
    mu = 0
    while _key(backend, tortoise) != _key(backend, hare):
        tortoise = step(backend, collective, tortoise)
        hare = step(backend, collective, hare)
        mu += 1
    used += 2 * mu
    h = backend.multiply(backend.inverse(tortoise.positions[0]), hare.positions[0])
    return Cycle(mu, lam, h, tortoise, used)


def holonomy_order(backend: GroupBackend, h: GroupElement, cap: int) -> int | float:
    """Order of ``h``; ``math.inf`` for non-identity elements of free backends.

    Raises CapExceeded when no power up to ``cap`` is the identity.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    e = backend.identity()
    if h == e:
        return 1
    if isinstance(backend, (FreeAbelian, FreeGroup)):
        return math.inf
    x = h
    for k in range(2, cap + 1):
        x = backend.multiply(x, h)
        if x == e:
            M = backend.exponent
            if M is not None and M % k:
                raise InvariantViolation(f"order {k} does not divide exponent {M}")
            return k
    raise CapExceeded("holonomy order", cap)


def _minimal_period(seq: Sequence) -> int:
    """Smallest ``p`` dividing ``len(seq)`` such that ``seq`` is ``p``-periodic cyclically."""
    n = len(seq)
    for p in range(1, n + 1):
        if n % p == 0 and all(seq[t] == seq[t - p] for t in range(p, n)):
            return p
    return n


def certify(backend: GroupBackend, collective: Collective,
            start: Configuration | None = None, budget: int = 10_000,
            order_cap: int = 1_000_000) -> ExplorationReport:
    """Decide whether the collective explores finitely many vertices."""
    x0 = start if start is not None else initial_configuration(collective)
    try:
        cyc = detect_cycle(backend, collective, x0, budget)
    except BudgetExhausted as exc:
        return ExplorationReport(Verdict.BUDGET_EXHAUSTED, steps_used=exc.steps_used)
    used = cyc.steps_used
    try:
        order = holonomy_order(backend, cyc.holonomy, order_cap)
    except CapExceeded:
        return ExplorationReport(Verdict.BUDGET_EXHAUSTED, U=cyc.U, T_quotient=cyc.T_q,
                                 holonomy=cyc.holonomy, steps_used=used)

    if order == math.inf:
        trace = run_trace(backend, collective, cyc.U + cyc.T_q, start=x0)
        used += cyc.U + cyc.T_q
        cycle_states = [
            (c.states, partition_from_positions(c.positions))
            for c in trace.configurations[cyc.U : cyc.U + cyc.T_q]
        ]
        return ExplorationReport(
            Verdict.DRIFT_UNBOUNDED, U=cyc.U, T_state=_minimal_period(cycle_states),
            T_quotient=cyc.T_q, holonomy=cyc.holonomy, holonomy_order=order,
            visited_count=len(trace.visited), steps_used=used,
        )

    # The raw pair sequence must close up within order * T_q steps of time U.
    limit = order * cyc.T_q
    trace = run_trace(backend, collective, cyc.U + limit, start=x0)
    used += cyc.U + limit
    configs = trace.configurations
    anchor = configs[cyc.U].pair
    T_pair = next(
        (t for t in range(1, limit + 1) if configs[cyc.U + t].pair == anchor), None
    )
    if T_pair is None or limit % T_pair:
        raise InvariantViolation(
            f"raw period {T_pair} does not divide holonomy order * T_q = {limit}"
        )
    visited = frozenset(v for c in configs[: cyc.U + T_pair] for v in c.positions)
    cycle_states = [
        (c.states, partition_from_positions(c.positions))
        for c in configs[cyc.U : cyc.U + cyc.T_q]
    ]
    return ExplorationReport(
        Verdict.FINITE_EXPLORATION, U=cyc.U, T_state=_minimal_period(cycle_states),
        T_quotient=cyc.T_q, T_pair=T_pair, holonomy=cyc.holonomy, holonomy_order=order,
        visited_count=len(visited), steps_used=used, visited=visited,
    )


def translate_configuration(backend: GroupBackend, g: GroupElement, config: Configuration) -> Configuration:
    return Configuration(
        config.states, tuple(backend.multiply(g, v) for v in config.positions), config.time
    )


def format_configuration(backend: GroupBackend, config: Configuration) -> str:
    """One trace line: ``t=<n> q=[...] v=[...] F=[...]`` with 1-based leaders."""
    leaders = partition_from_positions(config.positions)
    q = ",".join(map(str, config.states))
    v = ",".join(backend.render(p) for p in config.positions)
    f = ",".join(str(x + 1) for x in leaders)
    return f"t={config.time} q=[{q}] v=[{v}] F=[{f}]"


def write_trace(backend: GroupBackend, configs: Sequence[Configuration], stream) -> None:
    for c in configs:
        stream.write(format_configuration(backend, c) + "\n")
