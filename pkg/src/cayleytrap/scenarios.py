"""Built-in collectives: the two-pebble line explorer, simple walkers, random sweeps."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .automata import (
    Automaton,
    Collective,
    Exact,
    TransitionRule,
    admissibility_check,
    catch_all,
    pattern,
)
from .groups import STAY, Direction, FreeAbelian, Gen, GroupBackend, InvGen


@dataclass(frozen=True)
class Scenario:
    name: str
    backend: GroupBackend
    collective: Collective
    description: str = ""


# Walker states of the line explorer.
SEEK_R, PUSH_R, SEEK_L, PUSH_L = range(4)
WALKER, PEBBLE_L, PEBBLE_R = range(3)


def line_walker() -> Automaton:
    m, me = 3, WALKER
    sees_r = pattern(m, me, s3=Exact(0))
    sees_l = pattern(m, me, s2=Exact(0))
    rules = [
        # Arriving at the right pebble: wait one step so it can read PUSH_R.
        TransitionRule(SEEK_R, sees_r, PUSH_R, STAY),
        TransitionRule(SEEK_R, catch_all(m, me), SEEK_R, Gen(1)),
        TransitionRule(PUSH_R, catch_all(m, me), SEEK_L, Gen(1)),
        TransitionRule(SEEK_L, sees_l, PUSH_L, STAY),
        TransitionRule(SEEK_L, catch_all(m, me), SEEK_L, InvGen(1)),
        TransitionRule(PUSH_L, catch_all(m, me), SEEK_R, InvGen(1)),
    ]
    return Automaton("walker", 4, rules)


def _pebble(name: str, index: int, push_state: int, move: Direction) -> Automaton:
    rules = [
        TransitionRule(0, pattern(3, index, s1=Exact(push_state)), 0, move),
        TransitionRule(0, catch_all(3, index), 0, STAY),
    ]
    return Automaton(name, 1, rules)


def build_line_explorer() -> Scenario:
    """Walker plus two pebbles on Z; the walker shuttles and widens the pebble gap.

    All three start at 0 with the walker seeking right. After the ``k``-th
    push on each side the pebbles sit at ``-k`` and ``+k``.
    """
    backend = FreeAbelian(1)
    members = (
        line_walker(),
        _pebble("pebbleL", PEBBLE_L, PUSH_L, InvGen(1)),
        _pebble("pebbleR", PEBBLE_R, PUSH_R, Gen(1)),
    )
    e = backend.identity()
    collective = Collective(members, (SEEK_R, 0, 0), (e, e, e))
    return Scenario(
        "line-explorer", backend, collective,
        "walker shuttles between two pebbles on Z, pushing each outward in turn",
    )


def stayer() -> Automaton:
    return Automaton("stayer", 1, [TransitionRule(0, catch_all(1, 0), 0, STAY)])


def drifter(i: int = 1) -> Automaton:
    return Automaton(f"drifter{i}", 1, [TransitionRule(0, catch_all(1, 0), 0, Gen(i))])


def looper(word: Sequence[Direction]) -> Automaton:
    """``len(word)`` states emitting ``word`` cyclically."""
    n = len(word)
    if n == 0:
        raise ValueError("looper needs a non-empty word")
    rules = [TransitionRule(k, catch_all(1, 0), (k + 1) % n, d) for k, d in enumerate(word)]
    return Automaton("looper", n, rules)


def build_single(name: str, gen: int = 1, word: Sequence[Direction] = ()) -> Automaton:
    if name == "stayer":
        return stayer()
    if name == "drifter":
        return drifter(gen)
    if name == "looper":
        return looper(word)
    raise ValueError(f"unknown single automaton {name!r}")


def single_collective(backend: GroupBackend, automaton: Automaton, start_state: int = 0) -> Collective:
    return Collective((automaton,), (start_state,), (backend.identity(),))


def random_automaton(rng: random.Random, index: int, m: int, q_counts: Sequence[int],
                     backend: GroupBackend) -> Automaton:
    n = q_counts[index]
    dirs = backend.directions()
    others = [j for j in range(m) if j != index]
    rules = []
    for q in range(n):
        if others and rng.random() < 0.5:
            j = rng.choice(others)
            met = Exact(rng.randrange(q_counts[j]))
            pat = pattern(m, index, **{f"s{j + 1}": met})
            rules.append(TransitionRule(q, pat, rng.randrange(n), rng.choice(dirs)))
        rules.append(TransitionRule(q, catch_all(m, index), rng.randrange(n), rng.choice(dirs)))
    return Automaton(f"a{index + 1}", n, rules)


def random_collective(seed: int, m: int, q_max: int, backend: GroupBackend,
                      start_positions: Sequence | None = None) -> Collective:
    """A reproducible random collective; total by construction.

    Each state gets a catch-all rule and, with probability 1/2, a preceding
    rule firing when one chosen other member is met in one chosen state.
    Start states are 0 and everyone starts at the identity unless
    ``start_positions`` is given.
    """
    if m < 1 or q_max < 1:
        raise ValueError("m and q_max must be >= 1")
    rng = random.Random(seed)
    q_counts = [rng.randint(1, q_max) for _ in range(m)]
    members = tuple(random_automaton(rng, i, m, q_counts, backend) for i in range(m))
    starts = tuple(start_positions) if start_positions is not None else (backend.identity(),) * m
    return Collective(members, (0,) * m, starts)


def random_scenario(seed: int, m: int, q_max: int, backend: GroupBackend) -> Scenario:
    c = random_collective(seed, m, q_max, backend)
    return Scenario(f"random-{seed}", backend, c, f"random collective m={m} q_max={q_max} seed={seed}")


def validate_scenario(s: Scenario) -> list[str]:
    return admissibility_check(s.collective, s.backend)
