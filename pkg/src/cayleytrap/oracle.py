"""Brute-force verifiers that share no cycle-finding code with the simulator."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Collection, Sequence

from .automata import Automaton, Collective, Exact, Slot
from .errors import CapExceeded
from .groups import Direction, GroupBackend, GroupElement
from .simulator import Configuration, initial_configuration, step

DEFAULT_ORBIT_CAP = 10**7


@dataclass(frozen=True)
class SingleAutomatonAnalysis:
    U_exact: int
    T_exact: int
    cycle_outputs: tuple[Direction, ...]
    g_T: GroupElement


def single_automaton_oracle(backend: GroupBackend, automaton: Automaton, start: int) -> SingleAutomatonAnalysis:
    """Tail and cycle of the functional graph ``q -> next(q, blank observation)``.

    Alone on the graph an automaton always observes ``(theta,)``, so its
    state sequence is the orbit of ``start`` under a map ``Q -> Q``.
    """
    blank = (None,)
    first_seen: dict[int, int] = {}
    outputs: list[Direction] = []
    q = start
    t = 0
    while q not in first_seen:
        first_seen[q] = t
        q, d = _first_rule(automaton, q, blank)
        outputs.append(d)
        t += 1
    U = first_seen[q]
    cycle = tuple(outputs[U:])
    return SingleAutomatonAnalysis(U, t - U, cycle, backend.evaluate(cycle))


def _first_rule(automaton: Automaton, q: int, obs: tuple) -> tuple[int, Direction]:
    # Deliberately re-derives rule matching instead of using the memoized path.
    for r in automaton.rules:
        if r.state != q:
            continue
        ok = True
        for p, o in zip(r.pattern, obs):
            if isinstance(p, Exact):
                ok = o == p.state
            elif p is not Slot.ANY:
                ok = o is None
            if not ok:
                break
        if ok:
            return r.next_state, r.move
    raise LookupError(f"no rule for state {q}")


def exhaustive_orbit_oracle(backend: GroupBackend, collective: Collective,
                            start: Configuration | None = None,
                            cap: int = DEFAULT_ORBIT_CAP) -> tuple[int, int]:
    """Exact tail and period of the raw (states, positions) sequence.

    Stores every configuration until one repeats; raises CapExceeded after
    ``cap`` stored configurations.
    """
    config = start if start is not None else initial_configuration(collective)
    seen: dict[tuple, int] = {}
    t = 0
    while config.pair not in seen:
        if len(seen) >= cap:
            raise CapExceeded("orbit enumeration", cap)
        seen[config.pair] = t
        config = step(backend, collective, config)
        t += 1
    U = seen[config.pair]
    return U, t - U


@dataclass(frozen=True)
class Separation:
    """Outcome of a separation check.

    ``holds`` is None when no clean window exists and none was asserted.
    """

    holds: bool | None
    window_start: int | None = None
    violated_at: int | None = None


def _meets(positions: Sequence, block_a: Collection[int], block_b: Collection[int]) -> bool:
    at_a = {positions[i] for i in block_a}
    return any(positions[j] in at_a for j in block_b)


def separation_check(trace: Sequence[Configuration], block_a: Collection[int],
                     block_b: Collection[int], h_window: int,
                     window_start: int | None = None) -> Separation:
    """Once two blocks avoid each other for ``h_window`` steps, they never meet again.

    Blocks are 0-based automaton indices. Without ``window_start`` the first
    window of ``h_window`` consecutive meeting-free times is located; with
    it, that window is taken as given. Any cross-block meeting from the
    window start onwards is reported as a violation.
    """
    if set(block_a) & set(block_b):
        raise ValueError("blocks must be disjoint")
    meets = [_meets(c.positions, block_a, block_b) for c in trace]
    if window_start is None:
        run = 0
        for t, met in enumerate(meets):
            run = 0 if met else run + 1
            if run == h_window:
                window_start = t - h_window + 1
                break
        else:
            return Separation(None)
    for t in range(window_start, len(meets)):
        if meets[t]:
            return Separation(False, window_start, t)
    return Separation(True, window_start)


def separation_window(O_a: int, O_b: int, M: int) -> int:
    """Meeting-free window length after which two sub-collectives stay apart."""
    return max(O_a, O_b) + M * M * O_a * O_b + 1
