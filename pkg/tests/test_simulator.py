import io
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from cayleytrap.automata import SELF, Automaton, Collective, Exact, TransitionRule, catch_all
from cayleytrap.errors import BudgetExhausted
from cayleytrap.groups import (
    STAY,
    FiniteAbelian,
    FreeAbelian,
    FreeGroup,
    Gen,
    HeisenbergModP,
    InvGen,
    enumerate_elements,
)
from cayleytrap.scenarios import (
    build_line_explorer,
    drifter,
    looper,
    random_collective,
    single_collective,
    stayer,
)
from cayleytrap.simulator import (
    Configuration,
    Verdict,
    certify,
    detect_cycle,
    format_configuration,
    holonomy_order,
    initial_configuration,
    normalize,
    run_trace,
    step,
    translate_configuration,
    write_trace,
)

H3 = HeisenbergModP(3)


def handshake():
    """A moves right and B left only if each sees the other's time-t state 0."""
    a = Automaton("A", 2, [
        TransitionRule(0, (SELF, Exact(0)), 1, Gen(1)),
        TransitionRule(0, (SELF, Exact(1)), 0, STAY),
        TransitionRule(0, catch_all(2, 0), 0, STAY),
        TransitionRule(1, catch_all(2, 0), 1, STAY),
    ])
    b = Automaton("B", 3, [
        TransitionRule(0, (Exact(0), SELF), 1, InvGen(1)),
        TransitionRule(0, (Exact(1), SELF), 2, STAY),
        TransitionRule(0, catch_all(2, 1), 0, STAY),
        TransitionRule(1, catch_all(2, 1), 1, STAY),
        TransitionRule(2, catch_all(2, 1), 2, STAY),
    ])
    return Collective([a, b], [0, 0], [(0,), (0,)])


def quotient_brute_force(backend, collective, limit):
    """Minimal (U, T) of the normalized sequence by storing every key."""
    seen = {}
    c = initial_configuration(collective)
    for t in range(limit):
        n = normalize(backend, c)
        if n in seen:
            return seen[n], t - seen[n]
        seen[n] = t
        c = step(backend, collective, c)
    raise AssertionError("no repeat")


class TestStep:
    def test_stayer_fixed_point(self):
        c = single_collective(H3, stayer())
        x = initial_configuration(c)
        y = step(H3, c, x)
        assert (y.states, y.positions, y.time) == (x.states, x.positions, 1)

    def test_drifter(self):
        Z = FreeAbelian(1)
        y = step(Z, single_collective(Z, drifter(1)), Configuration((0,), ((0,),)))
        assert y.positions == ((1,),)

    def test_handshake_is_simultaneous(self):
        Z = FreeAbelian(1)
        trace = run_trace(Z, handshake(), 2)
        got = [(c.states, c.positions) for c in trace.configurations]
        assert got == [
            ((0, 0), ((0,), (0,))),
            ((1, 1), ((1,), (-1,))),
            ((1, 1), ((1,), (-1,))),
        ]


class TestRunTrace:
    def test_zero_budget(self):
        c = random_collective(1, 3, 2, H3, start_positions=[(0, 0, 0), (1, 0, 0), (0, 0, 0)])
        tr = run_trace(H3, c, 0)
        assert tr.visited == {(0, 0, 0), (1, 0, 0)}
        assert len(tr.configurations) == 1

    def test_stayers(self):
        Z = FreeAbelian(2)
        st_ = [Automaton("s", 1, [TransitionRule(0, catch_all(2, i), 0, STAY)]) for i in range(2)]
        c = Collective(st_, [0, 0], [(0, 0), (3, 1)])
        assert run_trace(Z, c, 50).visited == {(0, 0), (3, 1)}

    def test_wrapping_walker(self):
        G = FiniteAbelian((5,))
        tr = run_trace(G, single_collective(G, drifter(1)), 7)
        assert len(tr.visited) == 5

    def test_keep_false(self):
        G = FiniteAbelian((5,))
        tr = run_trace(G, single_collective(G, drifter(1)), 7, keep=False)
        assert [c.time for c in tr.configurations] == [0, 7]
        assert len(tr.visited) == 5


class TestNormalize:
    def test_single(self):
        for v in enumerate_elements(H3, 27):
            assert normalize(H3, Configuration((0,), (v,))).relative_positions == ((0, 0, 0),)

    def test_co_located(self):
        n = normalize(H3, Configuration((0, 1), ((1, 2, 0), (1, 2, 0))))
        assert n.relative_positions == ((0, 0, 0), (0, 0, 0))
        assert n.leaders == (0, 0)

    @pytest.mark.parametrize("backend", [H3, FreeGroup(2), FreeAbelian(2)])
    def test_left_invariant(self, backend):
        rng = random.Random(1)
        dirs = backend.directions()
        for _ in range(50):
            pos = tuple(backend.evaluate(rng.choices(dirs, k=6)) for _ in range(3))
            g = backend.evaluate(rng.choices(dirs, k=8))
            x = Configuration((0, 1, 2), pos)
            assert normalize(backend, x) == normalize(backend, translate_configuration(backend, g, x))


class TestDetectCycle:
    def test_drifter_free_abelian(self):
        Z = FreeAbelian(1)
        cyc = detect_cycle(Z, single_collective(Z, drifter(1)), None, 10)
        assert (cyc.U, cyc.T_q, cyc.holonomy) == (0, 1, (1,))

    def test_drifter_heisenberg(self):
        cyc = detect_cycle(H3, single_collective(H3, drifter(1)), None, 10)
        assert (cyc.U, cyc.T_q, cyc.holonomy) == (0, 1, (1, 0, 0))

    def test_budget_exhausted(self):
        s = build_line_explorer()
        with pytest.raises(BudgetExhausted):
            detect_cycle(s.backend, s.collective, None, 10_000)

    @pytest.mark.parametrize("seed", range(60))
    def test_matches_brute_force_quotient(self, seed):
        # Multi-member collectives on infinite groups usually separate forever.
        backend = [H3, FreeAbelian(2), FreeGroup(2), FiniteAbelian((4, 4))][seed % 4]
        m = 1 if backend.exponent is None else 1 + seed % 3
        c = random_collective(seed, m, 3, backend)
        cyc = detect_cycle(backend, c, None, 100_000)
        assert (cyc.U, cyc.T_q) == quotient_brute_force(backend, c, 100_000)

    def test_holonomy_reconstructs_positions(self):
        for seed in range(30):
            F = [FreeGroup(2), H3][seed % 2]
            c = random_collective(seed, 1 + 2 * (seed % 2), 3, F)
            cyc = detect_cycle(F, c, None, 100_000)
            trace = run_trace(F, c, cyc.U + 3 * cyc.T_q)
            base = trace.configurations[cyc.U]
            v1 = base.positions[0]
            conj = F.multiply(F.multiply(v1, cyc.holonomy), F.inverse(v1))
            for k in range(4):
                expect = base.positions
                for _ in range(k):
                    expect = tuple(F.multiply(conj, v) for v in expect)
                assert trace.configurations[cyc.U + k * cyc.T_q].positions == expect


class TestHolonomyOrder:
    def test_identity(self):
        for b in (H3, FreeAbelian(1), FreeGroup(2)):
            assert holonomy_order(b, b.identity(), 10) == 1

    def test_infinite(self):
        assert holonomy_order(FreeAbelian(1), (1,), 10) == math.inf
        assert holonomy_order(FreeGroup(2), (1, 2), 10) == math.inf

    def test_heisenberg(self):
        assert holonomy_order(H3, (1, 0, 0), 10) == 3

    def test_divides_exponent(self):
        G = FiniteAbelian((4, 6))
        for g in enumerate_elements(G, 100):
            assert 12 % holonomy_order(G, g, 100) == 0


class TestCertify:
    def test_stayers(self):
        Z = FreeAbelian(1)
        st_ = [Automaton("s", 1, [TransitionRule(0, catch_all(3, i), 0, STAY)]) for i in range(3)]
        r = certify(Z, Collective(st_, [0, 0, 0], [(0,), (4,), (0,)]), budget=10)
        assert r.verdict is Verdict.FINITE_EXPLORATION
        assert r.visited_count == 2
        assert r.T_pair == 1

    def test_drifter_is_drift(self):
        Z = FreeAbelian(1)
        r = certify(Z, single_collective(Z, drifter(1)), budget=10)
        assert r.verdict is Verdict.DRIFT_UNBOUNDED
        assert r.T_pair is None

    def test_looper_drift(self):
        Z2 = FreeAbelian(2)
        r = certify(Z2, single_collective(Z2, looper([Gen(1), Gen(2)])), budget=10)
        assert r.verdict is Verdict.DRIFT_UNBOUNDED
        assert r.holonomy == (1, 1)

    def test_drifter_heisenberg_three_vertices(self):
        r = certify(H3, single_collective(H3, drifter(1)), budget=10)
        assert r.verdict is Verdict.FINITE_EXPLORATION
        assert r.visited_count == 3
        assert r.visited == {(0, 0, 0), (1, 0, 0), (2, 0, 0)}

    def test_budget_exhausted(self):
        s = build_line_explorer()
        r = certify(s.backend, s.collective, budget=1000)
        assert r.verdict is Verdict.BUDGET_EXHAUSTED

    @pytest.mark.parametrize("seed", range(40))
    def test_report_invariants(self, seed):
        m = 1 + seed % 3
        c = random_collective(seed, m, 3, H3)
        r = certify(H3, c, budget=100_000)
        assert r.verdict is Verdict.FINITE_EXPLORATION
        assert 3 % r.holonomy_order == 0
        assert (r.holonomy_order * r.T_quotient) % r.T_pair == 0
        assert (3 * r.T_quotient) % r.T_pair == 0
        assert r.T_quotient % r.T_state == 0
        trace = run_trace(H3, c, r.U + 2 * r.T_pair)
        assert trace.visited == r.visited
        assert r.visited_count == len(r.visited)

    @pytest.mark.parametrize("seed", range(40))
    def test_single_automaton_visited_bound(self, seed):
        backend = [H3, FiniteAbelian((4, 4))][seed % 2]
        c = random_collective(seed, 1, 6, backend)
        r = certify(backend, c, budget=1000)
        assert r.visited_count <= r.U + r.T_quotient * r.holonomy_order

    @pytest.mark.parametrize("seed", range(5))
    def test_strong_trap_every_start(self, seed):
        c = random_collective(seed, 2, 3, H3)
        base = initial_configuration(c)
        for g in enumerate_elements(H3, 27):
            r = certify(H3, c, translate_configuration(H3, g, base), budget=10_000)
            assert r.verdict is Verdict.FINITE_EXPLORATION


def _translated_trace_equal(backend, c, g, steps):
    x0 = initial_configuration(c)
    a = run_trace(backend, c, steps, start=x0).configurations
    b = run_trace(backend, c, steps, start=translate_configuration(backend, g, x0)).configurations
    return all(translate_configuration(backend, g, x) == y for x, y in zip(a, b))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([H3, FreeAbelian(2), FreeGroup(2)]),
       st.lists(st.integers(0, 4), min_size=1, max_size=10))
def test_left_invariance_property(seed, backend, gword):
    dirs = backend.directions()
    g = backend.evaluate(dirs[i % len(dirs)] for i in gword)
    rng = random.Random(seed)
    starts = [backend.evaluate(rng.choices(dirs, k=3)) for _ in range(3)]
    c = random_collective(seed, 3, 3, backend, start_positions=starts)
    assert _translated_trace_equal(backend, c, g, 200)


def test_determinism():
    c = random_collective(11, 3, 3, FreeGroup(2))
    a = run_trace(FreeGroup(2), c, 300).configurations
    b = run_trace(FreeGroup(2), c, 300).configurations
    assert a == b


def test_trace_format_golden():
    Z = FreeAbelian(1)
    tr = run_trace(Z, handshake(), 1)
    buf = io.StringIO()
    write_trace(Z, tr.configurations, buf)
    assert buf.getvalue() == (
        "t=0 q=[0,0] v=[(0),(0)] F=[1,1]\n"
        "t=1 q=[1,1] v=[(1),(-1)] F=[1,2]\n"
    )
    assert format_configuration(H3, Configuration((2,), ((1, 2, 0),), 5)) == \
        "t=5 q=[2] v=[(1,2,0)] F=[1]"
