"""Finite-automata collectives exploring Cayley graphs of finitely generated groups."""

from .automata import (
    ANY,
    SELF,
    THETA,
    Automaton,
    Collective,
    Exact,
    TransitionRule,
    admissibility_check,
    encode_collective_state,
    lookup_transition,
    observe,
    partition_from_positions,
)
from .bounds import BoundParams, check_report, compute_bounds, state_count_bound
from .dsl import ParseError, SpecDocument, format_spec, load_spec, parse_spec
from .groups import (
    STAY,
    Direction,
    FiniteAbelian,
    FreeAbelian,
    FreeGroup,
    Gen,
    HeisenbergModP,
    InvGen,
    MultTable,
    enumerate_elements,
    verify_exponent,
    word_metric,
)
from .oracle import exhaustive_orbit_oracle, separation_check, single_automaton_oracle
from .report import emit_report
from .scenarios import build_line_explorer, build_single, random_collective, single_collective
from .simulator import (
    Configuration,
    ExplorationReport,
    Verdict,
    certify,
    detect_cycle,
    holonomy_order,
    normalize,
    run_trace,
    step,
)

__version__ = "0.1.0"
