"""Command-line entry point.

Exit codes: 0 success, 1 usage or parse error, 2 budget or resource
exhausted, 3 invariant violation (oracle mismatch, failed exponent).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bounds as bounds_mod
from .automata import admissibility_check
from .dsl import (
    ParseError,
    document_from_collective,
    format_spec,
    load_spec,
    parse_group_args,
    parse_word,
)
from .errors import (
    BudgetExhausted,
    CapExceeded,
    CayleyTrapError,
    InvariantViolation,
    ResourceLimit,
)
from .groups import enumerate_elements, verify_exponent
from .oracle import exhaustive_orbit_oracle, single_automaton_oracle
from .report import emit_report
from .scenarios import (
    build_line_explorer,
    build_single,
    random_collective,
    single_collective,
)
from .simulator import (
    Verdict,
    certify,
    detect_cycle,
    initial_configuration,
    run_trace,
    translate_configuration,
    write_trace,
)

EXIT_OK, EXIT_USAGE, EXIT_EXHAUSTED, EXIT_VIOLATION = 0, 1, 2, 3
DEFAULT_MAX_STEPS = 10_000_000
DEFAULT_ENUM_CAP = 100_000


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(message)


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cayleytrap", description="Automata collectives on Cayley graphs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="run a collective for a fixed number of steps")
    s.add_argument("spec")
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--trace", metavar="PATH")
    s.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)

    c = sub.add_parser("certify", help="decide finite exploration versus drift")
    c.add_argument("spec")
    c.add_argument("--budget", type=int, required=True)
    c.add_argument("--all-starts", action="store_true",
                   help="translate the start to every vertex of a finite group")
    c.add_argument("--format", choices=("text", "json"), default="text")
    c.add_argument("--cap", type=int, default=DEFAULT_ENUM_CAP)

    b = sub.add_parser("bounds", help="print the H/O bound table")
    b.add_argument("--m", type=int, required=True)
    b.add_argument("--qa", type=int, required=True)
    b.add_argument("--exponent", type=int, required=True)
    b.add_argument("--digit-cap", type=int, default=bounds_mod.DEFAULT_DIGIT_CAP)

    v = sub.add_parser("verify", help="cross-check against brute-force oracles")
    v.add_argument("what", choices=("exponent", "single", "orbit"))
    v.add_argument("spec")
    v.add_argument("--exponent", type=int)
    v.add_argument("--budget", type=int, default=100_000)
    v.add_argument("--cap", type=int, default=DEFAULT_ENUM_CAP)

    sc = sub.add_parser("scenario", help="emit or certify a built-in scenario")
    sc.add_argument("name", choices=("line-explorer", "stayer", "drifter", "looper", "random"))
    sc.add_argument("--group", help="group arguments, e.g. 'heisenberg 3'")
    sc.add_argument("--gen", type=int, default=1)
    sc.add_argument("--word", help="looper word, e.g. s1*s2^-1")
    sc.add_argument("--seed", type=int, default=0)
    sc.add_argument("--m", type=int, default=2)
    sc.add_argument("--q-max", type=int, default=3)
    sc.add_argument("--out", metavar="PATH")
    sc.add_argument("--certify", action="store_true")
    sc.add_argument("--budget", type=int, default=10_000)
    sc.add_argument("--format", choices=("text", "json"), default="text")
    return p


def _cmd_simulate(args, out) -> int:
    doc = load_spec(args.spec)
    if args.steps < 0:
        raise _Usage("--steps must be >= 0")
    if args.steps > args.max_steps:
        print(f"error: {args.steps} steps exceed the resource cap {args.max_steps}", file=sys.stderr)
        return EXIT_EXHAUSTED
    trace = run_trace(doc.backend, doc.collective, args.steps, keep=bool(args.trace))
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            write_trace(doc.backend, trace.configurations, fh)
    final = trace.configurations[-1]
    print(f"steps: {final.time}", file=out)
    print(f"visited vertices: {len(trace.visited)}", file=out)
    for i, seen in enumerate(trace.visited_by, start=1):
        print(f"automaton {i}: {len(seen)} vertices, now at "
              f"{doc.backend.render(final.positions[i - 1])} in state {final.states[i - 1]}", file=out)
    return EXIT_OK


def _certify_and_print(backend, collective, budget, fmt, out) -> int:
    report = certify(backend, collective, budget=budget)
    print(emit_report(report, backend, fmt), file=out)
    return EXIT_EXHAUSTED if report.verdict is Verdict.BUDGET_EXHAUSTED else EXIT_OK


def _cmd_certify(args, out) -> int:
    doc = load_spec(args.spec)
    if args.budget < 1:
        raise _Usage("--budget must be >= 1")
    if not args.all_starts:
        return _certify_and_print(doc.backend, doc.collective, args.budget, args.format, out)
    backend = doc.backend
    elements = sorted(enumerate_elements(backend, args.cap), key=repr)
    base = initial_configuration(doc.collective)
    counts = {v: 0 for v in Verdict}
    for g in elements:
        start = translate_configuration(backend, g, base)
        report = certify(backend, doc.collective, start, budget=args.budget)
        counts[report.verdict] += 1
        if args.format == "json":
            print(emit_report(report, backend, "json"), file=out)
        else:
            print(f"start {backend.render(g)}: {report.verdict} "
                  f"visited={report.visited_count} T_pair={report.T_pair}", file=out)
    summary = ", ".join(f"{v.value}={n}" for v, n in counts.items() if n)
    print(f"starts: {len(elements)} ({summary})", file=sys.stderr if args.format == "json" else out)
    return EXIT_EXHAUSTED if counts[Verdict.BUDGET_EXHAUSTED] else EXIT_OK


def _cmd_bounds(args, out) -> int:
    try:
        params = bounds_mod.BoundParams(args.m, args.qa, args.exponent)
    except ValueError as exc:
        raise _Usage(str(exc)) from None
    table = bounds_mod.compute_bounds(params, digit_cap=args.digit_cap)
    print(bounds_mod.format_table(table), file=out)
    return EXIT_OK


def _cmd_verify(args, out) -> int:
    doc = load_spec(args.spec)
    backend, coll = doc.backend, doc.collective
    if args.what == "exponent":
        M = args.exponent if args.exponent is not None else backend.exponent
        if M is None:
            raise _Usage("the group has no exponent; pass --exponent")
        bad = verify_exponent(backend, M, args.cap)
        if bad is not None:
            print(f"counterexample: {backend.render(bad)}^{M} != e", file=out)
            return EXIT_VIOLATION
        print(f"verified: g^{M} = e for all {len(enumerate_elements(backend, args.cap))} elements", file=out)
        return EXIT_OK

    if args.what == "single":
        if coll.size != 1:
            raise _Usage("verify single needs a collective of one automaton")
        aut = coll.members[0]
        oracle = single_automaton_oracle(backend, aut, coll.start_states[0])
        cyc = detect_cycle(backend, coll, None, args.budget)
        print(f"oracle: U={oracle.U_exact} T={oracle.T_exact} g_T={backend.render(oracle.g_T)}", file=out)
        print(f"simulator: U={cyc.U} T_q={cyc.T_q} h={backend.render(cyc.holonomy)}", file=out)
        ok = (oracle.U_exact, oracle.T_exact) == (cyc.U, cyc.T_q)
        ok = ok and oracle.U_exact < aut.state_count and oracle.T_exact <= aut.state_count
        if backend.exponent is not None:
            ok = ok and backend.power(oracle.g_T, backend.exponent) == backend.identity()
        print("agree" if ok else "MISMATCH", file=out)
        return EXIT_OK if ok else EXIT_VIOLATION

    if not backend.finite:
        raise _Usage("verify orbit needs a finite group")
    U, T = exhaustive_orbit_oracle(backend, coll, cap=args.cap * 100)
    report = certify(backend, coll, budget=args.budget)
    print(f"oracle: U={U} T_pair={T}", file=out)
    print(f"certify: U={report.U} T_pair={report.T_pair} ({report.verdict})", file=out)
    ok = (U, T) == (report.U, report.T_pair)
    print("agree" if ok else "MISMATCH", file=out)
    return EXIT_OK if ok else EXIT_VIOLATION


def _cmd_scenario(args, out) -> int:
    if args.name == "line-explorer":
        s = build_line_explorer()
        backend, coll, group_args = s.backend, s.collective, None
    else:
        default = "heisenberg 3" if args.name == "random" else "free-abelian 1"
        backend, group_args = parse_group_args(args.group or default)
        if args.name == "random":
            if args.m < 1 or args.q_max < 1:
                raise _Usage("--m and --q-max must be >= 1")
            coll = random_collective(args.seed, args.m, args.q_max, backend)
        else:
            word = []
            if args.name == "looper":
                if not args.word:
                    raise _Usage("looper needs --word")
                word = parse_word(args.word, backend.generator_count)
            aut = build_single(args.name, gen=args.gen, word=word)
            coll = single_collective(backend, aut)
    problems = admissibility_check(coll, backend)
    if problems:
        raise _Usage(problems[0])
    if args.certify:
        return _certify_and_print(backend, coll, args.budget, args.format, out)
    text = format_spec(document_from_collective(backend, coll, group_args))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "certify": _cmd_certify,
    "bounds": _cmd_bounds,
    "verify": _cmd_verify,
    "scenario": _cmd_scenario,
}


def run_cli(argv: list[str] | None = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    try:
        args = _build_parser().parse_args(argv)
        return _COMMANDS[args.command](args, out)
    except _Usage as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BudgetExhausted, CapExceeded, ResourceLimit) as exc:
        print(f"exhausted: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except CayleyTrapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
