"""Line-oriented description language for groups, automata and collectives.

Example::

    # walker and two pebbles on Z
    group free-abelian 1
    automaton walker states 4
    rule 0 slot3=pebbleR.0 -> move stay next 1
    rule 0 -> move s1 next 0
    ...
    collective walker @ e  pebbleL @ e  pebbleR @ e

Rule slots not mentioned default to ``any``. A member may pick its start
state with ``name:q``; the default is 0. Start words are ``e`` or factors
``s<i>`` / ``s<i>^<k>`` joined by ``*``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .automata import (
    ANY,
    SELF,
    THETA,
    Automaton,
    Collective,
    Exact,
    TransitionRule,
    admissibility_check,
)
from .errors import CayleyTrapError, GroupDefinitionError
from .groups import (
    Direction,
    FiniteAbelian,
    FreeAbelian,
    FreeGroup,
    GroupBackend,
    HeisenbergModP,
    MultTable,
    load_mult_table,
    shortest_word,
)

MAX_STATES = 10_000
MAX_RANK = 64
MAX_MODULUS = 1_000_000
MAX_PRIME = 100_003
MAX_MEMBERS = 64
MAX_POWER = 1_000_000


class ParseError(CayleyTrapError):
    def __init__(self, line: int, column: int, message: str, token: str = ""):
        super().__init__(f"{line}:{column}: {message}" + (f" (at {token!r})" if token else ""))
        self.line = line
        self.column = column
        self.message = message
        self.token = token


@dataclass(frozen=True)
class Token:
    text: str
    line: int
    column: int

    def fail(self, message: str) -> ParseError:
        return ParseError(self.line, self.column, message, self.text)


@dataclass
class RuleDecl:
    state: int
    slots: dict[int, object]  # 1-based slot -> THETA | ANY | (name, state, token)
    move: Direction
    next_state: int
    token: Token
    move_token: Token


@dataclass
class AutomatonDecl:
    name: str
    states: int
    rules: list[RuleDecl] = field(default_factory=list)
    token: Token | None = None


@dataclass
class MemberDecl:
    name: str
    start_state: int
    word: list[Direction]
    token: Token | None = None


@dataclass
class SpecDocument:
    backend: GroupBackend
    group_args: str
    automata: dict[str, AutomatonDecl]
    members: list[MemberDecl]
    collective: Collective


_TOKEN = re.compile(r"@|[^\s@]+")
_INT = re.compile(r"\d{1,9}")
_SLOT = re.compile(r"slot(\d{1,9})=(.*)")
_REF = re.compile(r"([A-Za-z_][\w-]*)\.(\d{1,9})")
_NAME = re.compile(r"[A-Za-z_][\w-]*")
_FACTOR = re.compile(r"s(\d{1,9})(?:\^(-?\d{1,9}))?")


def _tokenize(text: str) -> list[list[Token]]:
    lines = []
    for n, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        toks = [Token(m.group(), n, m.start() + 1) for m in _TOKEN.finditer(body)]
        if toks:
            lines.append(toks)
    return lines


def _int(tok: Token, what: str, lo: int = 0, hi: int | None = None) -> int:
    if not _INT.fullmatch(tok.text):
        raise tok.fail(f"expected {what}")
    v = int(tok.text)
    if v < lo or (hi is not None and v > hi):
        bound = f"{lo}..{hi}" if hi is not None else f">= {lo}"
        raise tok.fail(f"{what} must be in {bound}")
    return v


def _param(tok: Token, key: str) -> Token:
    """Accept ``k=2`` as well as a bare ``2``."""
    if "=" in tok.text:
        k, _, v = tok.text.partition("=")
        if k != key:
            raise tok.fail(f"expected parameter {key}=")
        return Token(v, tok.line, tok.column + len(k) + 1)
    return tok


def _parse_group(toks: list[Token], base_dir: Path | None) -> tuple[GroupBackend, str]:
    if len(toks) < 2:
        raise toks[0].fail("group needs a family")
    fam, args = toks[1], toks[2:]

    def expect(n: int):
        if len(args) != n:
            where = args[n] if len(args) > n else fam
            raise where.fail(f"group {fam.text} takes {n} parameter(s)")

    try:
        if fam.text == "free-abelian":
            expect(1)
            backend = FreeAbelian(_int(_param(args[0], "k"), "rank", 1, MAX_RANK))
        elif fam.text == "free":
            expect(1)
            backend = FreeGroup(_int(_param(args[0], "k"), "rank", 1, MAX_RANK))
        elif fam.text == "heisenberg":
            expect(1)
            tok = _param(args[0], "p")
            p = _int(tok, "modulus", 3, MAX_PRIME)
            try:
                backend = HeisenbergModP(p)
            except GroupDefinitionError as exc:
                raise tok.fail(str(exc)) from None
        elif fam.text == "finite-abelian":
            if not args:
                raise fam.fail("finite-abelian needs at least one modulus")
            if len(args) > MAX_RANK:
                raise args[MAX_RANK].fail("too many moduli")
            backend = FiniteAbelian(tuple(_int(a, "modulus", 2, MAX_MODULUS) for a in args))
        elif fam.text == "table":
            expect(1)
            path = Path(args[0].text)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            try:
                backend = load_mult_table(path)
            except OSError as exc:
                raise args[0].fail(f"cannot read table: {exc.strerror or exc}") from None
            except GroupDefinitionError as exc:
                raise args[0].fail(f"invalid table: {exc}") from None
            return backend, f"table {args[0].text}"
        else:
            raise fam.fail("unknown group family")
    except GroupDefinitionError as exc:
        raise fam.fail(str(exc)) from None
    return backend, backend.describe()


def _parse_word(tok: Token, generator_count: int | None) -> list[Direction]:
    if tok.text == "e":
        return []
    word: list[Direction] = []
    col = tok.column
    for part in tok.text.split("*"):
        ptok = Token(part, tok.line, col)
        col += len(part) + 1
        m = _FACTOR.fullmatch(part)
        if not m:
            raise ptok.fail("malformed word factor")
        i = int(m.group(1))
        k = int(m.group(2)) if m.group(2) is not None else 1
        if i < 1 or (generator_count is not None and i > generator_count):
            raise ptok.fail("generator out of range")
        if abs(k) > MAX_POWER:
            raise ptok.fail("word exponent too large")
        word += [Direction(i if k > 0 else -i)] * abs(k)
    return word


def _parse_move(toks: list[Token], at: Token) -> tuple[Direction, int]:
    """Parse the move after the ``move`` keyword; returns (direction, tokens consumed)."""
    if not toks:
        raise at.fail("expected a move")
    t = toks[0]
    if t.text == "stay":
        return Direction(0), 1
    if t.text == "inv":
        if len(toks) < 2:
            raise t.fail("expected a generator after inv")
        g = toks[1]
        m = re.fullmatch(r"s(\d{1,9})", g.text)
        if not m or int(m.group(1)) < 1:
            raise g.fail("expected a generator like s1")
        return Direction(-int(m.group(1))), 2
    m = re.fullmatch(r"s(\d{1,9})", t.text)
    if not m or int(m.group(1)) < 1:
        raise t.fail("expected s<i>, inv s<i> or stay")
    return Direction(int(m.group(1))), 1


def _parse_rule(toks: list[Token], aut: AutomatonDecl) -> RuleDecl:
    head = toks[0]
    if len(toks) < 2:
        raise head.fail("rule needs a state")
    state = _int(toks[1], "state", 0, aut.states - 1)
    slots: dict[int, object] = {}
    k = 2
    while k < len(toks) and toks[k].text != "->":
        t = toks[k]
        m = _SLOT.fullmatch(t.text)
        if not m:
            raise t.fail("expected slot<i>=<theta|any|name.state> or ->")
        idx = int(m.group(1))
        if idx < 1:
            raise t.fail("pattern arity: slot indices start at 1")
        if idx in slots:
            raise t.fail(f"slot {idx} given twice")
        val = m.group(2)
        if val == "theta":
            slots[idx] = THETA
        elif val == "any":
            slots[idx] = ANY
        else:
            r = _REF.fullmatch(val)
            if not r:
                raise t.fail("slot value must be theta, any or name.state")
            slots[idx] = (r.group(1), int(r.group(2)), t)
        k += 1
    if k >= len(toks):
        raise toks[-1].fail("expected ->")
    arrow = toks[k]
    rest = toks[k + 1 :]
    if not rest or rest[0].text != "move":
        raise (rest[0] if rest else arrow).fail("expected move")
    move, used = _parse_move(rest[1:], rest[0])
    move_tok = rest[1]
    rest = rest[1 + used :]
    if not rest or rest[0].text != "next":
        raise (rest[0] if rest else toks[-1]).fail("expected next")
    if len(rest) < 2:
        raise rest[0].fail("expected a next state")
    nxt = _int(rest[1], "next state", 0, aut.states - 1)
    if len(rest) > 2:
        raise rest[2].fail("unexpected token after rule")
    return RuleDecl(state, slots, move, nxt, head, move_tok)


def _parse_collective(toks: list[Token], generator_count: int | None) -> list[MemberDecl]:
    members = []
    k = 1
    if len(toks) == 1:
        raise toks[0].fail("collective needs at least one member")
    while k < len(toks):
        if k + 2 >= len(toks):
            raise toks[k].fail("expected <name> @ <word>")
        name_tok, at, word_tok = toks[k], toks[k + 1], toks[k + 2]
        if at.text != "@":
            raise at.fail("expected @")
        name, _, q = name_tok.text.partition(":")
        if not _NAME.fullmatch(name):
            raise name_tok.fail("expected an automaton name")
        start = 0
        if q:
            start = _int(Token(q, name_tok.line, name_tok.column + len(name) + 1),
                         "start state", 0, MAX_STATES - 1)
        members.append(MemberDecl(name, start, _parse_word(word_tok, generator_count), name_tok))
        k += 3
    if len(members) > MAX_MEMBERS:
        raise toks[0].fail(f"at most {MAX_MEMBERS} members")
    return members


def _bind(doc_automata: dict[str, AutomatonDecl], members: list[MemberDecl]) -> tuple[Automaton, ...]:
    m = len(members)
    bound = []
    for i, mem in enumerate(members):
        decl = doc_automata[mem.name]
        rules = []
        for r in decl.rules:
            pat = []
            for j in range(m):
                v = r.slots.get(j + 1, ANY)
                if isinstance(v, tuple):
                    name, q, tok = v
                    if j == i:
                        raise tok.fail("self slot cannot name a state")
                    if name != members[j].name:
                        raise tok.fail(f"slot {j + 1} holds {members[j].name}, not {name}")
                    if q >= doc_automata[name].states:
                        raise tok.fail(f"{name} has no state {q}")
                    v = Exact(q)
                elif j == i:
                    if v is THETA or v is ANY:
                        v = SELF
                pat.append(v)
            rules.append(TransitionRule(r.state, tuple(pat), r.next_state, r.move))
        bound.append(Automaton(decl.name, decl.states, rules))
    return tuple(bound)


def parse_spec(text: str | bytes, base_dir: str | Path | None = None) -> SpecDocument:
    """Parse and validate a document; the first problem raises ParseError."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(1, 1, f"invalid UTF-8 at byte {exc.start}") from None
    base = Path(base_dir) if base_dir is not None else None
    group: tuple[GroupBackend, str] | None = None
    group_tok: Token | None = None
    automata: dict[str, AutomatonDecl] = {}
    current: AutomatonDecl | None = None
    members: list[MemberDecl] | None = None
    coll_tok: Token | None = None
    lines = _tokenize(text)

    for toks in lines:
        kw = toks[0]
        if kw.text == "group":
            if group is not None:
                raise kw.fail("group declared twice")
            group = _parse_group(toks, base)
            group_tok = kw
            current = None
        elif kw.text == "automaton":
            if len(toks) != 4 or toks[2].text != "states":
                raise kw.fail("expected automaton <name> states <k>")
            if not _NAME.fullmatch(toks[1].text):
                raise toks[1].fail("invalid automaton name")
            if toks[1].text in automata:
                raise toks[1].fail("automaton declared twice")
            current = AutomatonDecl(toks[1].text, _int(toks[3], "state count", 1, MAX_STATES), token=toks[1])
            automata[current.name] = current
        elif kw.text == "rule":
            if current is None:
                raise kw.fail("rule outside an automaton block")
            current.rules.append(_parse_rule(toks, current))
        elif kw.text == "collective":
            if members is not None:
                raise kw.fail("collective declared twice")
            members = _parse_collective(toks, group[0].generator_count if group else None)
            coll_tok = kw
            current = None
        else:
            raise kw.fail("unknown keyword")

    last_line = max(1, len(text.splitlines()))
    if group is None:
        raise ParseError(last_line, 1, "missing group declaration")
    if members is None:
        raise ParseError(last_line, 1, "missing collective declaration")
    backend, group_args = group
    n = backend.generator_count

    for mem in members:
        if mem.name not in automata:
            raise mem.token.fail(f"unknown automaton {mem.name}")
        if mem.start_state >= automata[mem.name].states:
            raise mem.token.fail(f"start state {mem.start_state} out of range for {mem.name}")
        if any(d.index > n for d in mem.word):
            raise mem.token.fail("start word uses a generator the group lacks")
    m = len(members)
    for decl in automata.values():
        for r in decl.rules:
            for idx, v in r.slots.items():
                if idx > m:
                    tok = v[2] if isinstance(v, tuple) else r.token
                    raise tok.fail(f"pattern arity: slot {idx} but the collective has {m} members")
            if r.move.index > n:
                raise r.move_token.fail(f"direction out of range for {n} generators")
    used = {mem.name for mem in members}
    for decl in automata.values():
        if decl.name not in used:
            raise decl.token.fail(f"automaton {decl.name} is never used")

    bound = _bind(automata, members)
    positions = tuple(backend.evaluate(mem.word) for mem in members)
    collective = Collective(bound, tuple(mem.start_state for mem in members), positions)
    problems = admissibility_check(collective, backend)
    if problems:
        first = problems[0]
        idx = int(first.split()[1]) - 1 if first.startswith("automaton ") else 0
        tok = automata[members[idx].name].token or coll_tok or group_tok
        raise tok.fail(first)
    return SpecDocument(backend, group_args, automata, members, collective)


def load_spec(path: str | Path) -> SpecDocument:
    path = Path(path)
    return parse_spec(path.read_bytes(), base_dir=path.parent)


def _render_word(word: list[Direction]) -> str:
    if not word:
        return "e"
    parts = []
    for d in word:
        parts.append(f"s{d.index}" if d.letter > 0 else f"s{d.index}^-1")
    return "*".join(parts)


def _render_move(d: Direction) -> str:
    return str(d)


def _render_slot(v) -> str:
    if v is THETA:
        return "theta"
    if v is ANY:
        return "any"
    name, q, _ = v
    return f"{name}.{q}"


def format_spec(doc: SpecDocument) -> str:
    """Canonical text for ``doc``; parsing it back yields an equivalent document."""
    out = [f"group {doc.group_args}"]
    for decl in doc.automata.values():
        out.append("")
        out.append(f"automaton {decl.name} states {decl.states}")
        for r in decl.rules:
            slots = " ".join(f"slot{i}={_render_slot(v)}" for i, v in sorted(r.slots.items()))
            head = f"rule {r.state}" + (f" {slots}" if slots else "")
            out.append(f"{head} -> move {_render_move(r.move)} next {r.next_state}")
    out.append("")
    parts = []
    for mem in doc.members:
        name = mem.name if mem.start_state == 0 else f"{mem.name}:{mem.start_state}"
        parts.append(f"{name} @ {_render_word(mem.word)}")
    out.append("collective " + "  ".join(parts))
    return "\n".join(out) + "\n"


def document_from_collective(backend: GroupBackend, collective: Collective,
                             group_args: str | None = None, radius_cap: int = 10_000) -> SpecDocument:
    """Describe a Python-built collective as a document (one declaration per member).

    Members sharing a name get numbered suffixes so every slot reference is
    unambiguous.
    """
    names = []
    counts: dict[str, int] = {}
    for aut in collective.members:
        counts[aut.name] = counts.get(aut.name, 0) + 1
    seen: dict[str, int] = {}
    for aut in collective.members:
        if counts[aut.name] > 1:
            seen[aut.name] = seen.get(aut.name, 0) + 1
            names.append(f"{aut.name}_{seen[aut.name]}")
        else:
            names.append(aut.name)
    automata: dict[str, AutomatonDecl] = {}
    for i, aut in enumerate(collective.members):
        rules = []
        for r in aut.rules:
            slots: dict[int, object] = {}
            for j, p in enumerate(r.pattern):
                if isinstance(p, Exact):
                    slots[j + 1] = (names[j], p.state, None)
                elif p is THETA:
                    slots[j + 1] = THETA
            rules.append(RuleDecl(r.state, slots, r.move, r.next_state, None, None))
        automata[names[i]] = AutomatonDecl(names[i], aut.state_count, rules)
    members = []
    for i, v in enumerate(collective.start_positions):
        word = shortest_word(backend, v, radius_cap)
        if word is None:
            raise ValueError(f"start position {backend.render(v)} is beyond radius {radius_cap}")
        members.append(MemberDecl(names[i], collective.start_states[i], word))
    if group_args is None:
        if isinstance(backend, MultTable) and backend.source is None:
            raise ValueError("an inline multiplication table has no file to reference")
        group_args = backend.describe()
    return SpecDocument(backend, group_args, automata, members, collective)


def equivalent(a: SpecDocument, b: SpecDocument) -> bool:
    """Same group, same bound collective (rule order included)."""
    return a.backend == b.backend and a.collective == b.collective


def parse_group_args(args: str, base_dir: str | Path | None = None) -> tuple[GroupBackend, str]:
    """Parse the arguments of a ``group`` line, e.g. ``"heisenberg 3"``."""
    toks = _tokenize("group " + args)
    if not toks:
        raise ParseError(1, 1, "empty group description")
    return _parse_group(toks[0], Path(base_dir) if base_dir is not None else None)


def parse_word(text: str, generator_count: int | None = None) -> list[Direction]:
    """Parse a word such as ``s1*s2^-1`` (or ``e``) into directions."""
    return _parse_word(Token(text, 1, 1), generator_count)
