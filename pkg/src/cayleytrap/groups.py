"""Group backends: canonical elements, right multiplication, word metric.

Every backend stores elements as plain hashable Python values (tuples or
ints) in canonical form, so ``==`` on payloads is group equality.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Hashable, Iterable, Sequence

from .errors import CapExceeded, DirectionError, GroupDefinitionError

GroupElement = Hashable


@dataclass(frozen=True, slots=True)
class Direction:
    """A move along the Cayley graph.

    ``letter`` is ``+i`` for generator ``s_i``, ``-i`` for its inverse and
    ``0`` for staying put. Generator indices are 1-based.
    """

    letter: int = 0

    @property
    def kind(self) -> str:
        if self.letter > 0:
            return "gen"
        if self.letter < 0:
            return "inv"
        return "stay"

    @property
    def index(self) -> int:
        return abs(self.letter)

    def inverse(self) -> Direction:
        return Direction(-self.letter)

    def __str__(self) -> str:
        if self.letter == 0:
            return "stay"
        if self.letter > 0:
            return f"s{self.letter}"
        return f"inv s{-self.letter}"


def Gen(i: int) -> Direction:
    if i < 1:
        raise DirectionError(f"generator index must be >= 1, got {i}")
    return Direction(i)


def InvGen(i: int) -> Direction:
    if i < 1:
        raise DirectionError(f"generator index must be >= 1, got {i}")
    return Direction(-i)


STAY = Direction(0)


class GroupBackend(ABC):
    """Multiplication, generators and (optionally) an exponent for one group."""

    generator_count: int
    finite: bool = False

    @property
    def exponent(self) -> int | None:
        return None

    @abstractmethod
    def identity(self) -> GroupElement: ...

    @abstractmethod
    def multiply(self, g: GroupElement, h: GroupElement) -> GroupElement: ...

    @abstractmethod
    def inverse(self, g: GroupElement) -> GroupElement: ...

    @abstractmethod
    def generator(self, i: int) -> GroupElement:
        """The 1-based generator ``s_i``."""

    @abstractmethod
    def render(self, g: GroupElement) -> str: ...

    @abstractmethod
    def describe(self) -> str:
        """The DSL ``group`` line arguments recreating this backend."""

    def directions(self, include_stay: bool = True) -> list[Direction]:
        dirs = [Direction(s * i) for i in range(1, self.generator_count + 1) for s in (1, -1)]
        if include_stay:
            dirs.append(STAY)
        return dirs

    def check_direction(self, d: Direction) -> None:
        if d.index > self.generator_count:
            raise DirectionError(
                f"direction {d} out of range for {self.generator_count} generators"
            )

    def letter(self, d: Direction) -> GroupElement:
        self.check_direction(d)
        if d.letter == 0:
            return self.identity()
        g = self.generator(d.index)
        return g if d.letter > 0 else self.inverse(g)

    def apply(self, v: GroupElement, d: Direction) -> GroupElement:
        """Right-multiply ``v`` by the generator, inverse or identity named by ``d``."""
        if d.letter == 0:
            self.check_direction(d)
            return v
        return self.multiply(v, self.letter(d))

    def power(self, g: GroupElement, k: int) -> GroupElement:
        if k < 0:
            return self.power(self.inverse(g), -k)
        result, base = self.identity(), g
        while k:
            if k & 1:
                result = self.multiply(result, base)
            base = self.multiply(base, base)
            k >>= 1
        return result

    def evaluate(self, word: Iterable[Direction]) -> GroupElement:
        v = self.identity()
        for d in word:
            v = self.apply(v, d)
        return v


@dataclass(frozen=True)
class FreeAbelian(GroupBackend):
    """The grid Z^k with the standard basis as generators."""

    rank: int

    def __post_init__(self):
        if self.rank < 1:
            raise GroupDefinitionError("free abelian rank must be >= 1")

    @property
    def generator_count(self) -> int:
        return self.rank

    def identity(self):
        return (0,) * self.rank

    def multiply(self, g, h):
        return tuple(a + b for a, b in zip(g, h))

    def inverse(self, g):
        return tuple(-a for a in g)

    def generator(self, i):
        return tuple(1 if j == i - 1 else 0 for j in range(self.rank))

    def apply(self, v, d):
        self.check_direction(d)
        if d.letter == 0:
            return v
        i = d.index - 1
        return v[:i] + (v[i] + (1 if d.letter > 0 else -1),) + v[i + 1 :]

    def power(self, g, k):
        return tuple(a * k for a in g)

    def render(self, g):
        return "(" + ",".join(map(str, g)) + ")"

    def describe(self):
        return f"free-abelian {self.rank}"


@dataclass(frozen=True)
class FiniteAbelian(GroupBackend):
    """Z_{n_1} x ... x Z_{n_k}; the exponent is the lcm of the moduli."""

    moduli: tuple[int, ...]
    finite = True

    def __post_init__(self):
        object.__setattr__(self, "moduli", tuple(self.moduli))
        if not self.moduli or any(n < 2 for n in self.moduli):
            raise GroupDefinitionError("finite abelian moduli must all be >= 2")

    @property
    def generator_count(self) -> int:
        return len(self.moduli)

    @property
    def exponent(self) -> int:
        return math.lcm(*self.moduli)

    def identity(self):
        return (0,) * len(self.moduli)

    def multiply(self, g, h):
        return tuple((a + b) % n for a, b, n in zip(g, h, self.moduli))

    def inverse(self, g):
        return tuple((-a) % n for a, n in zip(g, self.moduli))

    def generator(self, i):
        return tuple(1 if j == i - 1 else 0 for j in range(len(self.moduli)))

    def apply(self, v, d):
        self.check_direction(d)
        if d.letter == 0:
            return v
        i = d.index - 1
        step = 1 if d.letter > 0 else -1
        return v[:i] + ((v[i] + step) % self.moduli[i],) + v[i + 1 :]

    def render(self, g):
        return "(" + ",".join(map(str, g)) + ")"

    def describe(self):
        return "finite-abelian " + " ".join(map(str, self.moduli))


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % d for d in range(2, math.isqrt(n) + 1))


@dataclass(frozen=True)
class HeisenbergModP(GroupBackend):
    """Upper unitriangular 3x3 matrices over Z_p, stored as ``(a, b, c)``.

    ``(a,b,c)`` is the matrix with ``a`` and ``b`` on the superdiagonal and
    ``c`` in the corner, so ``(a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')``.
    For odd ``p`` every element has order dividing ``p``; at ``p = 3`` this
    is the free Burnside group B(2, 3).
    """

    p: int
    generator_count = 2
    finite = True

    def __post_init__(self):
        if self.p == 2 or not _is_prime(self.p):
            raise GroupDefinitionError(f"heisenberg modulus must be an odd prime, got {self.p}")

    @property
    def exponent(self) -> int:
        return self.p

    def identity(self):
        return (0, 0, 0)

    def multiply(self, g, h):
        p = self.p
        return ((g[0] + h[0]) % p, (g[1] + h[1]) % p, (g[2] + h[2] + g[0] * h[1]) % p)

    def inverse(self, g):
        a, b, c = g
        p = self.p
        return ((-a) % p, (-b) % p, (a * b - c) % p)

    def generator(self, i):
        if i == 1:
            return (1, 0, 0)
        if i == 2:
            return (0, 1, 0)
        raise DirectionError(f"heisenberg group has 2 generators, not {i}")

    def apply(self, v, d):
        p = self.p
        a, b, c = v
        letter = d.letter
        if letter == 1:
            return ((a + 1) % p, b, c)
        if letter == -1:
            return ((a - 1) % p, b, c)
        if letter == 2:
            return (a, (b + 1) % p, (c + a) % p)
        if letter == -2:
            return (a, (b - 1) % p, (c - a) % p)
        self.check_direction(d)
        return v

    def render(self, g):
        return "(" + ",".join(map(str, g)) + ")"

    def describe(self):
        return f"heisenberg {self.p}"


@dataclass(frozen=True)
class FreeGroup(GroupBackend):
    """The free group F_k; elements are freely reduced tuples of signed letters."""

    rank: int

    def __post_init__(self):
        if self.rank < 1:
            raise GroupDefinitionError("free group rank must be >= 1")

    @property
    def generator_count(self) -> int:
        return self.rank

    def identity(self):
        return ()

    def multiply(self, g, h):
        # Cancel across the junction only; both inputs are already reduced.
        i = 0
        n = min(len(g), len(h))
        while i < n and g[len(g) - 1 - i] == -h[i]:
            i += 1
        return g[: len(g) - i] + h[i:]

    def inverse(self, g):
        return tuple(-x for x in reversed(g))

    def generator(self, i):
        return (i,)

    def apply(self, v, d):
        self.check_direction(d)
        if d.letter == 0:
            return v
        if v and v[-1] == -d.letter:
            return v[:-1]
        return v + (d.letter,)

    def render(self, g):
        if not g:
            return "e"
        return "*".join(f"s{x}" if x > 0 else f"s{-x}^-1" for x in g)

    def describe(self):
        return f"free {self.rank}"


@dataclass(frozen=True)
class MultTable(GroupBackend):
    """A finite group given by its full multiplication table.

    Element 0 must be the identity. ``gens`` are 0-based element indices.
    """

    table: tuple[tuple[int, ...], ...]
    gens: tuple[int, ...]
    source: str | None = field(default=None, compare=False)
    finite = True

    def __post_init__(self):
        object.__setattr__(self, "table", tuple(tuple(row) for row in self.table))
        object.__setattr__(self, "gens", tuple(self.gens))
        _validate_table(self.table, self.gens)
        n = len(self.table)
        inv = [0] * n
        for g in range(n):
            inv[g] = self.table[g].index(0)
        object.__setattr__(self, "_inverses", tuple(inv))

    @property
    def order(self) -> int:
        return len(self.table)

    @property
    def generator_count(self) -> int:
        return len(self.gens)

    @property
    def exponent(self) -> int:
        return math.lcm(*(_element_order(self, g) for g in range(self.order)))

    def identity(self):
        return 0

    def multiply(self, g, h):
        return self.table[g][h]

    def inverse(self, g):
        return self._inverses[g]

    def generator(self, i):
        return self.gens[i - 1]

    def render(self, g):
        return str(g)

    def describe(self):
        return f"table {self.source}" if self.source else "table <inline>"

    def to_text(self) -> str:
        lines = [f"order {self.order} gens " + " ".join(map(str, self.gens))]
        lines += [" ".join(map(str, row)) for row in self.table]
        return "\n".join(lines) + "\n"


def _element_order(backend: GroupBackend, g) -> int:
    e = backend.identity()
    k, x = 1, g
    while x != e:
        x = backend.multiply(x, g)
        k += 1
    return k


def _validate_table(table, gens) -> None:
    n = len(table)
    if n == 0:
        raise GroupDefinitionError("empty multiplication table")
    for r, row in enumerate(table):
        if len(row) != n:
            raise GroupDefinitionError(f"row {r} has {len(row)} entries, expected {n}")
        if any(not 0 <= x < n for x in row):
            raise GroupDefinitionError(f"row {r} has an entry outside 0..{n - 1}")
    for g in range(n):
        if table[0][g] != g or table[g][0] != g:
            raise GroupDefinitionError("element 0 is not the identity")
        if 0 not in table[g]:
            raise GroupDefinitionError(f"element {g} has no inverse")
        if table[g].index(0) != [table[h][g] for h in range(n)].index(0):
            raise GroupDefinitionError(f"element {g} has no two-sided inverse")
    for a in range(n):
        for b in range(n):
            ab = table[a][b]
            row_ab, row_b = table[ab], table[b]
            row_a = table[a]
            for c in range(n):
                if row_ab[c] != row_a[row_b[c]]:
                    raise GroupDefinitionError(f"not associative at ({a},{b},{c})")
    if not gens:
        raise GroupDefinitionError("at least one generator is required")
    for k, g in enumerate(gens):
        if not 0 <= g < n:
            raise GroupDefinitionError(f"generator {g} is not an element")
        if g == 0:
            raise GroupDefinitionError("the identity cannot be a generator")
        inv_g = table[g].index(0)
        for h in gens[:k]:
            if h == g:
                raise GroupDefinitionError(f"generator {g} is repeated")
            if h == inv_g:
                raise GroupDefinitionError(f"generators {h} and {g} are mutually inverse")
    reached = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                for y in (table[x][g], table[x][table[g].index(0)]):
                    if y not in reached:
                        reached.add(y)
                        nxt.append(y)
        frontier = nxt
    if len(reached) != n:
        raise GroupDefinitionError(
            f"generators reach only {len(reached)} of {n} elements"
        )


def parse_mult_table(text: str, source: str | None = None) -> MultTable:
    """Parse ``order n gens i1 i2 ...`` followed by ``n`` rows of ``n`` indices."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise GroupDefinitionError("empty table file")
    head = lines[0].split()
    if len(head) < 4 or head[0] != "order" or head[2] != "gens":
        raise GroupDefinitionError("header must read 'order <n> gens <i1> <i2> ...'")
    try:
        n = int(head[1])
        gens = tuple(int(x) for x in head[3:])
        rows = [tuple(int(x) for x in ln.split()) for ln in lines[1:]]
    except ValueError as exc:
        raise GroupDefinitionError(f"non-integer entry: {exc}") from None
    if len(rows) != n:
        raise GroupDefinitionError(f"expected {n} rows, found {len(rows)}")
    return MultTable(tuple(rows), gens, source=source)


def load_mult_table(path: str | Path) -> MultTable:
    path = Path(path)
    return parse_mult_table(path.read_text(encoding="utf-8"), source=str(path))


def identity(backend: GroupBackend) -> GroupElement:
    return backend.identity()


def apply(backend: GroupBackend, v: GroupElement, d: Direction) -> GroupElement:
    return backend.apply(v, d)


def _bfs_layers(backend: GroupBackend, source):
    """Yield ``(radius, layer)`` pairs of the Cayley graph ball around ``source``."""
    dirs = backend.directions(include_stay=False)
    seen = {source}
    layer = [source]
    radius = 0
    while layer:
        yield radius, layer, seen
        nxt = []
        for x in layer:
            for d in dirs:
                y = backend.apply(x, d)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        layer = nxt
        radius += 1


def graph_distance(backend: GroupBackend, v1, v2, radius_cap: int) -> int | None:
    """Breadth-first distance from ``v1`` to ``v2``, or None beyond ``radius_cap``."""
    for radius, layer, _ in _bfs_layers(backend, v1):
        if radius > radius_cap:
            return None
        if v2 in layer:
            return radius
    return None


def word_metric(backend: GroupBackend, g: GroupElement, radius_cap: int) -> int | None:
    """Length of the shortest word over generators and inverses equal to ``g``.

    Returns None when that length exceeds ``radius_cap``.
    """
    if radius_cap < 0:
        raise ValueError("radius_cap must be >= 0")
    if isinstance(backend, FreeAbelian):
        n = sum(abs(a) for a in g)
    elif isinstance(backend, FreeGroup):
        n = len(g)
    else:
        return graph_distance(backend, backend.identity(), g, radius_cap)
    return n if n <= radius_cap else None


def shortest_word(backend: GroupBackend, g: GroupElement, radius_cap: int) -> list[Direction] | None:
    """A geodesic word for ``g``, or None when ``d(g) > radius_cap``."""
    if isinstance(backend, FreeAbelian):
        word = []
        for i, a in enumerate(g, start=1):
            word += [Direction(i if a > 0 else -i)] * abs(a)
        return word if len(word) <= radius_cap else None
    if isinstance(backend, FreeGroup):
        return [Direction(x) for x in g] if len(g) <= radius_cap else None
    parent = {backend.identity(): None}
    frontier = [backend.identity()]
    dirs = backend.directions(include_stay=False)
    for _ in range(radius_cap + 1):
        if g in parent:
            word = []
            x = g
            while parent[x] is not None:
                prev, d = parent[x]
                word.append(d)
                x = prev
            return word[::-1]
        nxt = []
        for x in frontier:
            for d in dirs:
                y = backend.apply(x, d)
                if y not in parent:
                    parent[y] = (x, d)
                    nxt.append(y)
        frontier = nxt
    return None


def enumerate_elements(backend: GroupBackend, cap: int) -> frozenset:
    """All elements reachable from the identity; raises CapExceeded past ``cap``."""
    if cap < 1:
        raise ValueError("cap must be >= 1")
    return _enumerate_cached(backend, cap)


@lru_cache(maxsize=64)
def _enumerate_cached(backend: GroupBackend, cap: int) -> frozenset:
    seen: set = set()
    for _, _, seen in _bfs_layers(backend, backend.identity()):
        if len(seen) > cap:
            raise CapExceeded("element enumeration", cap)
    return frozenset(seen)


def verify_exponent(backend: GroupBackend, M: int, cap: int) -> GroupElement | None:
    """Check ``g**M == e`` for every element.

    Returns the first counterexample found (in a deterministic order), or
    None when the exponent holds. Raises CapExceeded for groups with more
    than ``cap`` elements, which includes every infinite backend.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if not backend.finite:
        raise CapExceeded("element enumeration", cap)
    e = backend.identity()
    for g in sorted(enumerate_elements(backend, cap), key=repr):
        if backend.power(g, M) != e:
            return g
    return None


def translate(backend: GroupBackend, g, positions: Sequence) -> tuple:
    """Left-translate every position by ``g``."""
    return tuple(backend.multiply(g, v) for v in positions)
