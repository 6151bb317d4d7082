"""Exact evaluation of the H/O recurrences bounding collective periodicity.

``H_1 = 1`` and ``O_1 = Q_A``. For ``l >= 2``::

    H_l = max(max_{i<l} H_i, max_{i+j=l} max(O_i, O_j) + M^2 O_i O_j + 1)
    O_l = (Q_A l)^(l H_l) + H_l

``O_l`` grows like a tower, so values are exact Python ints up to a digit
cap and beyond it either raise ResourceLimit or saturate to ``BEYOND_CAP``.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

from .errors import ResourceLimit

DEFAULT_DIGIT_CAP = 10**6
_LOG2_10 = math.log2(10)


class _BeyondCap:
    """A value known to have more decimal digits than the digit cap.

    Compares greater than any int and absorbs arithmetic; every operation in
    the recurrences is monotone, so this is a sound upper saturation.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "BEYOND_CAP"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("BEYOND_CAP")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True


BEYOND_CAP = _BeyondCap()


@dataclass(frozen=True)
class BoundParams:
    m: int
    Q_A: int
    M: int

    def __post_init__(self):
        if self.m < 1 or self.Q_A < 1 or self.M < 1:
            raise ValueError("m, Q_A and M must all be >= 1")


@dataclass(frozen=True)
class BoundTable:
    params: BoundParams
    H: tuple  # H[l-1] is H_l
    O: tuple

    def H_at(self, l: int):
        return self.H[l - 1]

    def O_at(self, l: int):
        return self.O[l - 1]


def digit_count(n: int) -> int:
    """Number of decimal digits of a non-negative int, without ``str``."""
    if n < 10:
        return 1
    d = int((n.bit_length() - 1) / _LOG2_10) + 1
    # d is exact or one too small.
    return d + 1 if n >= 10**d else d


def _too_big(bits: float, cap: int) -> bool:
    return bits > cap * _LOG2_10 + 1


def compute_bounds(params: BoundParams, digit_cap: int = DEFAULT_DIGIT_CAP,
                   saturate: bool = False) -> BoundTable:
    """Evaluate ``H_1..H_m`` and ``O_1..O_m`` exactly.

    Raises ResourceLimit when a value would exceed ``digit_cap`` decimal
    digits, unless ``saturate`` is set, in which case such values (and all
    values built from them) become ``BEYOND_CAP``.
    """
    M2 = params.M**2
    Q = params.Q_A
    H = [1]
    O = [Q]

    def overflow(what: str):
        if not saturate:
            raise ResourceLimit(f"{what} exceeds {digit_cap} decimal digits")
        return BEYOND_CAP

    for l in range(2, params.m + 1):
        h = max(H)
        for i in range(1, l):
            a, b = O[i - 1], O[l - i - 1]
            if a is BEYOND_CAP or b is BEYOND_CAP:
                cand = overflow(f"H_{l}")
            elif _too_big(a.bit_length() + b.bit_length() + M2.bit_length(), digit_cap):
                cand = overflow(f"H_{l}")
            else:
                cand = max(a, b) + M2 * a * b + 1
            if cand > h:
                h = cand
        H.append(h)
        if h is BEYOND_CAP:
            O.append(overflow(f"O_{l}"))
            continue
        base = Q * l
        # base >= 2 here, so an exponent past ~10^300 is far beyond any cap.
        if h.bit_length() > 1000 or _too_big(l * h * math.log2(base), digit_cap):
            O.append(overflow(f"O_{l}"))
            continue
        O.append(base ** (l * h) + h)
    return BoundTable(params, tuple(H), tuple(O))


def state_count_bound(m: int, Q_A: int) -> int:
    """Upper bound ``(Q_A m)^m`` on distinct (states, co-location partition) pairs."""
    if m < 1 or Q_A < 1:
        raise ValueError("m and Q_A must be >= 1")
    return (Q_A * m) ** m


def check_report(report, table: BoundTable, M: int) -> list[str]:
    """Failures of ``U <= O_m``, ``T_q <= O_m`` and ``T_pair <= M O_m``.

    Single-automaton reports are additionally held to ``U < Q_A``.
    An empty list means the report passes.
    """
    m = table.params.m
    O_m = table.O_at(m)
    failures = []
    if report.U is None or report.T_quotient is None:
        return ["report has no detected cycle"]
    if not report.U <= O_m:
        failures.append(f"U={report.U} exceeds O_{m}")
    if not report.T_quotient <= O_m:
        failures.append(f"T_q={report.T_quotient} exceeds O_{m}")
    if report.T_pair is not None:
        limit = O_m if O_m is BEYOND_CAP else M * O_m
        if not report.T_pair <= limit:
            failures.append(f"T_pair={report.T_pair} exceeds M*O_{m}")
    if m == 1 and not report.U < table.params.Q_A:
        failures.append(f"U={report.U} is not below Q_A={table.params.Q_A}")
    return failures


def to_decimal(n: int) -> str:
    """``str(n)`` without the interpreter's integer-to-string digit limit."""
    get = getattr(sys, "get_int_max_str_digits", None)
    if get is None:
        return str(n)
    old = get()
    sys.set_int_max_str_digits(0)
    try:
        return str(n)
    finally:
        sys.set_int_max_str_digits(old)


def format_value(n) -> str:
    if n is BEYOND_CAP:
        return "beyond digit cap"
    s = to_decimal(n)
    if len(s) > 80:
        s += f" [{len(s)} digits]"
    return s


def format_table(table: BoundTable) -> str:
    lines = []
    for l in range(1, table.params.m + 1):
        lines.append(f"H_{l}={format_value(table.H_at(l))} O_{l}={format_value(table.O_at(l))}")
    return "\n".join(lines)
