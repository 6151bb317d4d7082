"""Exception types shared across the package."""

from __future__ import annotations


class CayleyTrapError(Exception):
    """Base class for every error raised by this package."""


class DirectionError(CayleyTrapError, ValueError):
    """A direction refers to a generator the backend does not have."""


class GroupDefinitionError(CayleyTrapError, ValueError):
    """A backend description is not a valid group with valid generators."""


class CapExceeded(CayleyTrapError):
    """An enumeration or search exceeded its explicit cap."""

    def __init__(self, what: str, cap: int):
        super().__init__(f"{what} exceeded cap {cap}")
        self.cap = cap


class NoMatchingRule(CayleyTrapError):
    """An automaton has no rule for a (state, observation) pair."""

    def __init__(self, automaton: str, state: int, observation: tuple):
        super().__init__(
            f"automaton {automaton!r} has no rule for state {state} "
            f"and observation {observation}"
        )
        self.automaton = automaton
        self.state = state
        self.observation = observation


class MissingExponent(CayleyTrapError):
    """An operation needs a group exponent but the backend carries none."""


class BudgetExhausted(CayleyTrapError):
    """No repetition was found within the step budget."""

    def __init__(self, budget: int, steps_used: int):
        super().__init__(f"no repeat found within budget {budget}")
        self.budget = budget
        self.steps_used = steps_used


class ResourceLimit(CayleyTrapError):
    """An exact computation would exceed a configured size limit."""


class InvariantViolation(CayleyTrapError, AssertionError):
    """A result contradicts an invariant that must always hold."""
