"""
Exception hierarchy for the brwsearch toolkit.

Every error raised by the library derives from BrwSearchError so callers
(the CLI in particular) can catch the whole family in one place.
"""
from typing import Iterable, Optional


class BrwSearchError(Exception):
    """Base class for all brwsearch errors."""


class EdgeListError(BrwSearchError, ValueError):
    """An edge-list document could not be parsed."""

    def __init__(self, line: int, message: str):
        """Initialize the error.

        Args:
            line: 1-based line number of the offending line
            message: Description of the problem
        """
        self.line = line
        super().__init__(f"line {line}: {message}")


class GraphError(BrwSearchError, ValueError):
    """Invalid graph construction."""


class DisconnectedGraphError(GraphError):
    """The graph is disconnected, so absorption is not guaranteed."""


class DegenerateGraphError(GraphError):
    """A degree class has no incident edges (isolated nodes)."""


class UndefinedAssortativityError(GraphError):
    """Endpoint degrees have zero variance, so assortativity is undefined."""


class ChainError(BrwSearchError, ValueError):
    """Malformed transition matrix or absorbing state."""


class ReducibleChainError(ChainError):
    """The absorbing set is unreachable from some transient states."""

    def __init__(self, states: Iterable[object]):
        self.states = tuple(states)
        preview = ", ".join(str(s) for s in self.states[:10])
        super().__init__(f"non-absorbing from states: {preview}")


class SingularChainError(ChainError):
    """I - Q is singular or numerically near-singular."""


class StepCapExceededError(BrwSearchError):
    """A single simulated run exceeded its step cap."""

    def __init__(self, steps: int):
        self.steps = steps
        super().__init__(
            f"step cap of {steps} exceeded; the chain is probably reducible"
        )


class ModelInfeasibleError(BrwSearchError):
    """The multinomial enumeration would exceed the configured budget."""

    def __init__(self, terms: int, budget: int, d_max: Optional[int] = None):
        self.terms = terms
        self.budget = budget
        self.d_max = d_max
        super().__init__(
            f"model infeasible for d_max={d_max}: {terms} terms exceed "
            f"the enumeration budget of {budget}"
        )


class SamplingError(BrwSearchError):
    """The sampling pool ran dry before a max-degree node was seen."""


class DomainError(BrwSearchError, ValueError):
    """Parameters lie outside the validity region of a formula."""


class ReportError(BrwSearchError):
    """Results could not be written."""
