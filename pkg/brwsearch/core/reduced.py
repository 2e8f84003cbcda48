"""
Reduced degree-state model of the biased random walk.

The n-state walk is approximated by a chain with one state per distinct
degree. Two degree transition matrices are available:

- the averaged matrix, the mean over all degree-k nodes of the walk's
  degree transition distribution (needs the full graph);
- the approximate matrix, the expectation of that distribution when the
  degree neighborhood of a degree-k node is drawn as a multinomial vector
  with parameters (k, J~(k, .)) (needs only the joint degree matrix).

The approximate matrix requires summing over every composition of k into
|D_k| parts; an enumeration budget keeps that sum explicit about its cost.
"""
import logging
import math
from functools import lru_cache
from typing import Dict, Iterator, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel
from scipy.special import gammaln

from brwsearch.config import ENUMERATION_BUDGET
from brwsearch.core.chain import (
    AbsorbingChain,
    absorption_stats,
    aggregate,
    mix_with_absorbed,
    partition_chain,
)
from brwsearch.core.errors import DegenerateGraphError, DomainError, ModelInfeasibleError
from brwsearch.core.graph import (
    ConditionalDegreeMatrix,
    DegreeProfile,
    Graph,
    conditional_degree_matrix,
    degree_profile,
    joint_degree_matrix,
)


# Configure logging
logger = logging.getLogger(__name__)

Provenance = Literal["averaged", "approximate"]

# Rows of compositions materialized at once.
_BLOCK_ROWS = 1 << 16


class DegreeTransitionMatrix:
    """Row-stochastic delta x delta matrix over the degree set."""

    def __init__(
        self,
        matrix: np.ndarray,
        degree_set: Sequence[int],
        provenance: Provenance,
        beta: float,
        term_count: int = 0,
    ):
        """Initialize the matrix.

        Args:
            matrix: Transition probabilities indexed by degree position
            degree_set: Sorted distinct degrees
            provenance: "averaged" or "approximate"
            beta: Bias exponent used
            term_count: Number of multinomial terms summed (approximate only)
        """
        self.matrix = matrix
        self.degree_set = tuple(degree_set)
        self.index = {k: i for i, k in enumerate(self.degree_set)}
        self.provenance = provenance
        self.beta = beta
        self.term_count = term_count

    def entry(self, k: int, l: int) -> float:
        """Return P(k, l)."""
        return float(self.matrix[self.index[k], self.index[l]])

    def row(self, k: int) -> np.ndarray:
        """Return row P(k, .) aligned with degree_set."""
        return self.matrix[self.index[k]]

    def __repr__(self) -> str:
        return (
            f"DegreeTransitionMatrix({self.provenance}, beta={self.beta}, "
            f"delta={len(self.degree_set)})"
        )


def _normalize_log_weights(log_weights: np.ndarray) -> np.ndarray:
    # Row-wise softmax; -inf entries become exact zeros.
    shifted = log_weights - log_weights.max(axis=-1, keepdims=True)
    weights = np.exp(shifted)
    return weights / weights.sum(axis=-1, keepdims=True)


def _log_biased_weights(counts: np.ndarray, log_degrees: np.ndarray, beta: float) -> np.ndarray:
    with np.errstate(divide="ignore"):
        log_counts = np.log(counts.astype(float))
    return np.where(counts > 0, log_counts + beta * log_degrees, -np.inf)


def biased_degree_distribution(
    counts: Sequence[int],
    degree_set: Sequence[int],
    beta: float,
) -> np.ndarray:
    """Degree transition distribution from a degree neighborhood.

    Entry l is proportional to n_l * l^beta.

    Args:
        counts: Neighbor counts n_l aligned with degree_set
        degree_set: Degrees labelling the counts (all >= 1)
        beta: Bias exponent

    Returns:
        Probability vector aligned with degree_set

    Raises:
        DomainError: If every count is zero
    """
    counts = np.asarray(counts, dtype=np.int64)
    if counts.sum() < 1:
        raise DomainError("degree neighborhood has no neighbors")
    log_degrees = np.log(np.asarray(degree_set, dtype=float))
    return _normalize_log_weights(_log_biased_weights(counts, log_degrees, beta))


def averaged_matrix(
    graph: Graph,
    beta: float,
    profile: Optional[DegreeProfile] = None,
) -> DegreeTransitionMatrix:
    """Average of the walk's degree transition distribution per degree class.

    Raises:
        DegenerateGraphError: If the graph has isolated nodes
    """
    profile = profile or degree_profile(graph)
    if profile.degree_set[0] == 0:
        raise DegenerateGraphError("isolated nodes have no degree transitions")

    log_degrees = np.log(np.asarray(profile.degree_set, dtype=float))
    per_node = _normalize_log_weights(
        _log_biased_weights(profile.neighborhoods, log_degrees, beta)
    )
    totals = np.zeros((profile.delta, profile.delta))
    np.add.at(totals, profile.positions, per_node)
    matrix = totals / profile.class_sizes[:, None]
    return DegreeTransitionMatrix(matrix, profile.degree_set, "averaged", beta)


def enumeration_size(k: int, parts: int) -> int:
    """Number of compositions of k into ``parts`` nonnegative parts."""
    return math.comb(k + parts - 1, parts - 1)


@lru_cache(maxsize=128)
def _compositions(total: int, parts: int) -> np.ndarray:
    if parts == 1:
        block = np.array([[total]], dtype=np.int64)
    else:
        block = np.vstack([
            np.column_stack([
                np.full(enumeration_size(total - first, parts - 1), first, dtype=np.int64),
                _compositions(total - first, parts - 1),
            ])
            for first in range(total, -1, -1)
        ])
    block.flags.writeable = False
    return block


def _composition_blocks(
    total: int,
    parts: int,
    prefix: Tuple[int, ...] = (),
    block_rows: int = _BLOCK_ROWS,
) -> Iterator[np.ndarray]:
    # Split on leading parts until the remainder fits in one block.
    if enumeration_size(total, parts) <= block_rows or parts == 1:
        tail = _compositions(total, parts)
        if prefix:
            head = np.broadcast_to(np.asarray(prefix, dtype=np.int64), (tail.shape[0], len(prefix)))
            yield np.hstack([head, tail])
        else:
            yield tail
        return
    for first in range(total, -1, -1):
        yield from _composition_blocks(total - first, parts - 1, prefix + (first,), block_rows)


def multinomial_support(
    k: int,
    support: Sequence[int],
    budget: int = ENUMERATION_BUDGET,
) -> Iterator[Tuple[int, ...]]:
    """Lazily enumerate every composition of k over a support.

    Args:
        k: Total count (a degree)
        support: The degrees carrying mass (D_k); entries outside it are 0
        budget: Largest acceptable number of compositions

    Yields:
        Count tuples aligned with ``support``

    Raises:
        DomainError: If k < 1 or the support is empty
        ModelInfeasibleError: If the count exceeds the budget
    """
    if k < 1 or not support:
        raise DomainError(f"need k >= 1 and a nonempty support, got k={k}, support={support}")
    size = enumeration_size(k, len(support))
    if size > budget:
        raise ModelInfeasibleError(size, budget, d_max=k)
    for block in _composition_blocks(k, len(support)):
        for row in block:
            yield tuple(int(x) for x in row)


class _Neumaier:
    """Compensated vector accumulator."""

    def __init__(self, size: int):
        self.total = np.zeros(size)
        self.carry = np.zeros(size)

    def add(self, value: np.ndarray) -> None:
        t = self.total + value
        big = np.abs(self.total) >= np.abs(value)
        self.carry += np.where(big, (self.total - t) + value, (value - t) + self.total)
        self.total = t

    def result(self) -> np.ndarray:
        return self.total + self.carry


def approximate_matrix(
    conditional: ConditionalDegreeMatrix,
    beta: float,
    profile: DegreeProfile,
    budget: int = ENUMERATION_BUDGET,
    skip_absorbing: bool = False,
) -> DegreeTransitionMatrix:
    """Expected degree transition distribution under multinomial neighborhoods.

    Entry (k, l) is E[p_l(N)] with N ~ mult(k, J~(k, .)), summed exactly over
    the compositions of k supported on D_k. Multinomial probabilities are
    evaluated in log space and accumulated with compensated summation.

    Args:
        conditional: Conditional degree matrix J~
        beta: Bias exponent (>= 0)
        profile: Degree profile of the graph J~ came from
        budget: Largest acceptable total number of compositions
        skip_absorbing: Leave the d_max row as a unit self-loop instead of
            enumerating it (the reduced chain discards that row anyway)

    Raises:
        DomainError: If beta is negative
        ModelInfeasibleError: If the enumeration exceeds the budget
    """
    if beta < 0:
        raise DomainError(f"beta must be nonnegative, got {beta}")
    degree_set = conditional.degree_set
    delta = len(degree_set)
    rows = [i for i in range(delta) if not (skip_absorbing and degree_set[i] == profile.d_max)]

    supports = {i: np.flatnonzero(conditional.matrix[i] > 0) for i in rows}
    terms = sum(enumeration_size(degree_set[i], supports[i].size) for i in rows)
    if terms > budget:
        raise ModelInfeasibleError(terms, budget, d_max=profile.d_max)

    log_degrees = np.log(np.asarray(degree_set, dtype=float))
    matrix = np.zeros((delta, delta))
    for i in range(delta):
        if i not in supports:
            matrix[i, i] = 1.0
            continue
        k = degree_set[i]
        cols = supports[i]
        log_p = np.log(conditional.matrix[i, cols])
        accumulator = _Neumaier(cols.size)
        for block in _composition_blocks(k, cols.size):
            log_prob = gammaln(k + 1) - gammaln(block + 1).sum(axis=1) + block @ log_p
            inner = _normalize_log_weights(_log_biased_weights(block, log_degrees[cols], beta))
            accumulator.add(np.exp(log_prob) @ inner)
        matrix[i, cols] = accumulator.result()

    logger.debug(f"Approximate matrix at beta={beta}: {terms} terms over {len(rows)} rows")
    return DegreeTransitionMatrix(matrix, degree_set, "approximate", beta, term_count=terms)


def enumeration_terms(graph: Graph, include_absorbing: bool = False) -> int:
    """Number of compositions approximate_matrix sums over for a graph."""
    profile = degree_profile(graph)
    joint = joint_degree_matrix(graph, profile)
    return sum(
        enumeration_size(k, int(np.count_nonzero(joint.matrix[i])))
        for i, k in enumerate(profile.degree_set)
        if k > 0 and (include_absorbing or k != profile.d_max)
    )


def build_reduced_chain(p: DegreeTransitionMatrix, profile: DegreeProfile) -> AbsorbingChain:
    """Absorbing chain over degrees with d_max as the single absorbing state.

    Raises:
        ReducibleChainError: If d_max is unreachable from some degree
    """
    d_max = profile.d_max
    matrix = np.array(p.matrix, dtype=float)
    absorbing = p.index[d_max]
    matrix[absorbing, :] = 0.0
    matrix[absorbing, absorbing] = 1.0
    chain = partition_chain(p.degree_set, matrix, lambda k: k == d_max)
    chain.check_absorbing()
    return chain


class ModelResult(BaseModel):
    """Analytic absorption statistics of the reduced chain."""

    beta: float
    mean: float
    std: float
    variance: float
    feasible: bool = True
    term_count: int = 0
    no_transient: bool = False
    matrix: Provenance = "approximate"

    def summary_dict(self) -> Dict[str, object]:
        """JSON-ready summary (beta, E_T, Std_T, feasible, term_count)."""
        return {
            "beta": self.beta,
            "E_T": self.mean,
            "Std_T": self.std,
            "feasible": self.feasible,
            "term_count": self.term_count,
        }


def degree_start_distribution(
    profile: DegreeProfile,
    mode: str = "transient",
    weights: Optional[Dict[int, float]] = None,
) -> np.ndarray:
    """Initial distribution over the degree set.

    "transient" restricts p_D to the transient degrees and renormalizes,
    "all" is p_D itself, "custom" sums node ``weights`` per degree class.
    """
    if mode == "custom":
        p = np.zeros(profile.delta)
        for v, w in (weights or {}).items():
            p[profile.positions[int(v)]] += w
    else:
        p = profile.distribution.copy()
        if mode == "transient":
            p[-1] = 0.0
    total = p.sum()
    if total <= 0:
        raise DomainError(f"start distribution '{mode}' has empty support")
    return p / total


def model_absorption(
    graph: Graph,
    beta: float,
    start_mode: str = "transient",
    matrix: Provenance = "approximate",
    budget: int = ENUMERATION_BUDGET,
    start_weights: Optional[Dict[int, float]] = None,
) -> ModelResult:
    """Mean and standard deviation of the reduced chain's absorption time.

    Graphs where every node has maximum degree are already absorbed: the
    result has mean 0 and ``no_transient`` set.

    Args:
        graph: Graph to model
        beta: Bias exponent
        start_mode: "transient", "all" or "custom" (see degree_start_distribution)
        matrix: Degree transition matrix to use ("approximate" or "averaged")
        budget: Enumeration budget for the approximate matrix
        start_weights: Node weights for the custom start mode

    Raises:
        ModelInfeasibleError: If the enumeration exceeds the budget
    """
    profile = degree_profile(graph)
    if profile.delta == 1:
        return ModelResult(
            beta=beta, mean=0.0, std=0.0, variance=0.0, no_transient=True, matrix=matrix
        )

    if matrix == "approximate":
        conditional = conditional_degree_matrix(joint_degree_matrix(graph, profile))
        p = approximate_matrix(conditional, beta, profile, budget, skip_absorbing=True)
    else:
        p = averaged_matrix(graph, beta, profile)

    chain = build_reduced_chain(p, profile)
    stats = absorption_stats(chain)
    start = degree_start_distribution(profile, start_mode, start_weights)
    transient_mass = start[:-1].sum()
    if transient_mass <= 0:
        return ModelResult(
            beta=beta,
            mean=0.0,
            std=0.0,
            variance=0.0,
            term_count=p.term_count,
            matrix=matrix,
        )
    result = mix_with_absorbed(aggregate(stats, start[:-1] / transient_mass), 1.0 - transient_mass)
    return ModelResult(
        beta=beta,
        mean=result.mean,
        std=result.std,
        variance=result.variance,
        term_count=p.term_count,
        matrix=matrix,
    )


def matrix_gap(graph: Graph, beta: float, budget: int = ENUMERATION_BUDGET) -> float:
    """Largest entrywise gap between the averaged and approximate matrices.

    The reduced model is expected to track the walk when this is small.
    """
    profile = degree_profile(graph)
    conditional = conditional_degree_matrix(joint_degree_matrix(graph, profile))
    approx = approximate_matrix(conditional, beta, profile, budget)
    averaged = averaged_matrix(graph, beta, profile)
    return float(np.max(np.abs(approx.matrix - averaged.matrix)))
