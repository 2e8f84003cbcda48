"""
Absorbing discrete-time Markov chain numerics.

An absorbing chain is partitioned into transient and absorbing states with
transition blocks Q (transient -> transient) and R (transient -> absorbing).
From the fundamental matrix N = (I - Q)^{-1} follow the mean and variance
of the absorption time from every transient state; given an initial
distribution over transient states, these aggregate into the mean and
variance of a single absorption time.

The fundamental matrix is never formed explicitly: both moments come from
LU solves against I - Q.
"""
import logging
import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Callable, Hashable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as spl
from scipy.linalg import lapack

from brwsearch.config import CONDITION_LIMIT, DEFAULT_STEP_CAP, ROW_SUM_TOLERANCE
from brwsearch.core.errors import (
    ChainError,
    ReducibleChainError,
    SingularChainError,
    StepCapExceededError,
)


# Configure logging
logger = logging.getLogger(__name__)


class AbsorbingChain:
    """Absorbing chain with transient states listed before absorbing ones."""

    def __init__(
        self,
        transient: Sequence[Hashable],
        absorbing: Sequence[Hashable],
        q: np.ndarray,
        r: np.ndarray,
    ):
        """Initialize the chain from its blocks.

        Args:
            transient: Labels of the transient states (row order of Q and R)
            absorbing: Labels of the absorbing states (column order of R)
            q: Transient-to-transient block
            r: Transient-to-absorbing block
        """
        self.transient = tuple(transient)
        self.absorbing = tuple(absorbing)
        self.q = np.asarray(q, dtype=float).reshape(len(self.transient), len(self.transient))
        self.r = np.asarray(r, dtype=float).reshape(len(self.transient), len(self.absorbing))
        self.q.flags.writeable = False
        self.r.flags.writeable = False
        self._position = {label: i for i, label in enumerate(self.transient)}

    @property
    def n_transient(self) -> int:
        """Number of transient states."""
        return len(self.transient)

    @property
    def n_absorbing(self) -> int:
        """Number of absorbing states."""
        return len(self.absorbing)

    @property
    def labels(self) -> Tuple[Hashable, ...]:
        """All state labels, transient first."""
        return self.transient + self.absorbing

    def position(self, label: Hashable) -> int:
        """Row index of a transient state.

        Raises:
            ChainError: If the label is not a transient state
        """
        try:
            return self._position[label]
        except KeyError:
            raise ChainError(f"{label!r} is not a transient state") from None

    def unreachable_states(self) -> List[Hashable]:
        """Transient states from which no absorbing state can be reached.

        Runs a backward reachability sweep over the support graph of [R | Q].
        """
        reaches = (self.r > 0).any(axis=1)
        support = self.q > 0
        while True:
            grown = reaches | (support[:, reaches]).any(axis=1)
            if np.array_equal(grown, reaches):
                break
            reaches = grown
        return [self.transient[i] for i in np.flatnonzero(~reaches)]

    def check_absorbing(self) -> None:
        """Raise ReducibleChainError if some transient state cannot absorb."""
        stuck = self.unreachable_states()
        if stuck:
            raise ReducibleChainError(stuck)

    def full_matrix(self) -> np.ndarray:
        """Canonical-form transition matrix [[Q, R], [0, I]]."""
        nt, na = self.n_transient, self.n_absorbing
        full = np.zeros((nt + na, nt + na))
        full[:nt, :nt] = self.q
        full[:nt, nt:] = self.r
        full[nt:, nt:] = np.eye(na)
        return full

    def __repr__(self) -> str:
        return f"AbsorbingChain(transient={self.n_transient}, absorbing={self.n_absorbing})"


def partition_chain(
    labels: Sequence[Hashable],
    matrix: np.ndarray,
    is_absorbing: Callable[[Hashable], bool],
    tolerance: float = ROW_SUM_TOLERANCE,
) -> AbsorbingChain:
    """Partition a transition matrix into its absorbing canonical form.

    Args:
        labels: State labels in matrix order
        matrix: Square row-stochastic transition matrix
        is_absorbing: Predicate selecting the absorbing states
        tolerance: Allowed deviation of row sums from 1

    Returns:
        AbsorbingChain preserving the relative order of states

    Raises:
        ChainError: On shape, range or row-sum violations, or if a declared
            absorbing state does not have self-probability 1
    """
    matrix = np.asarray(matrix, dtype=float)
    labels = tuple(labels)
    size = len(labels)
    if matrix.shape != (size, size):
        raise ChainError(f"expected a {size}x{size} matrix, got shape {matrix.shape}")
    if size and (matrix.min() < 0.0 or matrix.max() > 1.0):
        raise ChainError("transition probabilities must lie in [0, 1]")
    sums = matrix.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > tolerance)
    if bad.size:
        raise ChainError(f"row {labels[bad[0]]!r} sums to {sums[bad[0]]!r}, not 1")

    absorbing_idx = [i for i, s in enumerate(labels) if is_absorbing(s)]
    transient_idx = [i for i, s in enumerate(labels) if not is_absorbing(s)]
    for i in absorbing_idx:
        if abs(matrix[i, i] - 1.0) > tolerance:
            raise ChainError(
                f"absorbing state {labels[i]!r} has self-probability {matrix[i, i]!r}"
            )

    q = matrix[np.ix_(transient_idx, transient_idx)]
    r = matrix[np.ix_(transient_idx, absorbing_idx)]
    return AbsorbingChain(
        [labels[i] for i in transient_idx],
        [labels[i] for i in absorbing_idx],
        q,
        r,
    )


@dataclass(frozen=True)
class AbsorptionStats:
    """Per-state absorption-time moments."""

    states: Tuple[Hashable, ...]
    mean: np.ndarray
    variance: np.ndarray


def _condition_estimate(a: np.ndarray, lu: Tuple[np.ndarray, np.ndarray]) -> float:
    # 1-norm estimate from the LU factors; a zero pivot means singular.
    factors = lu[0]
    if not np.all(np.diag(factors)):
        return math.inf
    rcond, info = lapack.dgecon(factors, np.linalg.norm(a, 1), norm="1")
    if info != 0 or not rcond > 0.0:
        return math.inf
    return 1.0 / rcond


def absorption_stats(
    chain: AbsorbingChain,
    inner_product: bool = False,
    condition_limit: float = CONDITION_LIMIT,
) -> AbsorptionStats:
    """Mean and variance of the absorption time from every transient state.

    mu solves (I - Q) mu = 1 and the variance is (2N - I) mu - mu o mu, with
    N mu obtained by a second solve against the same LU factors. With
    ``inner_product`` the last term is the broadcast inner product
    (mu^T mu) 1 instead of the elementwise square; that form is kept only
    for comparison output and does not match simulation.

    Args:
        chain: Absorbing chain
        inner_product: Use the inner-product variance form
        condition_limit: Largest acceptable 1-norm condition number of I - Q

    Returns:
        AbsorptionStats aligned with chain.transient

    Raises:
        ReducibleChainError: If some transient state cannot reach absorption
        SingularChainError: If I - Q is singular or ill-conditioned
    """
    nt = chain.n_transient
    if nt == 0:
        empty = np.zeros(0)
        return AbsorptionStats((), empty, empty.copy())

    chain.check_absorbing()

    a = np.eye(nt) - chain.q
    lu = spl.lu_factor(a, check_finite=True)
    condition = _condition_estimate(a, lu)
    if not np.isfinite(condition) or condition > condition_limit:
        raise SingularChainError(
            f"non-absorbing from some state: cond(I - Q) = {condition:.3e}"
        )
    mean = spl.lu_solve(lu, np.ones(nt))
    n_mean = spl.lu_solve(lu, mean)
    if inner_product:
        variance = 2.0 * n_mean - mean - float(mean @ mean)
    else:
        variance = np.maximum(2.0 * n_mean - mean - mean * mean, 0.0)
    return AbsorptionStats(chain.transient, mean, variance)


@dataclass(frozen=True)
class AggregateStats:
    """Absorption-time moments under an initial distribution."""

    mean: float
    variance: float

    @property
    def std(self) -> float:
        """Standard deviation."""
        return math.sqrt(max(self.variance, 0.0))


def aggregate(
    stats: AbsorptionStats,
    initial: Sequence[float],
    within_only: bool = False,
) -> AggregateStats:
    """Combine per-state moments under an initial distribution.

    The variance follows the law of total variance,
    Var(T) = sum p sigma^2 + sum p (mu - E[T])^2. ``within_only`` keeps
    only the first term.

    Args:
        stats: Per-state moments
        initial: Distribution over stats.states
        within_only: Drop the between-state dispersion term

    Raises:
        ChainError: On dimension mismatch or an invalid distribution
    """
    p = np.asarray(initial, dtype=float)
    if p.shape != stats.mean.shape:
        raise ChainError(
            f"initial distribution has {p.size} entries, expected {stats.mean.size}"
        )
    if p.size == 0:
        return AggregateStats(0.0, 0.0)
    if (p < 0).any() or abs(p.sum() - 1.0) > 1e-12:
        raise ChainError("initial distribution must be nonnegative and sum to 1")

    mean = float(p @ stats.mean)
    within = float(p @ stats.variance)
    if within_only:
        return AggregateStats(mean, within)
    between = float(p @ (stats.mean - mean) ** 2)
    return AggregateStats(mean, within + between)


def mix_with_absorbed(stats: AggregateStats, absorbed_mass: float) -> AggregateStats:
    """Mix a transient-start aggregate with a point mass at T = 0.

    Used when walks may start on an absorbing state with total probability
    ``absorbed_mass``.
    """
    w = 1.0 - absorbed_mass
    mean = w * stats.mean
    second = w * (stats.variance + stats.mean ** 2)
    return AggregateStats(mean, max(second - mean ** 2, 0.0))


class ChainSampler:
    """Inverse-CDF sampler over the rows of [Q | R]."""

    def __init__(self, chain: AbsorbingChain):
        self.chain = chain
        rows = np.hstack([chain.q, chain.r])
        cumulative = np.cumsum(rows, axis=1)
        # Last positive column absorbs round-off in the final cumulative value.
        last = np.array(
            [np.flatnonzero(row > 0)[-1] if (row > 0).any() else 0 for row in rows],
            dtype=np.int64,
        )
        self._cumulative = cumulative
        self._rows: List[List[float]] = cumulative.tolist()
        self._last = last

    def run(self, start: int, rng: np.random.Generator, step_cap: int = DEFAULT_STEP_CAP) -> int:
        """Simulate one absorption time from transient position ``start``.

        Raises:
            StepCapExceededError: If absorption takes more than step_cap steps
        """
        nt = self.chain.n_transient
        state, steps = start, 0
        while state < nt:
            if steps >= step_cap:
                raise StepCapExceededError(step_cap)
            col = bisect_right(self._rows[state], rng.random())
            state = min(col, int(self._last[state]))
            steps += 1
        return steps

    def run_many(
        self,
        start: int,
        trials: int,
        rng: np.random.Generator,
        step_cap: int = DEFAULT_STEP_CAP,
    ) -> np.ndarray:
        """Simulate many absorption times from one start, vectorized over trials.

        Raises:
            StepCapExceededError: If any trial is still transient at step_cap
        """
        nt = self.chain.n_transient
        states = np.full(trials, start, dtype=np.int64)
        times = np.zeros(trials, dtype=np.int64)
        active = np.flatnonzero(states < nt)
        steps = 0
        while active.size:
            if steps >= step_cap:
                raise StepCapExceededError(step_cap)
            u = rng.random(active.size)
            cum = self._cumulative[states[active]]
            cols = (u[:, None] >= cum).sum(axis=1)
            states[active] = np.minimum(cols, self._last[states[active]])
            steps += 1
            times[active] = steps
            active = active[states[active] < nt]
        return times


def simulate_chain(
    chain: AbsorbingChain,
    start: Hashable,
    seed: int,
    step_cap: int = DEFAULT_STEP_CAP,
) -> int:
    """Simulate the absorption time from one transient state.

    Args:
        chain: Absorbing chain
        start: Label of a transient state
        seed: RNG seed
        step_cap: Maximum number of steps before giving up

    Returns:
        Number of steps until the first entry into the absorbing set

    Raises:
        ChainError: If start is not transient
        StepCapExceededError: If the step cap is exceeded
    """
    position = chain.position(start)
    return ChainSampler(chain).run(position, np.random.default_rng(seed), step_cap)


def simulate_chain_times(
    chain: AbsorbingChain,
    start: Hashable,
    trials: int,
    seed: int,
    step_cap: int = DEFAULT_STEP_CAP,
) -> np.ndarray:
    """Simulate ``trials`` independent absorption times from one state."""
    position = chain.position(start)
    return ChainSampler(chain).run_many(
        position, trials, np.random.default_rng(seed), step_cap
    )


def stats_from_samples(times: np.ndarray) -> Tuple[float, float, Optional[float], Optional[float]]:
    """Sample mean and variance with their standard errors.

    Returns:
        (mean, variance, stderr of mean, stderr of variance); the variance
        standard error uses the fourth central moment and is None for
        fewer than two samples.
    """
    x = np.asarray(times, dtype=float)
    count = x.size
    mean = float(x.mean())
    if count < 2:
        return mean, 0.0, None, None
    var = float(x.var(ddof=1))
    m4 = float(np.mean((x - mean) ** 4))
    se_var = math.sqrt(max(m4 - var * var, 0.0) / count)
    return mean, var, math.sqrt(var / count), se_var
