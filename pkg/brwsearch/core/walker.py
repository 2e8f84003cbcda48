"""
Degree-biased random walk search for a maximum-degree node.

From a node u the walk moves to neighbor v with probability proportional
to d(v)^beta and stops on reaching a node of maximum degree. The walk is
available both as an explicit n-state absorbing chain (for analytic
moments on small graphs) and as a seeded Monte Carlo simulator. The module
also holds the two random-sampling baselines the walk is compared with.
"""
import logging
import math
from bisect import bisect_right
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from brwsearch.config import DEFAULT_SEED, WALK_CONFIG
from brwsearch.core.chain import (
    AbsorbingChain,
    AggregateStats,
    absorption_stats,
    aggregate,
    mix_with_absorbed,
    partition_chain,
)
from brwsearch.core.errors import DisconnectedGraphError, GraphError, SamplingError
from brwsearch.core.graph import DegreeProfile, Graph, degree_profile
from brwsearch.core.seeding import trial_rng


# Configure logging
logger = logging.getLogger(__name__)

StartMode = Literal["transient", "all", "custom"]

# Uniforms drawn per refill inside a trial.
_UNIFORM_BLOCK = 64
# Trials per worker task when simulations run on several threads.
_TRIAL_CHUNK = 256


class WalkConfig(BaseModel):
    """Configuration of a biased random walk simulation."""

    beta: float = Field(0.0, ge=0.0)
    seed: int = Field(DEFAULT_SEED, ge=0)
    trials: int = Field(WALK_CONFIG["trials"], ge=1)
    step_cap: int = Field(WALK_CONFIG["step_cap"], ge=1)
    start_mode: StartMode = WALK_CONFIG["start_mode"]
    # Start weights per dense node id, used with start_mode="custom".
    start_weights: Optional[Dict[int, float]] = None
    track_observed: bool = False
    threads: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _check_custom(self) -> "WalkConfig":
        if self.start_mode == "custom" and not self.start_weights:
            raise ValueError("start_mode='custom' requires start_weights")
        return self


class TrialSummary(BaseModel):
    """Sample statistics of absorption times."""

    count: int
    mean: float
    std: float
    stderr: float

    @classmethod
    def from_times(cls, times: Sequence[int]) -> "TrialSummary":
        """Summarize a sample; the standard deviation uses ddof=1."""
        x = np.asarray(times, dtype=float)
        count = int(x.size)
        if count == 0:
            return cls(count=0, mean=math.nan, std=math.nan, stderr=math.nan)
        std = float(x.std(ddof=1)) if count > 1 else 0.0
        return cls(count=count, mean=float(x.mean()), std=std, stderr=std / math.sqrt(count))


class WalkResult(BaseModel):
    """Outcome of simulate_brw."""

    beta: float
    summary: TrialSummary
    trials: List[int]
    starts: List[int]
    times: List[int]
    capped_trials: List[int] = Field(default_factory=list)
    observed_times: Optional[List[int]] = None

    def summary_dict(self) -> Dict[str, float]:
        """JSON-ready summary (beta, mean, std, stderr, trials, capped_trials)."""
        return {
            "beta": self.beta,
            "mean": self.summary.mean,
            "std": self.summary.std,
            "stderr": self.summary.stderr,
            "trials": self.summary.count,
            "capped_trials": len(self.capped_trials),
        }

    def rows(self) -> List[Tuple[int, int, int]]:
        """Per-trial rows (trial, start_node, T) of completed trials."""
        return list(zip(self.trials, self.starts, self.times))


def _biased_weights(log_degrees: np.ndarray, beta: float) -> np.ndarray:
    # exp(beta * log d - max) keeps large beta finite.
    logits = beta * log_degrees
    weights = np.exp(logits - logits.max())
    return weights / weights.sum()


def walk_transition_row(graph: Graph, u: int, beta: float) -> Tuple[np.ndarray, np.ndarray]:
    """Transition distribution of the biased walk out of node u.

    Args:
        graph: Graph being searched
        u: Current node
        beta: Bias exponent (>= 0)

    Returns:
        (neighbors, probabilities) with probabilities proportional to d(v)^beta

    Raises:
        GraphError: If u is isolated
    """
    neighbors = np.asarray(graph.neighbors(u), dtype=np.int64)
    if neighbors.size == 0:
        raise GraphError(f"node {u} is isolated")
    log_degrees = np.log(graph.degrees[neighbors].astype(float))
    return neighbors, _biased_weights(log_degrees, beta)


def _require_connected(graph: Graph) -> None:
    if not graph.is_connected():
        raise DisconnectedGraphError(
            f"{graph} is disconnected; absorption is not guaranteed"
        )


def build_full_chain(graph: Graph, beta: float) -> AbsorbingChain:
    """Build the n-state absorbing chain of the biased walk.

    Absorbing states are exactly the maximum-degree nodes.

    Raises:
        DisconnectedGraphError: If the graph is disconnected
    """
    _require_connected(graph)
    profile = degree_profile(graph)
    d_max = profile.d_max
    matrix = np.zeros((graph.n, graph.n))
    for u in range(graph.n):
        if graph.degree(u) == d_max:
            matrix[u, u] = 1.0
            continue
        neighbors, probs = walk_transition_row(graph, u, beta)
        matrix[u, neighbors] = probs
    return partition_chain(range(graph.n), matrix, lambda v: graph.degree(v) == d_max)


def start_distribution(
    graph: Graph,
    profile: DegreeProfile,
    mode: StartMode = "transient",
    weights: Optional[Dict[int, float]] = None,
) -> np.ndarray:
    """Initial distribution over all nodes for a walk.

    Args:
        graph: Graph being searched
        profile: Its degree profile
        mode: "transient" (uniform off the absorbing set), "all" (uniform)
            or "custom" (normalized ``weights``)
        weights: Nonnegative weights per node for the custom mode

    Raises:
        GraphError: On empty support or negative weights
    """
    p = np.zeros(graph.n)
    if mode == "transient":
        p[list(profile.transient_nodes)] = 1.0
    elif mode == "all":
        p[:] = 1.0
    else:
        for v, w in (weights or {}).items():
            if w < 0:
                raise GraphError(f"negative start weight for node {v}")
            p[int(v)] = w
    total = p.sum()
    if total <= 0:
        raise GraphError(f"start distribution '{mode}' has empty support")
    return p / total


def full_chain_absorption(
    graph: Graph,
    beta: float,
    start_mode: StartMode = "transient",
    start_weights: Optional[Dict[int, float]] = None,
) -> AggregateStats:
    """Analytic mean and variance of the walk's absorption time.

    Solves the n-state chain, so only practical for small graphs.
    """
    profile = degree_profile(graph)
    chain = build_full_chain(graph, beta)
    if chain.n_transient == 0:
        return AggregateStats(0.0, 0.0)
    p = start_distribution(graph, profile, start_mode, start_weights)
    transient = np.asarray(chain.transient, dtype=np.int64)
    mass = p[transient].sum()
    if mass <= 0:
        return AggregateStats(0.0, 0.0)
    stats = aggregate(absorption_stats(chain), p[transient] / mass)
    return mix_with_absorbed(stats, 1.0 - mass)


class BiasedWalker:
    """Precomputed inverse-CDF tables for stepping the biased walk."""

    def __init__(self, graph: Graph, beta: float, profile: Optional[DegreeProfile] = None):
        self.graph = graph
        self.beta = beta
        self.profile = profile or degree_profile(graph)
        d_max = self.profile.d_max
        self.absorbing = [graph.degree(v) == d_max for v in range(graph.n)]
        # A max-degree node lies in the closed neighborhood of v.
        self.sees_max = [
            self.absorbing[v] or any(self.absorbing[u] for u in graph.neighbors(v))
            for v in range(graph.n)
        ]
        self._neighbors: List[Tuple[int, ...]] = list(graph.adjacency)
        self._cumulative: List[List[float]] = []
        for v in range(graph.n):
            if self.absorbing[v] or not graph.neighbors(v):
                self._cumulative.append([])
                continue
            _, probs = walk_transition_row(graph, v, beta)
            self._cumulative.append(np.cumsum(probs).tolist())

    def next_node(self, v: int, u: float) -> int:
        """Neighbor of v selected by the uniform variate u."""
        cumulative = self._cumulative[v]
        idx = min(bisect_right(cumulative, u), len(cumulative) - 1)
        return self._neighbors[v][idx]

    def run(
        self,
        start: int,
        rng: np.random.Generator,
        step_cap: int,
        track_observed: bool = False,
    ) -> Tuple[Optional[int], Optional[int]]:
        """Walk from start until a maximum-degree node is reached.

        Returns:
            (absorption time or None if capped, first observation time or None)
        """
        absorbing, sees_max = self.absorbing, self.sees_max
        v, t = start, 0
        observed = 0 if track_observed and sees_max[v] else None
        uniforms: List[float] = []
        while not absorbing[v]:
            if t >= step_cap:
                return None, observed
            if not uniforms:
                uniforms = rng.random(_UNIFORM_BLOCK).tolist()
            v = self.next_node(v, uniforms.pop())
            t += 1
            if observed is None and track_observed and sees_max[v]:
                observed = t
        return t, observed


def _run_trials(
    walker: BiasedWalker,
    cfg: WalkConfig,
    nodes: np.ndarray,
    cumulative_start: np.ndarray,
    indices: range,
) -> List[Tuple[int, int, Optional[int], Optional[int]]]:
    out = []
    for i in indices:
        rng = trial_rng(cfg.seed, i)
        pick = int(np.searchsorted(cumulative_start, rng.random(), side="right"))
        start = int(nodes[min(pick, nodes.size - 1)])
        t, observed = walker.run(start, rng, cfg.step_cap, cfg.track_observed)
        out.append((i, start, t, observed))
    return out


def simulate_brw(graph: Graph, cfg: WalkConfig) -> WalkResult:
    """Monte Carlo estimate of the walk's absorption time.

    Trial i draws its start node and its steps from a generator derived from
    (cfg.seed, i), so results do not depend on cfg.threads. Trials that hit
    the step cap are excluded from the summary and listed in capped_trials.

    Raises:
        DisconnectedGraphError: If the graph is disconnected
        GraphError: If there is no transient node to start from
    """
    _require_connected(graph)
    profile = degree_profile(graph)
    if cfg.start_mode != "all" and not profile.transient_nodes:
        raise GraphError("every node has maximum degree; nothing to search")

    p = start_distribution(graph, profile, cfg.start_mode, cfg.start_weights)
    nodes = np.flatnonzero(p > 0)
    cumulative_start = np.cumsum(p[nodes])
    walker = BiasedWalker(graph, cfg.beta, profile)

    chunks = [
        range(lo, min(lo + _TRIAL_CHUNK, cfg.trials))
        for lo in range(0, cfg.trials, _TRIAL_CHUNK)
    ]
    if cfg.threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            parts = list(
                pool.map(lambda c: _run_trials(walker, cfg, nodes, cumulative_start, c), chunks)
            )
    else:
        parts = [_run_trials(walker, cfg, nodes, cumulative_start, c) for c in chunks]

    trials, starts, times, capped, observed = [], [], [], [], []
    for part in parts:
        for i, start, t, seen in part:
            if t is None:
                capped.append(i)
                continue
            trials.append(i)
            starts.append(start)
            times.append(t)
            if cfg.track_observed:
                observed.append(seen if seen is not None else t)

    if capped:
        logger.warning(f"{len(capped)} of {cfg.trials} trials hit the step cap of {cfg.step_cap}")
    summary = TrialSummary.from_times(times)
    logger.debug(f"BRW beta={cfg.beta}: mean={summary.mean:.4f} over {summary.count} trials")
    return WalkResult(
        beta=cfg.beta,
        summary=summary,
        trials=trials,
        starts=starts,
        times=times,
        capped_trials=capped,
        observed_times=observed if cfg.track_observed else None,
    )


class SamplingMode(str, Enum):
    """Random-sampling baselines."""

    # Draw nodes without replacement, observing only the drawn node.
    NO_R = "no-r"
    # Draw a node and observe the degrees of all its neighbors too.
    NO_R_N = "no-r-n"


class SamplingResult(BaseModel):
    """Outcome of simulate_sampling."""

    mode: SamplingMode
    summary: TrialSummary
    times: List[int]


def simulate_sampling(
    graph: Graph,
    mode: SamplingMode,
    seed: int,
    trials: int,
    remove_neighbors: bool = True,
) -> SamplingResult:
    """Monte Carlo estimate of the draws needed to find a max-degree node.

    Drawing uniformly from the not-yet-sampled pool is realized as walking a
    uniform random permutation and skipping nodes already removed. In
    "no-r-n" mode a draw succeeds if the drawn node or one of its neighbors
    has maximum degree; with ``remove_neighbors`` the observed neighbors
    leave the pool along with the drawn node.

    Args:
        graph: Nonempty graph
        mode: Sampling baseline
        seed: Master seed; trial i uses a generator derived from (seed, i)
        trials: Number of trials
        remove_neighbors: Remove observed neighbors from the pool (no-r-n)

    Raises:
        GraphError: If the graph is empty
        SamplingError: If the pool is exhausted without success
    """
    if graph.n == 0:
        raise GraphError("cannot sample from an empty graph")
    mode = SamplingMode(mode)
    profile = degree_profile(graph)
    is_max = graph.degrees == profile.d_max
    if mode is SamplingMode.NO_R:
        success = is_max
    else:
        success = is_max.copy()
        for u, v in graph.edges:
            success[u] |= is_max[v]
            success[v] |= is_max[u]
    prune = mode is SamplingMode.NO_R_N and remove_neighbors

    times = []
    for i in range(trials):
        order = trial_rng(seed, i).permutation(graph.n)
        if not prune:
            hits = np.flatnonzero(success[order])
            if hits.size == 0:
                raise SamplingError("sampling pool exhausted without success")
            times.append(int(hits[0]) + 1)
            continue
        removed = np.zeros(graph.n, dtype=bool)
        draws = 0
        for v in order:
            if removed[v]:
                continue
            draws += 1
            if success[v]:
                break
            removed[v] = True
            removed[list(graph.neighbors(v))] = True
        else:
            raise SamplingError("sampling pool exhausted without success")
        times.append(draws)

    return SamplingResult(mode=mode, summary=TrialSummary.from_times(times), times=times)
