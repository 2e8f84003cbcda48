"""
Erdős–Rényi graph generation and parameter selection.

Besides sampling G(n, p), this module answers the two sizing questions that
come up when preparing search experiments: how large the maximum degree of
G(n, lambda/n) is expected to be (a Chernoff-style bound evaluated with the
Lambert W function), and which fraction of nodes ends up in the giant
component.
"""
import logging
import math
from typing import Callable, Optional

import networkx as nx
from pydantic import BaseModel, Field, model_validator
from scipy.optimize import bisect, brentq

from brwsearch.config import DEFAULT_SEED
from brwsearch.core.errors import DomainError
from brwsearch.core.graph import Graph


# Configure logging
logger = logging.getLogger(__name__)

# -1/e, the branch point of the principal Lambert W branch.
_BRANCH_POINT = -math.exp(-1.0)


class ErSpec(BaseModel):
    """Parameters of an Erdős–Rényi graph.

    Exactly one of ``p`` and ``lam`` is given; ``lam`` means p = lam / n.
    """

    n: int = Field(..., ge=2)
    p: Optional[float] = Field(None, ge=0.0, le=1.0)
    lam: Optional[float] = Field(None, ge=0.0)
    seed: int = Field(DEFAULT_SEED, ge=0)

    @model_validator(mode="after")
    def _check_probability(self) -> "ErSpec":
        if (self.p is None) == (self.lam is None):
            raise ValueError("give exactly one of p and lam")
        if self.lam is not None and self.lam > self.n:
            raise ValueError(f"lam={self.lam} gives p > 1 for n={self.n}")
        return self

    @property
    def edge_probability(self) -> float:
        """Edge inclusion probability p."""
        if self.p is not None:
            return self.p
        return self.lam / self.n

    @property
    def mean_degree(self) -> float:
        """Expected degree (n - 1) p."""
        return (self.n - 1) * self.edge_probability


def generate_er(spec: ErSpec) -> Graph:
    """Sample G(n, p) with the seeded geometric-skip method.

    Args:
        spec: Graph parameters and seed

    Returns:
        Graph over nodes 0..n-1
    """
    p = spec.edge_probability
    graph = Graph.from_networkx(nx.fast_gnp_random_graph(spec.n, p, seed=spec.seed))
    logger.info(f"Generated ER graph n={graph.n}, p={p:.6g}, m={graph.m}, seed={spec.seed}")
    return graph


def extract_giant_component(graph: Graph) -> Graph:
    """Induced subgraph on the largest connected component.

    Ties go to the component holding the smallest node id. The result keeps
    the original external ids in its node_ids map.
    """
    if graph.n == 0:
        return graph
    giant = graph.components()[0]
    if len(giant) == graph.n:
        return graph
    logger.debug(f"Giant component holds {len(giant)} of {graph.n} nodes")
    return graph.subgraph(giant)


def lambert_w(x: float, tol: float = 1e-12, max_iter: int = 100) -> float:
    """Principal branch W0 of the Lambert W function for real x >= -1/e.

    Starts from the branch-point series near -1/e and from
    log(x) - log(log(x)) elsewhere, then runs Halley's iteration until the
    residual |w e^w - x| is within ``tol`` (relative to max(1, |x|)).

    Raises:
        DomainError: If x < -1/e or x is not finite
    """
    if not math.isfinite(x) or x < _BRANCH_POINT:
        raise DomainError(f"Lambert W0 is undefined at x={x}")
    if x == 0.0:
        return 0.0
    if x == _BRANCH_POINT:
        return -1.0

    if abs(x - _BRANCH_POINT) <= 1.5:
        w = math.sqrt(2.0 * (math.e * x + 1.0)) - 1.0
    else:
        log_x = math.log(x)
        w = log_x - math.log(log_x)

    scale = max(1.0, abs(x))
    for _ in range(max_iter):
        ew = math.exp(w)
        residual = w * ew - x
        if abs(residual) <= tol * scale:
            return w
        w1 = w + 1.0
        if w1 == 0.0:
            break
        w -= residual / (ew * w1 - (w + 2.0) * residual / (2.0 * w1))
    return w


def mgf_max_bound(n: int, log_mgf: Callable[[float], float], t: float) -> float:
    """Bound on E[max of n variables] from their moment generating function.

    E[Y_max] <= (log n + log phi(t)) / t for every t > 0.

    Raises:
        DomainError: If t <= 0 or n < 1
    """
    if t <= 0 or n < 1:
        raise DomainError(f"need t > 0 and n >= 1, got t={t}, n={n}")
    return (math.log(n) + log_mgf(t)) / t


def poisson_max_bound(n: int, lam: float, t: float) -> float:
    """mgf_max_bound for Poisson(lam) degrees, log phi(t) = lam (e^t - 1)."""
    return mgf_max_bound(n, lambda s: lam * math.expm1(s), t)


def _check_bound_domain(n: int, lam: float) -> float:
    log_n = math.log(n) if n >= 1 else -math.inf
    if lam <= 0 or log_n <= lam:
        raise DomainError(f"max-degree bound needs log(n) > lam > 0, got n={n}, lam={lam}")
    return log_n


def optimal_bound_parameter(n: int, lam: float) -> float:
    """The t minimizing poisson_max_bound, t* = 1 + W((log n - lam) / (e lam))."""
    log_n = _check_bound_domain(n, lam)
    return 1.0 + lambert_w((log_n - lam) / (math.e * lam))


def expected_max_degree_bound(n: int, lam: float) -> float:
    """Upper bound on the expected maximum degree of G(n, lam/n).

    Degrees are treated as Poisson(lam); the MGF bound minimized over t
    gives (log n - lam) / W((log n - lam) / (e lam)).

    Raises:
        DomainError: Unless log(n) > lam > 0
    """
    log_n = _check_bound_domain(n, lam)
    a = log_n - lam
    return a / lambert_w(a / (math.e * lam))


def lambda_for_max_degree(n: int, target: float) -> float:
    """Mean degree lam whose expected max-degree bound equals ``target``.

    The bound increases with lam from 0 towards e log(n), so targets in
    that open interval have a unique solution.

    Raises:
        DomainError: If the target lies outside (0, e log n)
    """
    log_n = math.log(n) if n > 1 else 0.0
    upper = math.e * log_n
    if not 0.0 < target < upper:
        raise DomainError(f"target {target} outside the attainable range (0, {upper:.6g})")

    def gap(lam: float) -> float:
        return expected_max_degree_bound(n, lam) - target

    lo, hi = 1e-12 * log_n, log_n * (1.0 - 1e-12)
    if gap(lo) >= 0.0:
        return lo
    if gap(hi) <= 0.0:
        return hi
    return brentq(gap, lo, hi, xtol=1e-12)


def giant_component_fraction(lam: float, tol: float = 1e-12) -> float:
    """Fraction gamma of nodes in the giant component of G(n, lam/n).

    Solves -log(1 - gamma) / gamma = lam by bisection.

    Raises:
        DomainError: If lam <= 1 (no giant component)
    """
    if lam <= 1.0:
        raise DomainError(f"no giant component for lam={lam} <= 1")

    def residual(gamma: float) -> float:
        return -math.log1p(-gamma) / gamma - lam

    lo, hi = 1e-15, 1.0 - 1e-16
    if residual(lo) >= 0.0:
        return lo
    if residual(hi) <= 0.0:
        return hi
    return bisect(residual, lo, hi, xtol=tol, maxiter=200)
