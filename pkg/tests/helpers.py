"""
Small graphs shared by the test modules.
"""
import numpy as np

from brwsearch.core.graph import Graph


def lollipop() -> Graph:
    """Triangle 0-1-2 with a pendant node 3 on node 2 (degrees 2, 2, 3, 1)."""
    return Graph(4, [(0, 1), (0, 2), (1, 2), (2, 3)])


def star(leaves: int = 4) -> Graph:
    """Hub 0 joined to ``leaves`` leaves."""
    return Graph(leaves + 1, [(0, v) for v in range(1, leaves + 1)])


def triangle() -> Graph:
    """The 2-regular graph on three nodes."""
    return Graph(3, [(0, 1), (1, 2), (0, 2)])


def path(n: int) -> Graph:
    """Path 0-1-...-(n-1)."""
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def six_node_example() -> Graph:
    """Six nodes a..f = 0..5 with degrees (1, 2, 2, 3, 4, 4)."""
    return Graph(
        6,
        [(4, 5), (0, 4), (3, 1), (3, 4), (3, 5), (1, 5), (2, 4), (2, 5)],
    )


def broom(length: int, bristles: int = 2) -> Graph:
    """Path 0-...-(length-1) whose last node also carries ``bristles`` leaves.

    Node length-1 is the unique maximum-degree node for bristles >= 2.
    """
    tip = length - 1
    edges = [(i, i + 1) for i in range(tip)]
    edges += [(tip, length + b) for b in range(bristles)]
    return Graph(length + bristles, edges)


def multinomial_oracle(row, degrees, k, beta, draws, seed):
    """Monte Carlo mean and standard error of the biased degree distribution.

    Neighborhoods are drawn as N ~ mult(k, row); each draw contributes the
    distribution proportional to N_l * l^beta.
    """
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(k, row, size=draws)
    weights = counts * np.asarray(degrees, dtype=float) ** beta
    samples = weights / weights.sum(axis=1, keepdims=True)
    return samples.mean(axis=0), samples.std(axis=0, ddof=1) / np.sqrt(draws)
