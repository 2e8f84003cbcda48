"""
brwsearch: biased random walk search for maximum-degree nodes.

The toolkit simulates and analyzes degree-biased random walks that look for
a node of maximum degree, compares them with random-sampling baselines, and
predicts their search time from degree correlations alone.
"""

__version__ = "0.1.0"
