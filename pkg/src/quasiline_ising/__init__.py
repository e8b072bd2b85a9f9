"""Antiferromagnetic Ising models on quasi-line graphs.

Exact partition functions, Glauber dynamics, gadget reductions from cubic
max-cut, and the torpid-mixing construction on bipartite expanders.
"""

from .graphs import Graph, line_graph, random_bipartite_cubic, random_cubic
from .spin_models import CutPolynomial, cut_polynomial, cut_size, parse_mu

__all__ = [
    "CutPolynomial",
    "Graph",
    "cut_polynomial",
    "cut_size",
    "line_graph",
    "parse_mu",
    "random_bipartite_cubic",
    "random_cubic",
]
__version__ = "0.1.0"
