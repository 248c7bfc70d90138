"""Spectral clustering of hypergraphs with mixed edge sizes.

Nonbacktracking operators on pointed edges, their reduced node-level forms,
a blockmodel sampler with closed-form detectability predictions, and the
two clustering procedures built on top of them.
"""

from .clustering import Clustering, adjusted_rand_index, bphsc, bphsc_step, kmeans, nbhsc
from .eigen import ConvergenceError, Spectrum, leading_eigenpairs, select_real_eigenpairs
from .hsbm import (
    BlockmodelParams,
    estimate_parameters,
    sample_hypergraph,
    sample_labels,
    theory_report,
)
from .hypergraph import Hypergraph, HypergraphFormatError, clique_projection, load_hypergraph, load_labels
from .operators import GroupMatrixSet, build_B, build_Bprime, build_G, build_J, build_Jprime

__version__ = "0.1.0"
