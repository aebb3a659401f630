"""Maximum-entropy weighted graphs with prescribed expected degrees.

The edge weights of a graph on n vertices are independent under the
maximum-entropy distribution matching an expected degree sequence, with
each edge law determined by the sum of two vertex potentials.  This
package samples such graphs, tests degree sequences for realizability,
and recovers the potentials from a degree sequence by maximum likelihood.
"""

from .core import (
    DegreeSequence,
    FitReport,
    NoMleError,
    Potentials,
    RegimeError,
    WeightedGraph,
    WeightRegime,
    graph_from_json_dict,
    graph_to_json_dict,
    read_degrees_csv,
    read_graph_json,
    validate_potentials,
    write_degrees_csv,
    write_graph_json,
)
from .graphical import (
    GraphicalityVerdict,
    brute_force_graphical,
    in_mean_interior,
    is_graphical,
)
from .meanfn import MarginalEval, evaluate, mean, mean_deriv, mean_inverse, z1
from .mle import (
    ContractionInfo,
    SolverOptions,
    contraction_delta,
    contraction_for_fit,
    fit,
    fit_finite_discrete,
    fit_positive_regime,
    hessian_logpartition,
    inverse_norm_bound,
    phi_step,
)
from .sampler import SeededRng, expected_degrees, sample_graph

__version__ = "0.1.0"

__all__ = [
    "ContractionInfo",
    "DegreeSequence",
    "FitReport",
    "GraphicalityVerdict",
    "MarginalEval",
    "NoMleError",
    "Potentials",
    "RegimeError",
    "SeededRng",
    "SolverOptions",
    "WeightRegime",
    "WeightedGraph",
    "brute_force_graphical",
    "contraction_delta",
    "contraction_for_fit",
    "evaluate",
    "expected_degrees",
    "fit",
    "fit_finite_discrete",
    "fit_positive_regime",
    "graph_from_json_dict",
    "graph_to_json_dict",
    "hessian_logpartition",
    "in_mean_interior",
    "inverse_norm_bound",
    "is_graphical",
    "mean",
    "mean_deriv",
    "mean_inverse",
    "phi_step",
    "read_degrees_csv",
    "read_graph_json",
    "sample_graph",
    "validate_potentials",
    "write_degrees_csv",
    "write_graph_json",
    "z1",
]
