"""Low-discrepancy k-colorings for sparse families of coverage functions.

Three solvers cover the size spectrum of the dual sets: `solve_small_sets`
(LP rounding with value preservation plus randomized finishing),
`solve_big_sets` (resampling until every set holds every color, giving
discrepancy exactly zero), and `solve_all_sets` (size split, independent
batches, expectation-preserving rounding).  Exhaustive oracles and
instance generators support verification at small scale.
"""

__version__ = "0.1.0"

from .all_sets import Batches, SplitFamily, batch_partition, round_batch, solve_all_sets, split
from .big_sets import RainbowProblem, is_rainbow, lll_threshold, solve_big_sets
from .coloring import (
    FractionalColoring,
    IntegralColoring,
    RestrictedLinearForm,
    discrepancy,
    eval_F,
    eval_f,
    frac_discrepancy,
    read_coloring,
    restricted_form,
    uniform_coloring,
    write_coloring,
)
from .instance import (
    CoverageFunction,
    CoverageInstance,
    InstanceFormatError,
    ThresholdSet,
    gen_beck_fiala,
    gen_edge_coverage,
    gen_partition_matroid,
    gen_random,
    read_instance,
    sparsity,
    validate,
    write_instance,
)
from .lp import LinearSystem, NumericalRankError, round_in_expectation, vertex_solution
from .oracle import eval_F_enumeration, min_discrepancy_exhaustive
from .report import SolveReport
from .small_sets import (
    SmallSetsConfig,
    greedy_independent_set,
    round_independent_set,
    solve_small_sets,
    sparse_fractional_coloring,
)

__all__ = [
    "__version__",
    "Batches",
    "CoverageFunction",
    "CoverageInstance",
    "FractionalColoring",
    "InstanceFormatError",
    "IntegralColoring",
    "LinearSystem",
    "NumericalRankError",
    "RainbowProblem",
    "RestrictedLinearForm",
    "SmallSetsConfig",
    "SolveReport",
    "SplitFamily",
    "ThresholdSet",
    "batch_partition",
    "discrepancy",
    "eval_F",
    "eval_F_enumeration",
    "eval_f",
    "frac_discrepancy",
    "gen_beck_fiala",
    "gen_edge_coverage",
    "gen_partition_matroid",
    "gen_random",
    "greedy_independent_set",
    "is_rainbow",
    "lll_threshold",
    "min_discrepancy_exhaustive",
    "read_coloring",
    "read_instance",
    "restricted_form",
    "round_batch",
    "round_in_expectation",
    "round_independent_set",
    "solve_all_sets",
    "solve_big_sets",
    "solve_small_sets",
    "sparse_fractional_coloring",
    "sparsity",
    "split",
    "uniform_coloring",
    "validate",
    "vertex_solution",
    "write_coloring",
    "write_instance",
]
