"""cdkit: causal discovery from observational tabular data.

The pipeline first recovers an undirected dependence skeleton, then orients
it with constraint-based (PC), score-based (BIC hill climbing) or pairwise
(additive noise model) methods.
"""

from .anm import AnmConfig, Direction, PairDecision, anm_decide, anm_residuals, kernel_ridge_fit, orient_skeleton_pairwise
from .config import OrientationMethod, PipelineConfig, SkeletonMethod, load_config
from .data import Dataset, load_csv, standardize, summary_stats, write_csv
from .graph import (
    Format,
    GraphMetrics,
    MixedGraph,
    SepSets,
    d_separated,
    dag_to_cpdag,
    is_dag,
    meek_closure,
    orient_v_structures,
    parse,
    serialize,
    shd,
    skeleton_metrics,
    topological_order,
)
from .indep import TestResult, bh_adjust, fisher_z_test, gaussian_mi, hsic_test, median_heuristic_bandwidth, partial_correlation
from .pc import DSeparationOracle, FisherZOracle, PcConfig, pc, pc_skeleton
from .pipeline import RunReport, evaluate, run_pipeline
from .score import SearchConfig, bic_local, hill_climb, score_dag
from .skeleton import (
    Blanket,
    blankets_to_skeleton,
    deconvolved_graph,
    dependency_graph,
    glasso_graph,
    graphical_lasso,
    iamb,
    network_deconvolution,
)
from .synthetic import SyntheticSpec, generate_synthetic

__version__ = "0.1.0"
