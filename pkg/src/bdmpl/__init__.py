"""Bayesian structure learning for categorical data.

Birth-death MCMC over conditional independence graphs with marginal
pseudo-likelihood rates, plus a hill-climbing baseline, a simulation
benchmark, and centrality analysis of estimated networks.
"""

from .analysis import (
    CentralityReport,
    betweenness,
    centrality_report,
    closeness,
    degree,
    pagerank,
    top_k,
)
from .data import (
    CategoricalDataset,
    ConditionalCounts,
    count_config,
    from_cells,
    from_rows,
    load_csv,
    load_sparse_binary,
)
from .estimate import (
    convergence_trace,
    edge_inclusion_probs,
    graph_posterior,
    median_graph,
)
from .graph import (
    GraphPrior,
    UndirectedGraph,
    log_prior_ratio,
    neighbors,
    read_edge_list,
    toggle_edge,
    write_edge_list,
)
from .hillclimb import HcResult, hc_learn, hc_learn_full, hc_neighborhood
from .kernels import BACKEND as KERNEL_BACKEND
from .sampler import (
    BdSampler,
    ChainTrace,
    RateVector,
    SamplerConfig,
    bd_step,
    edge_log_rate,
    edge_rate,
    full_rates,
    incremental_rates,
    multi_bd_step,
    read_trace,
    run,
    write_trace_csv,
    write_trace_npz,
)
from .score import (
    DirichletHyper,
    LocalScoreCache,
    MplScorer,
    local_log_score,
    log_posterior_mpl,
    mpl_log,
)
from .simbench import (
    BenchmarkProtocol,
    GraphSpec,
    MrfModel,
    auc,
    f1_score,
    gen_data,
    gen_graph,
    roc_points,
    run_benchmark,
    sample_mrf_model,
    shd,
    synthetic_sparse_dataset,
)

__version__ = "0.1.0"
