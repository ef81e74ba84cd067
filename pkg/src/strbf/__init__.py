"""RBF and spatio-temporal RBF networks for chaotic time series prediction.

Library layout:

    series      Mackey-Glass generation, noise injection, windowing
    kernels     radial basis kernels and K-means initialization
    network     forward passes and online gradient-descent training
    experiment  paired Monte-Carlo benchmark and artifact writers
    config      flat key=value configuration
    cli         command-line frontend (``strbf`` entry point)
"""

from .experiment import (
    ExperimentConfig,
    MonteCarloResult,
    RunStats,
    default_config,
    mse_to_db,
    run_monte_carlo,
    run_single,
    smooth_curve,
    summarize,
)
from .kernels import ClusterModel, KernelSpec, eval_kernel, init_kernels, kmeans_fit
from .network import (
    DivergenceError,
    NetworkState,
    StepResult,
    Topology,
    evaluate,
    forward_rbf,
    forward_strbf,
    init_network,
    sgd_step,
    train_online,
)
from .series import (
    IntegrationDivergenceError,
    MackeyGlassParams,
    TimeSeries,
    WindowedDataset,
    add_awgn,
    generate_mackey_glass,
    make_windows,
)

__version__ = "0.1.0"
