"""Distributed graph filtering under quantized communication.

FIR and ARMA graph filter engines with subtractively-dithered uniform
quantization of every exchanged message, over static graphs and random edge
sampling (RES) realizations; closed-form MSE expressions and bounds with a
Monte Carlo verification harness; and convex quantization-robust filter
design.
"""

from gfquant.analysis import (
    MseReport,
    arma_mse_bound_dynamic,
    arma_mse_bound_fixed,
    arma_mse_bound_fixed_steady,
    fir_mse_bound_dynamic,
    fir_mse_bounds_fixed,
    fir_mse_exact,
    fir_mse_printed,
    fir_res_mse_bound,
    monte_carlo,
    nse,
)
from gfquant.design import (
    DesignConstraints,
    DesignResult,
    fir_ls_design,
    fir_quantization_aware_design,
    fir_robust_res_design,
    interpolation_arma1,
    tikhonov_arma1,
    uniform_grid,
)
from gfquant.experiments import (
    DatasetBundle,
    ExperimentConfig,
    bundle_from_csv,
    bundle_to_csv,
    config_from_dict,
    load_config,
    run_bounds_audit,
    run_denoise,
    run_interpolate,
    run_lowpass,
    run_scenario,
    synthetic_bundle,
    validate_bundle,
)
from gfquant.filters import (
    ArmaCoefficients,
    FilterRun,
    FirCoefficients,
    arma_run,
    arma_steady_state,
    draw_res_sequence,
    fir_apply,
    fir_apply_quantized,
    fir_apply_tv,
    fir_apply_tv_quantized,
    fir_freq_response,
    run_metadata_json,
    trajectory_to_csv,
)
from gfquant.graphs import (
    Graph,
    ResModel,
    ShiftOperator,
    SpectralDecomposition,
    build_shift,
    eigendecompose,
    expected_shift,
    gft,
    graph_from_csv,
    graph_to_csv,
    igft,
    interpolation_shift,
    knn_graph,
    random_geometric,
    res_model,
    res_sample,
    spectral_radius,
)
from gfquant.optim import QuadraticProgram, solve_qp
from gfquant.quantization import (
    DitheredQuantizer,
    QuantizationLedger,
    StepsizeSchedule,
    budgeted_initial_stepsize,
    effective_stepsize,
    quantize,
    stepsize_at,
)

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "0.1.0"
