"""Log-periodic power-law bubble diagnostics for price time series."""

__version__ = "0.1.0"


from .calibrate import (
    Bounds,
    FitConfig,
    FitResult,
    GridSpec,
    fit_arrays,
    fit_window,
    grid_multistart,
    local_refine,
    objective_rmse,
    qualify_fit,
    slave_linear_params,
)
from .errors import (
    DegenerateDesignError,
    InputError,
    InsufficientDataError,
    LpplError,
    MethodError,
    ModelDomainError,
    NoCandidateError,
    ScanFailedError,
    UndefinedTestError,
)
from .models import (
    LandauParams,
    SimpleParams,
    WeierstrassParams,
    eval_landau,
    eval_simple,
    eval_weierstrass,
    evaluate,
    residuals,
)
from .scanner import ScanConfig, ScanResult, scan, tc_summary
from .significance import (
    BootstrapConfig,
    Noise,
    block_resample_residuals,
    bootstrap_tc_distribution,
    logperiodicity_test,
    lomb_periodogram,
    synth_generate,
)
from .supply_demand import (
    Quarter,
    QuarterlyFlow,
    agency_discrepancy,
    gap_series,
    load_flows,
    regime_flag,
)
from .timeseries import (
    CsvSchema,
    PricePoint,
    PriceSeries,
    TimeWindow,
    convert_currency,
    load_csv,
    slice_window,
    to_log_price,
    trading_days,
)

__all__ = [
    "BootstrapConfig",
    "Bounds",
    "CsvSchema",
    "DegenerateDesignError",
    "FitConfig",
    "FitResult",
    "GridSpec",
    "InputError",
    "InsufficientDataError",
    "LandauParams",
    "LpplError",
    "MethodError",
    "ModelDomainError",
    "NoCandidateError",
    "Noise",
    "PricePoint",
    "PriceSeries",
    "Quarter",
    "QuarterlyFlow",
    "ScanConfig",
    "ScanFailedError",
    "ScanResult",
    "SimpleParams",
    "TimeWindow",
    "UndefinedTestError",
    "WeierstrassParams",
    "__version__",
    "agency_discrepancy",
    "block_resample_residuals",
    "bootstrap_tc_distribution",
    "convert_currency",
    "eval_landau",
    "eval_simple",
    "eval_weierstrass",
    "evaluate",
    "fit_arrays",
    "fit_window",
    "gap_series",
    "grid_multistart",
    "load_csv",
    "load_flows",
    "local_refine",
    "logperiodicity_test",
    "lomb_periodogram",
    "objective_rmse",
    "qualify_fit",
    "regime_flag",
    "residuals",
    "scan",
    "slave_linear_params",
    "slice_window",
    "synth_generate",
    "tc_summary",
    "to_log_price",
    "trading_days",
]
