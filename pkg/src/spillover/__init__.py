"""Correlation, cointegration and connectedness analysis for multivariate
financial time series, built around a TVP-VAR spillover engine."""
from .connectedness import (
    ConnectednessReport,
    DynamicConnectedness,
    average_report,
    connectedness_report,
    dynamic_report,
    export_network,
    npdc,
    pci,
    pii,
)
from .correlation import (
    CorrelationMatrix,
    static_correlation,
    var_conditional_correlation,
    var_partial_correlation,
)
from .diagnostics import (
    DescriptiveStats,
    TestResult,
    adf_test,
    chow_test,
    describe,
    engle_granger,
    engle_granger_matrix,
    jarque_bera,
    ljung_box_squared,
)
from .errors import DataError, NumericalError, SpilloverError
from .panel import (
    PanelSeries,
    TransformSpec,
    align,
    apply_transforms,
    cumulative_return,
    first_difference,
    load_csv,
    to_csv,
)
from .pipeline import PipelineConfig, PipelineResult, run_pipeline
from .tvp import TvpConfig, TvpTrajectory, rolling_var_fevd, trajectory_fevd, tvp_filter
from .var import (
    FevdTable,
    VarModel,
    cholesky_fevd,
    fit_var,
    gfevd,
    ma_coefficients,
    select_lag,
)

__version__ = "0.1.0"
