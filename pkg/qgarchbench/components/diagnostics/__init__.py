from .acf import (
    acf,
    act_window,
    AcfSeries,
    ActWindow,
    batch_means_error,
    DEFAULT_WINDOW_C,
    default_t_max,
    integrated_act,
)
from .report import (
    DEFAULT_HIST_BINS,
    DiagnosticsReport,
    Histogram,
    histogram,
    overlap_coefficient,
    ParameterSummary,
    summarize,
    summarize_parameter,
)
