"""Reproducible experiment driver with a resumable result store."""
from .analysis import (PeriodDetector, ensemble, linear_fit, local_preimage_histogram, min_distance_time,
                       preimage_counts, threshold_time)
from .runner import COLUMNS, RunInterrupted, RunResult, run, write_table
from .spec import DEFAULTS, EXPERIMENTS, ExperimentSpec
from .store import ResultStore, cell_key

__all__ = [
    "COLUMNS", "DEFAULTS", "EXPERIMENTS", "ExperimentSpec", "PeriodDetector", "ResultStore",
    "RunInterrupted", "RunResult", "cell_key", "ensemble", "linear_fit", "local_preimage_histogram",
    "min_distance_time", "preimage_counts", "run", "threshold_time", "write_table",
]
