from .ablations import ABLATIONS, UnknownAblation, ablation_suite
from .datasets import DatasetManifest, generate_dataset, load_dataset
from .report import ReportError, aggregate_report
from .runner import RunConfig, load_run, run_experiment

__all__ = ["ABLATIONS", "DatasetManifest", "ReportError", "RunConfig", "UnknownAblation",
           "ablation_suite", "aggregate_report", "generate_dataset", "load_dataset", "load_run",
           "run_experiment"]
