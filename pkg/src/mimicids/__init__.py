"""Mimic learning for network intrusion detection.

A teacher classifier is chosen and fit on private labeled flows, used to
label a public pool, and a student is fit on those labels. The student is
released only if its held-out accuracy stays close to the teacher's.
"""

__version__ = "0.1.0"

from .classifiers import ClassifierSpec, TrainedModel, train  # noqa: E402
from .config import PipelineConfig, build_config  # noqa: E402
from .data import Dataset, FeatureVector, Label, Schema, SplitSpec, kdd_schema, load_dataset, split_dataset  # noqa: E402
from .eval import CvConfig, cross_validate, evaluate, select_best  # noqa: E402
from .model_store import load_model, save_model  # noqa: E402
from .pipeline import PipelineReport, annotate, run_pipeline  # noqa: E402

__all__ = [
    "__version__", "ClassifierSpec", "TrainedModel", "train", "PipelineConfig", "build_config",
    "Dataset", "FeatureVector", "Label", "Schema", "SplitSpec", "kdd_schema", "load_dataset",
    "split_dataset", "CvConfig", "cross_validate", "evaluate", "select_best", "load_model",
    "save_model", "PipelineReport", "annotate", "run_pipeline",
]
