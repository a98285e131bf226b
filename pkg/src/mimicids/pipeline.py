"""Teacher -> annotation -> student mimic-learning pipeline with a release gate.

The student is cleared for sharing when

    relative_score_difference = |acc_teacher - acc_student| / acc_teacher

measured on a common held-out test set is strictly below the configured
threshold.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .classifiers import ClassifierSpec, TrainedModel, train
from .config import PipelineConfig
from .data import Dataset, class_balance
from .errors import ContractError, MimicError, SelectionError, StageError, TrainingError
from .eval import CvResult, EvaluationReport, evaluate, select_best

log = logging.getLogger(__name__)


def _both_classes(ds: Dataset, what: str) -> None:
    if not ds.labeled:
        raise ContractError(f"{what} must be labeled")
    if len(ds) == 0:
        raise TrainingError(f"{what} is empty")
    if len(np.unique(ds.labels)) < 2:
        # every candidate would fail to train, so no classifier can be selected
        raise SelectionError(f"{what} holds a single class")


def _generate(data: Dataset, roster, cfg: PipelineConfig, role: str, created_at: str | None):
    _both_classes(data, f"{role} training data")
    winner, table = select_best(list(roster), data, cfg.cv)
    log.info("%s: selected %s", role, winner.name)
    # cross-validation only picks the family; the model is refit on every row
    model = train(data, winner, created_at=created_at).with_role(role)
    return model, table


def teacher_model_generation(sensitive: Dataset, cfg: PipelineConfig, created_at: str | None = None):
    return _generate(sensitive, cfg.teacher_roster, cfg, "teacher", created_at)


def student_model_generation(annotated: Dataset, cfg: PipelineConfig, created_at: str | None = None):
    return _generate(annotated, cfg.student_roster, cfg, "student", created_at)


def annotate(teacher: TrainedModel, unlabeled: Dataset) -> Dataset:
    """Same rows, same order, labeled with the teacher's hard predictions."""
    if unlabeled.labeled:
        raise ContractError("annotate expects an unlabeled dataset")
    teacher.check(unlabeled)
    return unlabeled.with_labels(teacher.predict_many(unlabeled))


def relative_score_difference(acc_teacher: float, acc_student: float) -> float:
    if acc_teacher <= 0:
        raise ContractError("teacher accuracy is zero; relative score difference undefined")
    return abs(acc_teacher - acc_student) / acc_teacher


def evaluate_models(teacher: TrainedModel, student: TrainedModel, test: Dataset):
    if not test.labeled or len(test) == 0:
        raise ContractError("evaluation needs a non-empty labeled test set")
    teacher.check(test)
    student.check(test)
    t_eval = evaluate(teacher, test)
    s_eval = evaluate(student, test)
    return t_eval, s_eval, relative_score_difference(t_eval.acc, s_eval.acc)


def selection_table_dict(table: list[tuple[ClassifierSpec, CvResult]], winner: ClassifierSpec | None = None):
    rows = []
    for spec, result in table:
        row = {"classifier": spec.name, "hyperparams": spec.params_dict(), "seed": spec.seed}
        row.update(result.as_dict())
        if winner is not None:
            row["selected"] = spec == winner
        rows.append(row)
    return rows


@dataclass
class PipelineReport:
    teacher_selection: list
    teacher: TrainedModel
    annotation_rows: int
    annotation_malicious_fraction: float
    student_selection: list
    student: TrainedModel
    teacher_eval: EvaluationReport
    student_eval: EvaluationReport
    relative_score_difference: float
    release_threshold: float
    released: bool

    annotated: Dataset | None = None

    def as_dict(self) -> dict:
        return {
            "teacher_selection": selection_table_dict(self.teacher_selection, self.teacher.spec),
            "teacher": {"family": self.teacher.family, "train_rows": self.teacher.train_rows,
                        "schema_fingerprint": self.teacher.schema_fingerprint},
            "annotation": {"rows": self.annotation_rows,
                           "malicious_fraction": self.annotation_malicious_fraction},
            "student_selection": selection_table_dict(self.student_selection, self.student.spec),
            "student": {"family": self.student.family, "train_rows": self.student.train_rows,
                        "schema_fingerprint": self.student.schema_fingerprint},
            "teacher_eval": self.teacher_eval.as_dict(),
            "student_eval": self.student_eval.as_dict(),
            "relative_score_difference": self.relative_score_difference,
            "release_threshold": self.release_threshold,
            "released": self.released,
        }


def _stage(name, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except MimicError as exc:
        raise StageError(name, exc) from exc


def run_pipeline(sensitive: Dataset, unlabeled: Dataset, test: Dataset, cfg: PipelineConfig,
                 created_at: str | None = None) -> PipelineReport:
    fp = sensitive.schema.fingerprint()
    for name, ds in (("unlabeled", unlabeled), ("test", test)):
        if ds.schema.fingerprint() != fp:
            raise StageError("inputs", ContractError(f"{name} data uses a different schema"))
    teacher, t_table = _stage("teacher", teacher_model_generation, sensitive, cfg, created_at)
    annotated = _stage("annotate", annotate, teacher, unlabeled)
    student, s_table = _stage("student", student_model_generation, annotated, cfg, created_at)
    t_eval, s_eval, gap = _stage("evaluate", evaluate_models, teacher, student, test)
    released = gap < cfg.release_threshold
    log.info("teacher acc=%.4f student acc=%.4f gap=%.6f released=%s", t_eval.acc, s_eval.acc, gap, released)
    return PipelineReport(
        teacher_selection=t_table,
        teacher=teacher,
        annotation_rows=len(annotated),
        annotation_malicious_fraction=class_balance(annotated)[1],
        student_selection=s_table,
        student=student,
        teacher_eval=t_eval,
        student_eval=s_eval,
        relative_score_difference=gap,
        release_threshold=cfg.release_threshold,
        released=released,
        annotated=annotated,
    )
