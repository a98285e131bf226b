"""Confusion-matrix rates, ROC/AUC, stratified k-fold CV and model selection.

Malicious is the positive class. A rate whose denominator is zero is
reported as NaN ("undefined"), never 0.0, and is left out of CV means.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .classifiers import ClassifierSpec, TrainedModel, train
from .data import Dataset, Label
from .errors import ConfigError, ContractError, SelectionError, TrainingError

log = logging.getLogger(__name__)

UNDEFINED = math.nan
METRICS = ("acc", "tpr", "fpr", "tnr", "fnr", "auc")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    @classmethod
    def from_predictions(cls, truth, predicted) -> "ConfusionMatrix":
        truth = np.asarray(truth, dtype=np.int8)
        predicted = np.asarray(predicted, dtype=np.int8)
        if truth.shape != predicted.shape:
            raise ContractError("truth and prediction vectors differ in length")
        return cls(
            tp=int(((truth == 1) & (predicted == 1)).sum()),
            tn=int(((truth == 0) & (predicted == 0)).sum()),
            fp=int(((truth == 0) & (predicted == 1)).sum()),
            fn=int(((truth == 1) & (predicted == 0)).sum()),
        )


@dataclass(frozen=True)
class Rates:
    acc: float
    tpr: float
    fpr: float
    tnr: float
    fnr: float


def _ratio(num: int, den: int) -> float:
    return num / den if den else UNDEFINED


def metrics(c: ConfusionMatrix) -> Rates:
    if c.total <= 0:
        raise ContractError("metrics of an empty confusion matrix")
    return Rates(
        acc=(c.tp + c.tn) / c.total,
        tpr=_ratio(c.tp, c.tp + c.fn),
        fpr=_ratio(c.fp, c.fp + c.tn),
        tnr=_ratio(c.tn, c.tn + c.fp),
        fnr=_ratio(c.fn, c.fn + c.tp),
    )


def confusion(model: TrainedModel, test: Dataset) -> ConfusionMatrix:
    if not test.labeled:
        raise ContractError("confusion needs a labeled test set")
    if len(test) == 0:
        raise ContractError("confusion of an empty test set")
    return ConfusionMatrix.from_predictions(test.labels, model.predict_many(test))


def _as_arrays(scores, truth=None):
    if truth is None:
        pairs = list(scores)
        s = np.array([float(p[0]) for p in pairs])
        t = np.array([int(p[1]) for p in pairs], dtype=np.int8)
    else:
        s = np.asarray(scores, dtype=np.float64)
        t = np.asarray(truth, dtype=np.int8)
    return s, t


def auc_rank(scores, truth) -> float:
    """Mann-Whitney U / (P * N) with average ranks, so ties count one half."""
    s, t = _as_arrays(scores, truth)
    pos = t == 1
    P, N = int(pos.sum()), int((~pos).sum())
    if P == 0 or N == 0:
        raise ContractError("AUC needs at least one malicious and one benign row")
    ranks = rankdata(s)
    u = ranks[pos].sum() - P * (P + 1) / 2.0
    return float(u / (P * N))


def roc_points(scores, truth) -> list[tuple[float, float]]:
    """(fpr, tpr) for thresholds at every distinct score, 'malicious if score >= thr'."""
    s, t = _as_arrays(scores, truth)
    P, N = int((t == 1).sum()), int((t == 0).sum())
    if P == 0 or N == 0:
        raise ContractError("ROC needs at least one malicious and one benign row")
    order = np.argsort(-s, kind="stable")
    s, t = s[order], t[order]
    last = np.r_[np.flatnonzero(np.diff(s) != 0), len(s) - 1]
    tp = np.cumsum(t == 1)[last]
    fp = np.cumsum(t == 0)[last]
    pts = [(0.0, 0.0)]
    pts += [(float(f / N), float(p / P)) for f, p in zip(fp, tp)]
    return pts


def trapezoid_area(points) -> float:
    area = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area


def roc_auc(scores, truth=None) -> tuple[float, list[tuple[float, float]]]:
    """``scores`` is either a list of (score, label) pairs or a score vector with ``truth``."""
    s, t = _as_arrays(scores, truth)
    return auc_rank(s, t), roc_points(s, t)


@dataclass
class EvaluationReport:
    confusion: ConfusionMatrix
    acc: float
    tpr: float
    fpr: float
    tnr: float
    fnr: float
    auc: float
    roc_points: list = field(default_factory=list, repr=False)

    def as_dict(self, with_roc: bool = False) -> dict:
        out = {
            "confusion": {"tp": self.confusion.tp, "tn": self.confusion.tn,
                          "fp": self.confusion.fp, "fn": self.confusion.fn},
        }
        for m in METRICS:
            v = getattr(self, m)
            out[m] = None if math.isnan(v) else v
        if with_roc:
            out["roc_points"] = [list(p) for p in self.roc_points]
        return out


def evaluate(model: TrainedModel, test: Dataset) -> EvaluationReport:
    if not test.labeled or len(test) == 0:
        raise ContractError("evaluation needs a non-empty labeled test set")
    pred = model.predict_many(test)
    c = ConfusionMatrix.from_predictions(test.labels, pred)
    r = metrics(c)
    if 0 < int(test.labels.sum()) < len(test):
        auc, pts = roc_auc(model.score_many(test), test.labels)
    else:
        auc, pts = UNDEFINED, []
    return EvaluationReport(c, r.acc, r.tpr, r.fpr, r.tnr, r.fnr, auc, pts)


@dataclass(frozen=True)
class CvConfig:
    k: int = 10
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if self.k < 2:
            raise ConfigError("cv k must be >= 2")


@dataclass
class CvResult:
    per_fold: list[EvaluationReport]
    mean: dict[str, float]

    def as_dict(self) -> dict:
        return {
            "mean": {m: (None if math.isnan(v) else v) for m, v in self.mean.items()},
            "per_fold": [r.as_dict() for r in self.per_fold],
        }


def fold_assignment(labels: np.ndarray, k: int, seed: int, stratified: bool = True) -> np.ndarray:
    """Fold id per row; sizes differ by at most one.

    Stratified: rows are shuffled within each class, classes are laid end to
    end and dealt round-robin, so each fold gets an even share of both.
    """
    n = len(labels)
    if k > n:
        raise ConfigError(f"cv k={k} exceeds dataset size {n}")
    rng = np.random.default_rng(seed)
    if stratified:
        parts = []
        for cls in (0, 1):
            idx = np.flatnonzero(labels == cls)
            parts.append(idx[rng.permutation(len(idx))])
        order = np.concatenate(parts)
    else:
        order = rng.permutation(n)
    folds = np.empty(n, np.int64)
    folds[order] = np.arange(n) % k
    return folds


def _mean_metrics(reports: list[EvaluationReport]) -> dict[str, float]:
    out = {}
    for m in METRICS:
        vals = np.array([getattr(r, m) for r in reports], dtype=np.float64)
        ok = ~np.isnan(vals)
        if not ok.all():
            warnings.warn(f"{m}: {int((~ok).sum())} fold(s) undefined, excluded from the mean",
                          RuntimeWarning, stacklevel=3)
        out[m] = float(vals[ok].mean()) if ok.any() else UNDEFINED
    return out


def cross_validate(data: Dataset, spec: ClassifierSpec, cfg: CvConfig) -> CvResult:
    if not data.labeled:
        raise ContractError("cross-validation needs labeled data")
    folds = fold_assignment(data.labels, cfg.k, cfg.seed, cfg.stratified)
    reports = []
    for f in range(cfg.k):
        train_idx = np.flatnonzero(folds != f)
        test_idx = np.flatnonzero(folds == f)
        part = data.take(train_idx)
        if len(np.unique(part.labels)) < 2:
            raise TrainingError(f"fold {f}: training split holds a single class")
        try:
            model = train(part, spec)
        except TrainingError as exc:
            raise TrainingError(f"fold {f}: {exc}") from exc
        reports.append(evaluate(model, data.take(test_idx)))
        log.debug("%s fold %d acc=%.4f", spec.name, f, reports[-1].acc)
    return CvResult(reports, _mean_metrics(reports))


def _key(result: CvResult, position: int):
    auc = result.mean["auc"]
    return (result.mean["acc"], -math.inf if math.isnan(auc) else auc, -position)


def select_best(roster: list[ClassifierSpec], data: Dataset, cfg: CvConfig):
    """Highest mean CV accuracy; ties go to higher mean AUC, then the earlier roster entry."""
    if not roster:
        raise SelectionError("empty classifier roster")
    table = []
    for spec in roster:
        try:
            result = cross_validate(data, spec, cfg)
        except (TrainingError, ContractError) as exc:
            raise SelectionError(f"{spec.name}: {exc}") from exc
        log.info("%s cv acc=%.4f auc=%.4f", spec.name, result.mean["acc"], result.mean["auc"])
        table.append((spec, result))
    best = max(range(len(table)), key=lambda i: _key(table[i][1], i))
    return table[best][0], table


def format_percent(v: float) -> str:
    return "undefined" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{100 * v:.2f}"


def format_table(rows: list[tuple[str, dict]]) -> str:
    """Rows of (name, metric dict) as a fixed-width table: rates in %, AUC as a fraction."""
    head = f"{'Classifier':<10} {'ACC (%)':>8} {'TPR (%)':>8} {'FPR (%)':>8} {'TNR (%)':>8} {'FNR (%)':>8} {'AUC':>6}"
    lines = [head, "-" * len(head)]
    for name, m in rows:
        auc = m.get("auc")
        auc_s = "undef" if auc is None or (isinstance(auc, float) and math.isnan(auc)) else f"{auc:.2f}"
        lines.append(
            f"{name:<10} " + " ".join(f"{format_percent(m.get(k)):>8}" for k in ("acc", "tpr", "fpr", "tnr", "fnr"))
            + f" {auc_s:>6}"
        )
    return "\n".join(lines)


__all__ = [
    "ConfusionMatrix", "Rates", "EvaluationReport", "CvConfig", "CvResult", "Label",
    "metrics", "confusion", "roc_auc", "auc_rank", "roc_points", "trapezoid_area", "evaluate",
    "fold_assignment", "cross_validate", "select_best", "format_table",
]
