import math
import warnings
from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mimicids.classifiers import ClassifierSpec, ForestParams, train
from mimicids.data import Dataset
from mimicids.errors import ConfigError, ContractError, SelectionError
from mimicids.eval import (
    ConfusionMatrix,
    CvConfig,
    auc_rank,
    confusion,
    cross_validate,
    evaluate,
    fold_assignment,
    format_table,
    metrics,
    roc_auc,
    roc_points,
    select_best,
    trapezoid_area,
)


def brute_auc(scores, truth):
    pos = [s for s, t in zip(scores, truth) if t == 1]
    neg = [s for s, t in zip(scores, truth) if t == 0]
    wins = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p, n in product(pos, neg))
    return wins / (len(pos) * len(neg))


class Stub:
    """Quacks like a TrainedModel for evaluation code."""

    def __init__(self, predictions, scores=None):
        self.p = np.asarray(predictions, np.int8)
        self.s = self.p.astype(float) if scores is None else np.asarray(scores, float)

    def predict_many(self, ds):
        return self.p

    def score_many(self, ds):
        return self.s


def labeled(mixed_schema, labels):
    n = len(labels)
    return Dataset(mixed_schema, np.zeros((n, 2)), np.full((n, 1), "tcp", dtype=object), labels)


# -- confusion / metrics -------------------------------------------------------

def test_confusion_perfect_and_constant(mixed_schema):
    y = [1] * 6 + [0] * 4
    ds = labeled(mixed_schema, y)
    assert confusion(Stub(y), ds) == ConfusionMatrix(6, 4, 0, 0)
    assert confusion(Stub([1] * 10), ds) == ConfusionMatrix(6, 0, 4, 0)


def test_confusion_hand_tally(mixed_schema):
    truth = [1, 1, 0, 0, 1, 0, 1, 0]
    pred = [1, 0, 0, 1, 1, 0, 0, 0]
    # rows 0,4 tp; 2,5,7 tn; 3 fp; 1,6 fn
    assert confusion(Stub(pred), labeled(mixed_schema, truth)) == ConfusionMatrix(2, 3, 1, 2)


def test_metrics_examples():
    r = metrics(ConfusionMatrix(6, 4, 0, 0))
    assert (r.acc, r.tpr, r.fpr, r.tnr, r.fnr) == (1.0, 1.0, 0.0, 1.0, 0.0)
    r = metrics(ConfusionMatrix(9950, 9980, 20, 50))
    assert r.acc == pytest.approx(0.9965, abs=1e-15)
    assert r.tpr == pytest.approx(0.995, abs=1e-15)
    assert r.fpr == pytest.approx(0.002, abs=1e-15)
    r = metrics(ConfusionMatrix(0, 10, 0, 0))
    assert math.isnan(r.tpr) and math.isnan(r.fnr) and r.tnr == 1.0
    with pytest.raises(ContractError):
        metrics(ConfusionMatrix(0, 0, 0, 0))


@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=200))
def test_metrics_identities(pairs):
    truth, pred = zip(*pairs)
    c = ConfusionMatrix.from_predictions(truth, pred)
    r = metrics(c)
    P, N = sum(truth), len(truth) - sum(truth)
    if P:
        assert abs(r.tpr + r.fnr - 1) <= 1e-12
    if N:
        assert abs(r.tnr + r.fpr - 1) <= 1e-12
    tpr = 0.0 if not P else r.tpr
    tnr = 0.0 if not N else r.tnr
    assert abs(r.acc - (tpr * P + tnr * N) / (P + N)) <= 1e-12


# -- ROC / AUC -----------------------------------------------------------------

def test_auc_hand_example():
    auc, _ = roc_auc([(0.9, 1), (0.8, 0), (0.7, 1), (0.3, 0)])
    assert auc == 0.75


def test_auc_extremes():
    assert roc_auc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0])[0] == 1.0
    assert roc_auc([0.4] * 6, [1, 0, 1, 0, 0, 1])[0] == 0.5
    with pytest.raises(ContractError):
        roc_auc([0.1, 0.2], [1, 1])


@given(st.lists(st.tuples(st.integers(0, 20), st.integers(0, 1)), min_size=2, max_size=60)
       .filter(lambda xs: 0 < sum(t for _, t in xs) < len(xs)))
def test_auc_three_ways(pairs):
    scores = [s / 20 for s, _ in pairs]
    truth = [t for _, t in pairs]
    auc, pts = roc_auc(scores, truth)
    assert abs(auc - trapezoid_area(pts)) <= 1e-9
    assert abs(auc - brute_auc(scores, truth)) <= 1e-12
    assert pts[0] == (0.0, 0.0) and pts[-1] == (1.0, 1.0)
    assert all(b[0] >= a[0] and b[1] >= a[1] for a, b in zip(pts, pts[1:]))


def test_roc_points_distinct_thresholds():
    pts = roc_points([0.9, 0.9, 0.5, 0.1], [1, 0, 1, 0])
    assert pts == [(0.0, 0.0), (0.5, 0.5), (0.5, 1.0), (1.0, 1.0)]


def test_auc_rank_invariant_under_monotone_map():
    rng = np.random.default_rng(0)
    s = rng.random(50)
    t = rng.integers(0, 2, 50)
    assert auc_rank(s, t) == pytest.approx(auc_rank(np.exp(3 * s), t), abs=1e-15)


# -- evaluate / cross-validation ----------------------------------------------

def test_evaluate_single_class_test_set(mixed_schema):
    rep = evaluate(Stub([0, 0, 0]), labeled(mixed_schema, [0, 0, 0]))
    assert rep.acc == 1.0 and math.isnan(rep.auc) and math.isnan(rep.tpr)
    assert rep.as_dict()["auc"] is None


def test_fold_assignment_partitions():
    labels = np.r_[np.zeros(37, np.int8), np.ones(23, np.int8)]
    for stratified in (True, False):
        f = fold_assignment(labels, 7, seed=3, stratified=stratified)
        sizes = np.bincount(f, minlength=7)
        assert sizes.sum() == 60 and sizes.max() - sizes.min() <= 1
    f = fold_assignment(labels, 10, seed=3, stratified=True)
    per = [labels[f == k].sum() for k in range(10)]
    assert max(per) - min(per) <= 1


def test_fold_sizes_at_partition_scale():
    labels = (np.random.default_rng(0).random(57_900) < 0.47).astype(np.int8)
    assert set(np.bincount(fold_assignment(labels, 10, seed=0))) == {5790}


@pytest.mark.filterwarnings("ignore:.*undefined:RuntimeWarning")
def test_leave_one_out(separable):
    ds = separable.take(np.r_[0:5, 30:35])
    res = cross_validate(ds, ClassifierSpec("dt"), CvConfig(k=10, stratified=False))
    assert len(res.per_fold) == 10
    assert all(r.confusion.total == 1 for r in res.per_fold)


def test_k_bounds(separable):
    with pytest.raises(ConfigError):
        CvConfig(k=1)
    with pytest.raises(ConfigError):
        cross_validate(separable.take(range(5)), ClassifierSpec("dt"), CvConfig(k=6))


def test_undefined_folds_warn_and_are_excluded(separable):
    ds = separable.take(np.r_[0:18, 30:32])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = cross_validate(ds, ClassifierSpec("dt"), CvConfig(k=4))
    assert any("undefined" in str(w.message) for w in caught)
    tprs = [r.tpr for r in res.per_fold if not math.isnan(r.tpr)]
    assert res.mean["tpr"] == pytest.approx(np.mean(tprs))


def test_cv_is_deterministic(small_kdd):
    cfg = CvConfig(k=5, seed=2)
    a = cross_validate(small_kdd, ClassifierSpec("nb"), cfg)
    b = cross_validate(small_kdd, ClassifierSpec("nb"), cfg)
    assert a.as_dict() == b.as_dict()


def test_select_best_rules(small_kdd):
    nb = ClassifierSpec("nb")
    winner, table = select_best([nb], small_kdd, CvConfig(k=3))
    assert winner is nb and len(table) == 1
    twin = ClassifierSpec("nb", seed=1)  # same model, same scores
    winner, _ = select_best([nb, twin], small_kdd, CvConfig(k=3))
    assert winner is nb
    winner, _ = select_best([twin, nb], small_kdd, CvConfig(k=3))
    assert winner is twin
    with pytest.raises(SelectionError):
        select_best([], small_kdd, CvConfig(k=3))


def test_select_best_names_failing_spec(separable):
    one_class = separable.take(range(20))
    with pytest.raises(SelectionError, match="svm"):
        select_best([ClassifierSpec("svm")], one_class.with_labels(np.r_[np.zeros(19), 1]), CvConfig(k=2))


def test_select_best_prefers_accuracy(small_kdd):
    rf = ClassifierSpec("rf", ForestParams(tree_count=15))
    winner, table = select_best([ClassifierSpec("nb"), rf], small_kdd, CvConfig(k=3))
    accs = {s.name: r.mean["acc"] for s, r in table}
    assert winner.name == max(accs, key=accs.get)


def test_format_table_precision():
    out = format_table([("RF", {"acc": 0.99641, "tpr": 0.5, "fpr": float("nan"), "tnr": 1.0,
                                "fnr": 0.0, "auc": 0.996})])
    assert "99.64" in out and "undefined" in out and "1.00" in out


def test_models_on_stub_data(mixed_schema, separable):
    m = train(separable, ClassifierSpec("dt"))
    rep = evaluate(m, separable)
    assert rep.acc == 1.0 and rep.auc == 1.0
