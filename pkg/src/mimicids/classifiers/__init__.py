"""The four classifier families behind one train / predict / score surface.

``predict`` and ``score`` take a single FeatureVector; ``predict_many`` and
``score_many`` take a whole Dataset and are what the evaluation code uses.
Scores are malicious-class scores in [0, 1]:

* dt  - malicious fraction of the training rows at the leaf
* rf  - fraction of trees voting malicious
* nb  - posterior P(malicious | x)
* svm - logistic of the signed margin

For every family ``predict == malicious`` exactly when ``score >= 0.5``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..data import CATEGORICAL, Dataset, FeatureVector, Label, Schema
from ..errors import ContractError, TrainingError
from .bayes import NaiveBayesModel, fit_naive_bayes
from .encoding import CategoricalEncoder, categorical_mask, feature_matrix
from .forest import grow_forest, vote_fraction
from .spec import (
    FAMILIES,
    BayesParams,
    ClassifierSpec,
    ForestParams,
    SvmParams,
    TreeParams,
    default_roster,
    roster_from_names,
)
from .svm import SvmModel, fit_svm
from .tree import TreeArrays, entropy, grow_tree, information_gain

__all__ = [
    "FAMILIES", "BayesParams", "ClassifierSpec", "ForestParams", "SvmParams", "TreeParams",
    "DecisionTreeModel", "RandomForestModel", "NaiveBayesModel", "SvmModel", "TrainedModel",
    "default_roster", "roster_from_names", "entropy", "information_gain",
    "train", "train_decision_tree", "train_random_forest", "train_naive_bayes", "train_svm",
    "predict", "score", "predict_many", "score_many",
]


@dataclass
class DecisionTreeModel:
    tree: TreeArrays


@dataclass
class RandomForestModel:
    trees: list[TreeArrays]
    feature_subsample: int
    tree_count: int


@dataclass
class TrainedModel:
    spec: ClassifierSpec
    schema: Schema
    encoder: CategoricalEncoder
    body: object
    train_rows: int
    created_at: str | None = None
    role: str | None = None

    @property
    def family(self) -> str:
        return self.spec.family

    @property
    def schema_fingerprint(self) -> str:
        return self.schema.fingerprint()

    def with_role(self, role: str) -> "TrainedModel":
        return replace(self, role=role)

    def check(self, ds: Dataset) -> None:
        if ds.schema.fingerprint() != self.schema_fingerprint:
            raise ContractError("dataset schema does not match the model's schema fingerprint")

    def _inputs(self, ds: Dataset):
        self.check(ds)
        if self.family in ("dt", "rf"):
            return feature_matrix(ds, self.encoder)
        return ds.continuous, self.encoder.codes(ds)

    def score_many(self, ds: Dataset) -> np.ndarray:
        x = self._inputs(ds)
        b = self.body
        if self.family == "dt":
            return b.tree.malicious_fraction(x)
        if self.family == "rf":
            return vote_fraction(b.trees, x)
        if self.family == "nb":
            return b.posterior_malicious(*x)
        return b.score(*x)

    def predict_many(self, ds: Dataset) -> np.ndarray:
        """int8 vector, 1 = malicious."""
        if self.family in ("dt", "rf"):
            return (self.score_many(ds) >= 0.5).astype(np.int8)
        x = self._inputs(ds)
        return self.body.predict(*x)

    def _single(self, row: FeatureVector) -> Dataset:
        values = row.values if isinstance(row, FeatureVector) else tuple(row)
        if len(values) != self.schema.feature_count:
            raise ContractError(
                f"row has {len(values)} values, model schema has {self.schema.feature_count}"
            )
        for v, col in zip(values, self.schema.columns):
            numeric = isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool)
            if col.kind == CATEGORICAL and not isinstance(v, str):
                raise ContractError(f"column {col.name!r} expects a category token")
            if col.kind != CATEGORICAL and not numeric:
                raise ContractError(f"column {col.name!r} expects a number")
        return Dataset.from_rows(self.schema, [tuple(values)])

    def predict(self, row: FeatureVector) -> Label:
        return Label(int(self.predict_many(self._single(row))[0]))

    def score(self, row: FeatureVector) -> float:
        return float(self.score_many(self._single(row))[0])


def _require(data: Dataset, spec: ClassifierSpec, family: str) -> None:
    if spec.family != family:
        raise TrainingError(f"spec family is {spec.family!r}, expected {family!r}")
    if not data.labeled:
        raise TrainingError("training needs a labeled dataset")
    if len(data) == 0:
        raise TrainingError("cannot train on an empty dataset")


def _tree_inputs(data: Dataset, encoder: CategoricalEncoder):
    X = feature_matrix(data, encoder)
    is_cat = categorical_mask(data.schema)
    n_codes = np.zeros(data.schema.feature_count, np.int64)
    n_codes[data.schema.categorical_index] = encoder.sizes()
    return X, is_cat, n_codes


def train_decision_tree(data: Dataset, spec: ClassifierSpec, created_at: str | None = None) -> TrainedModel:
    _require(data, spec, "dt")
    p = spec.params
    encoder = CategoricalEncoder.fit(data)
    X, is_cat, n_codes = _tree_inputs(data, encoder)
    tree = grow_tree(X, data.labels, np.ones(len(data), np.int64), is_cat, n_codes,
                     max_depth=p.max_depth, min_samples_split=p.min_samples_split,
                     min_samples_leaf=p.min_samples_leaf, ig_epsilon=p.ig_epsilon)
    return TrainedModel(spec, data.schema, encoder, DecisionTreeModel(tree), len(data), created_at)


def train_random_forest(data: Dataset, spec: ClassifierSpec, created_at: str | None = None,
                        workers: int | None = None) -> TrainedModel:
    _require(data, spec, "rf")
    p = spec.params
    encoder = CategoricalEncoder.fit(data)
    X, is_cat, n_codes = _tree_inputs(data, encoder)
    trees = grow_forest(X, data.labels, is_cat, n_codes, p, spec.seed, workers)
    body = RandomForestModel(trees, p.features_per_split(X.shape[1]), p.tree_count)
    return TrainedModel(spec, data.schema, encoder, body, len(data), created_at)


def train_naive_bayes(data: Dataset, spec: ClassifierSpec, created_at: str | None = None) -> TrainedModel:
    _require(data, spec, "nb")
    encoder = CategoricalEncoder.fit(data)
    body = fit_naive_bayes(data.continuous, encoder.codes(data), encoder.sizes(), data.labels,
                           alpha=spec.params.alpha, variance_floor=spec.params.variance_floor)
    return TrainedModel(spec, data.schema, encoder, body, len(data), created_at)


def train_svm(data: Dataset, spec: ClassifierSpec, created_at: str | None = None) -> TrainedModel:
    _require(data, spec, "svm")
    if len(np.unique(data.labels)) < 2:
        raise TrainingError("svm needs both classes in the training data")
    p = spec.params
    encoder = CategoricalEncoder.fit(data)
    body = fit_svm(data.continuous, encoder.codes(data), encoder.sizes(), data.labels,
                   lam=p.lam, epochs=p.epochs, batch_size=p.batch_size, seed=spec.seed)
    return TrainedModel(spec, data.schema, encoder, body, len(data), created_at)


_TRAINERS = {
    "dt": train_decision_tree,
    "rf": train_random_forest,
    "nb": train_naive_bayes,
    "svm": train_svm,
}


def train(data: Dataset, spec: ClassifierSpec, created_at: str | None = None) -> TrainedModel:
    return _TRAINERS[spec.family](data, spec, created_at=created_at)


def predict(model: TrainedModel, row: FeatureVector) -> Label:
    return model.predict(row)


def score(model: TrainedModel, row: FeatureVector) -> float:
    return model.score(row)


def predict_many(model: TrainedModel, ds: Dataset) -> np.ndarray:
    return model.predict_many(ds)


def score_many(model: TrainedModel, ds: Dataset) -> np.ndarray:
    return model.score_many(ds)

