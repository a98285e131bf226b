"""Numeric encoding of a Dataset for the classifier kernels."""

from __future__ import annotations

import numpy as np

from ..data import Dataset, Schema


class CategoricalEncoder:
    """Sorted training vocabulary per categorical column; unseen tokens map to -1."""

    def __init__(self, vocab: list[list[str]]):
        self.vocab = [list(v) for v in vocab]
        self._lookup = [{t: i for i, t in enumerate(v)} for v in self.vocab]

    @classmethod
    def fit(cls, ds: Dataset) -> "CategoricalEncoder":
        return cls([sorted(set(ds.categorical[:, p].tolist())) for p in range(ds.categorical.shape[1])])

    def codes(self, ds: Dataset) -> np.ndarray:
        n, k = ds.categorical.shape
        out = np.empty((n, k), dtype=np.int64)
        for p in range(k):
            get = self._lookup[p].get
            out[:, p] = [get(t, -1) for t in ds.categorical[:, p].tolist()]
        return out

    def sizes(self) -> list[int]:
        return [len(v) for v in self.vocab]


def feature_matrix(ds: Dataset, encoder: CategoricalEncoder) -> np.ndarray:
    """(n, d) float64 in schema column order; categorical columns hold integer codes."""
    schema = ds.schema
    X = np.empty((len(ds), schema.feature_count), dtype=np.float64)
    if schema.continuous_index:
        X[:, schema.continuous_index] = ds.continuous
    if schema.categorical_index:
        X[:, schema.categorical_index] = encoder.codes(ds)
    return X


def categorical_mask(schema: Schema) -> np.ndarray:
    return np.array([c.kind == "categorical" for c in schema.columns], dtype=np.bool_)
