"""Mixed-type naive Bayes: Gaussian continuous likelihoods, Laplace-smoothed categorical ones.

Everything is evaluated as sums of logs. Each categorical column keeps one
extra "unseen" bucket, so a token absent from training still has a finite
likelihood.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

_LOG_2PI = np.log(2.0 * np.pi)


@dataclass
class NaiveBayesModel:
    priors: np.ndarray  # (2,) benign, malicious
    means: np.ndarray  # (2, n_continuous)
    variances: np.ndarray  # (2, n_continuous)
    categorical: list[np.ndarray]  # per column, (2, vocab + 1); last slot is the unseen bucket

    def log_joint(self, cont: np.ndarray, codes: np.ndarray) -> np.ndarray:
        """(n, 2) log P(C_k) + sum_i log P(x_i | C_k)."""
        n = cont.shape[0]
        out = np.tile(np.log(self.priors), (n, 1))
        for k in (0, 1):
            var = self.variances[k]
            diff = cont - self.means[k]
            out[:, k] += -0.5 * (_LOG_2PI + np.log(var)).sum() - 0.5 * (diff * diff / var).sum(axis=1)
        for p, table in enumerate(self.categorical):
            c = codes[:, p].copy()
            c[c < 0] = table.shape[1] - 1
            out += np.log(table[:, c]).T
        return out

    def posterior_malicious(self, cont, codes) -> np.ndarray:
        lj = self.log_joint(cont, codes)
        return expit(lj[:, 1] - lj[:, 0])

    def predict(self, cont, codes) -> np.ndarray:
        lj = self.log_joint(cont, codes)
        # ties resolve to malicious
        return (lj[:, 1] >= lj[:, 0]).astype(np.int8)


def fit_naive_bayes(cont: np.ndarray, codes: np.ndarray, vocab_sizes: list[int], y: np.ndarray,
                    alpha: float = 1.0, variance_floor: float = 1e-9) -> NaiveBayesModel:
    y = np.asarray(y)
    n = len(y)
    counts = np.array([(y == 0).sum(), (y == 1).sum()], dtype=np.float64)
    if counts.min() > 0:
        priors = counts / n
    else:
        # one class absent: add-one prior so the log stays finite
        priors = (counts + 1.0) / (n + 2.0)
    nc = cont.shape[1]
    means = np.zeros((2, nc))
    variances = np.ones((2, nc))
    for k in (0, 1):
        rows = cont[y == k]
        if len(rows):
            means[k] = rows.mean(axis=0)
            variances[k] = np.maximum(rows.var(axis=0), variance_floor)
    tables = []
    for p, size in enumerate(vocab_sizes):
        table = np.empty((2, size + 1))
        for k in (0, 1):
            c = np.bincount(codes[y == k, p], minlength=size + 1)[: size + 1].astype(np.float64)
            table[k] = (c + alpha) / (counts[k] + alpha * (size + 1))
        tables.append(table)
    return NaiveBayesModel(priors, means, variances, tables)
