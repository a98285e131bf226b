"""Linear soft-margin SVM trained by mini-batch subgradient descent (Pegasos schedule)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

STD_FLOOR = 1e-12


@dataclass
class SvmModel:
    weights: np.ndarray  # over [standardized continuous | one-hot blocks]
    bias: float
    mean: np.ndarray
    std: np.ndarray
    offsets: list[int]  # start of each categorical one-hot block
    vocab_sizes: list[int]
    objective_trace: list[float] = field(default_factory=list, repr=False)

    @property
    def dim(self) -> int:
        return len(self.mean) + sum(self.vocab_sizes)

    def encode(self, cont: np.ndarray, codes: np.ndarray) -> np.ndarray:
        return encode(cont, codes, self.mean, self.std, self.offsets, self.dim)

    def decision(self, cont, codes) -> np.ndarray:
        return self.encode(cont, codes) @ self.weights + self.bias

    def predict(self, cont, codes) -> np.ndarray:
        # zero margin resolves to malicious
        return (self.decision(cont, codes) >= 0.0).astype(np.int8)

    def score(self, cont, codes) -> np.ndarray:
        return expit(self.decision(cont, codes))


def encode(cont, codes, mean, std, offsets, dim) -> np.ndarray:
    n, nc = cont.shape
    Z = np.zeros((n, dim))
    Z[:, :nc] = (cont - mean) / std
    rows = np.arange(n)
    for p, off in enumerate(offsets):
        c = codes[:, p]
        seen = c >= 0
        # unseen tokens leave their block all-zero
        Z[rows[seen], off + c[seen]] = 1.0
    return Z


def objective(w_aug: np.ndarray, Z1: np.ndarray, ys: np.ndarray, lam: float) -> float:
    margins = ys * (Z1 @ w_aug)
    return 0.5 * lam * float(w_aug @ w_aug) + float(np.maximum(0.0, 1.0 - margins).mean())


def fit_svm(cont, codes, vocab_sizes, y, *, lam=1e-4, epochs=50, batch_size=64, seed=0) -> SvmModel:
    """Minimize lam/2 ||w||^2 + mean hinge loss.

    The bias is the weight of a constant-1 input, so it is regularized with
    the rest. Step ``1/(lam t)`` at update ``t``, each iterate projected onto
    the ball of radius ``1/sqrt(lam)``. The returned weights are the iterate
    with the lowest full objective seen at an epoch boundary, so the recorded
    trace never increases.
    """
    mean = cont.mean(axis=0) if len(cont) else np.zeros(cont.shape[1])
    std = cont.std(axis=0) if len(cont) else np.ones(cont.shape[1])
    std = np.where(std < STD_FLOOR, 1.0, std)
    offsets, pos = [], cont.shape[1]
    for size in vocab_sizes:
        offsets.append(pos)
        pos += size
    Z = encode(cont, codes, mean, std, offsets, pos)
    n = Z.shape[0]
    Z1 = np.hstack([Z, np.ones((n, 1))])
    ys = np.where(np.asarray(y) == 1, 1.0, -1.0)

    rng = np.random.default_rng(seed)
    w = np.zeros(Z1.shape[1])
    radius = 1.0 / np.sqrt(lam)
    best_w = w.copy()
    best_obj = objective(w, Z1, ys, lam)
    trace = []
    t = 0
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            batch = order[start:start + batch_size]
            t += 1
            eta = 1.0 / (lam * t)
            zb, yb = Z1[batch], ys[batch]
            viol = yb * (zb @ w) < 1.0
            w *= 1.0 - eta * lam
            if viol.any():
                w += (eta / len(batch)) * (yb[viol] @ zb[viol])
            norm = np.sqrt(w @ w)
            if norm > radius:
                w *= radius / norm
        obj = objective(w, Z1, ys, lam)
        if obj < best_obj:
            best_obj = obj
            best_w = w.copy()
        trace.append(best_obj)
    return SvmModel(best_w[:-1].copy(), float(best_w[-1]), mean, std, offsets, list(vocab_sizes), trace)
