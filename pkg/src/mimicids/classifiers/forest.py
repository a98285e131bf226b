"""Bagged random forest over the entropy trees; majority vote, ties go to malicious."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .tree import RankTable, TreeArrays, grow_tree


def tree_streams(seed: int, index: int) -> tuple[np.random.Generator, int]:
    """Per-tree bootstrap generator and feature-sampling seed, fixed by (seed, index)."""
    ss = np.random.SeedSequence([seed & 0xFFFFFFFF, seed >> 32, index])
    boot, feat = ss.spawn(2)
    return np.random.default_rng(boot), int(feat.generate_state(1, np.uint64)[0])


def default_workers() -> int:
    raw = os.environ.get("MIMIC_IDS_THREADS", "")
    return max(1, int(raw)) if raw.strip().isdigit() else 1


def grow_forest(X, y, is_cat, n_codes, params, seed: int, workers: int | None = None) -> list[TreeArrays]:
    n, d = X.shape
    ranks = RankTable.build(X, is_cat)
    mf = params.features_per_split(d)

    def one(i):
        rng, fseed = tree_streams(seed, i)
        if params.bootstrap:
            w = np.bincount(rng.integers(0, n, n), minlength=n)
        else:
            w = np.ones(n, np.int64)
        return grow_tree(X, y, w, is_cat, n_codes, max_depth=params.max_depth,
                         min_samples_split=params.min_samples_split,
                         min_samples_leaf=params.min_samples_leaf, ig_epsilon=params.ig_epsilon,
                         max_features=mf, seed=fseed, ranks=ranks)

    workers = workers or default_workers()
    if workers == 1:
        return [one(i) for i in range(params.tree_count)]
    # tree kernels run with the GIL released; results do not depend on scheduling
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(params.tree_count)))


def vote_fraction(trees: list[TreeArrays], X) -> np.ndarray:
    votes = np.zeros(len(X))
    for t in trees:
        votes += t.malicious_fraction(X) >= 0.5
    return votes / len(trees)
