"""Entropy / information-gain decision trees over mixed-type columns.

Continuous columns split binary at midpoints between consecutive distinct
values seen at the node (``x <= threshold`` goes left). Categorical columns
split multiway, one child per token seen at the node, plus a fallback to the
most populated child for tokens the node never saw.

The grower works on dense value ranks so a node's candidate thresholds come
from a counting pass instead of a sort whenever the column has few distinct
values relative to the node size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def entropy(class_counts) -> float:
    """Shannon entropy in bits of a (benign, malicious) count pair; empty gives 0."""
    total = sum(class_counts)
    if total <= 0:
        return 0.0
    h = 0.0
    for c in class_counts:
        if c > 0:
            p = c / total
            h -= p * math.log2(p)
    return max(h, 0.0)


def information_gain(labels, groups, weights=None) -> float:
    """Entropy of ``labels`` minus the size-weighted entropy of each group.

    ``groups`` assigns every row to one subset of the partition (any hashable
    ids). Tiny negative round-off is clamped to zero.
    """
    labels = np.asarray(labels).astype(np.int64)
    groups = np.asarray(groups)
    w = np.ones(len(labels)) if weights is None else np.asarray(weights, dtype=np.float64)
    if len(labels) == 0:
        return 0.0
    total = w.sum()
    mal = w[labels == 1].sum()
    gain = entropy((total - mal, mal))
    for g in np.unique(groups):
        sel = groups == g
        wt = w[sel].sum()
        mt = w[sel & (labels == 1)].sum()
        gain -= (wt / total) * entropy((wt - mt, mt))
    return max(gain, 0.0)


@njit(cache=True)
def _next(state):
    # splitmix64
    state[0] += _GOLDEN
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def _h(total, mal):
    if total <= 0 or mal <= 0 or mal >= total:
        return 0.0
    p = mal / total
    q = 1.0 - p
    return -(p * np.log2(p) + q * np.log2(q))


@njit(cache=True)
def _continuous_gain(idx, s, e, y, w, ranks, j, uniq, lo, hi, cw, cm, W, M, H, min_leaf):
    best = -1.0
    thr = 0.0
    U = hi - lo
    m = e - s
    WL = 0
    ML = 0
    prev = -1
    if U <= 4 * m:
        for t in range(s, e):
            r = idx[t]
            k = ranks[r, j]
            cw[k] += w[r]
            cm[k] += w[r] * y[r]
        for k in range(U):
            if cw[k] == 0:
                continue
            if prev >= 0:
                WR = W - WL
                if WL >= min_leaf and WR >= min_leaf:
                    MR = M - ML
                    g = H - (WL / W) * _h(WL, ML) - (WR / W) * _h(WR, MR)
                    if g > best:
                        best = g
                        thr = 0.5 * (uniq[lo + prev] + uniq[lo + k])
                        if thr >= uniq[lo + k]:
                            thr = uniq[lo + prev]
            WL += cw[k]
            ML += cm[k]
            cw[k] = 0
            cm[k] = 0
            prev = k
    else:
        rk = np.empty(m, np.int64)
        for t in range(m):
            rk[t] = ranks[idx[s + t], j]
        order = np.argsort(rk)
        t = 0
        while t < m:
            k = rk[order[t]]
            gw = 0
            gm = 0
            while t < m and rk[order[t]] == k:
                r = idx[s + order[t]]
                gw += w[r]
                gm += w[r] * y[r]
                t += 1
            if prev >= 0:
                WR = W - WL
                if WL >= min_leaf and WR >= min_leaf:
                    MR = M - ML
                    g = H - (WL / W) * _h(WL, ML) - (WR / W) * _h(WR, MR)
                    if g > best:
                        best = g
                        thr = 0.5 * (uniq[lo + prev] + uniq[lo + k])
                        if thr >= uniq[lo + k]:
                            thr = uniq[lo + prev]
            WL += gw
            ML += gm
            prev = k
    if -1.0 < best < 0.0:
        best = 0.0
    return best, thr


@njit(cache=True)
def _categorical_gain(idx, s, e, X, y, w, j, K, cw, cm, W, M, H, min_leaf):
    for t in range(s, e):
        r = idx[t]
        c = np.int64(X[r, j])
        cw[c] += w[r]
        cm[c] += w[r] * y[r]
    g = H
    children = 0
    ok = True
    for c in range(K):
        if cw[c] > 0:
            children += 1
            if cw[c] < min_leaf:
                ok = False
            g -= (cw[c] / W) * _h(cw[c], cm[c])
            cw[c] = 0
            cm[c] = 0
    if children < 2 or not ok:
        return -1.0
    return max(g, 0.0)


@njit(cache=True, nogil=True)
def _grow(X, y, w, is_cat, n_codes, ranks, uniq, uoff, max_features, seed,
          max_depth, min_split, min_leaf, eps):
    n, d = X.shape
    cap = 2 * n + 1
    feature = np.full(cap, -1, np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    br_start = np.zeros(cap, np.int64)
    br_len = np.zeros(cap, np.int64)
    fallback = np.full(cap, -1, np.int64)
    value = np.zeros(cap)
    count = np.zeros(cap, np.int64)
    br_code = np.empty(cap, np.int64)
    br_child = np.empty(cap, np.int64)
    n_br = 0

    idx = np.arange(n)
    buf = np.empty(n, np.int64)
    maxu = 1
    for j in range(d):
        if is_cat[j]:
            maxu = max(maxu, n_codes[j])
        else:
            maxu = max(maxu, uoff[j + 1] - uoff[j])
    cw = np.zeros(maxu + 1, np.int64)
    cm = np.zeros(maxu + 1, np.int64)
    seg = np.zeros(maxu + 2, np.int64)

    st_s = np.empty(cap, np.int64)
    st_e = np.empty(cap, np.int64)
    st_node = np.empty(cap, np.int64)
    st_depth = np.empty(cap, np.int64)
    sp = 0
    st_s[0] = 0
    st_e[0] = n
    st_node[0] = 0
    st_depth[0] = 0
    sp = 1
    n_nodes = 1

    state = np.empty(1, np.uint64)
    state[0] = np.uint64(seed)
    feats = np.arange(d)

    while sp > 0:
        sp -= 1
        s = st_s[sp]
        e = st_e[sp]
        node = st_node[sp]
        dep = st_depth[sp]
        W = 0
        M = 0
        for t in range(s, e):
            r = idx[t]
            W += w[r]
            M += w[r] * y[r]
        value[node] = M / W
        count[node] = W
        if M == 0 or M == W or dep >= max_depth or W < min_split:
            continue
        H = _h(W, M)

        if max_features < d:
            for t in range(d):
                feats[t] = t
            for t in range(d - 1, 0, -1):
                u = np.int64(_next(state) % np.uint64(t + 1))
                tmp = feats[t]
                feats[t] = feats[u]
                feats[u] = tmp

        best = -1.0
        best_j = -1
        best_thr = 0.0
        for t in range(d):
            if t >= max_features and best > eps:
                break
            j = feats[t]
            if is_cat[j]:
                g = _categorical_gain(idx, s, e, X, y, w, j, n_codes[j], cw, cm, W, M, H, min_leaf)
                th = 0.0
            else:
                g, th = _continuous_gain(idx, s, e, y, w, ranks, j, uniq,
                                         uoff[j], uoff[j + 1], cw, cm, W, M, H, min_leaf)
            if g < 0.0:
                continue
            if g > best or (g == best and j < best_j):
                best = g
                best_j = j
                best_thr = th
        if best_j < 0 or best <= eps:
            continue

        j = best_j
        feature[node] = j
        if not is_cat[j]:
            threshold[node] = best_thr
            nl = 0
            for t in range(s, e):
                if X[idx[t], j] <= best_thr:
                    buf[nl] = idx[t]
                    nl += 1
            nr = nl
            for t in range(s, e):
                if X[idx[t], j] > best_thr:
                    buf[nr] = idx[t]
                    nr += 1
            for t in range(e - s):
                idx[s + t] = buf[t]
            lc = n_nodes
            rc = n_nodes + 1
            n_nodes += 2
            left[node] = lc
            right[node] = rc
            # right pushed first so the left subtree is grown first
            st_s[sp] = s + nl
            st_e[sp] = e
            st_node[sp] = rc
            st_depth[sp] = dep + 1
            sp += 1
            st_s[sp] = s
            st_e[sp] = s + nl
            st_node[sp] = lc
            st_depth[sp] = dep + 1
            sp += 1
        else:
            K = n_codes[j]
            for c in range(K + 1):
                seg[c] = 0
            for t in range(s, e):
                c = np.int64(X[idx[t], j])
                seg[c + 1] += 1
                cw[c] += w[idx[t]]
            for c in range(K):
                seg[c + 1] += seg[c]
            for t in range(s, e):
                c = np.int64(X[idx[t], j])
                buf[seg[c]] = idx[t]
                seg[c] += 1
            for t in range(e - s):
                idx[s + t] = buf[t]
            br_start[node] = n_br
            first = n_br
            start = s
            best_w = -1
            for c in range(K):
                if cw[c] == 0:
                    continue
                # seg[c] now holds the end offset of code c
                stop = s + seg[c]
                child = n_nodes
                n_nodes += 1
                br_code[n_br] = c
                br_child[n_br] = child
                n_br += 1
                if cw[c] > best_w:
                    best_w = cw[c]
                    fallback[node] = child
                cw[c] = 0
                st_s[sp] = start
                st_e[sp] = stop
                st_node[sp] = child
                st_depth[sp] = dep + 1
                sp += 1
                start = stop
            br_len[node] = n_br - first
            # reverse the pushes so children are grown in token order
            a = sp - br_len[node]
            b = sp - 1
            while a < b:
                for arr in (st_s, st_e, st_node, st_depth):
                    tmp = arr[a]
                    arr[a] = arr[b]
                    arr[b] = tmp
                a += 1
                b -= 1
    return (feature[:n_nodes], threshold[:n_nodes], left[:n_nodes], right[:n_nodes],
            br_start[:n_nodes], br_len[:n_nodes], br_code[:n_br], br_child[:n_br],
            fallback[:n_nodes], value[:n_nodes], count[:n_nodes])


@njit(cache=True, nogil=True)
def _apply(X, feature, threshold, left, right, br_start, br_len, br_code, br_child, fallback):
    n = X.shape[0]
    out = np.empty(n, np.int64)
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            j = feature[node]
            if br_len[node] > 0:
                code = np.int64(X[i, j])
                nxt = fallback[node]
                for b in range(br_start[node], br_start[node] + br_len[node]):
                    if br_code[b] == code:
                        nxt = br_child[b]
                        break
                node = nxt
            elif X[i, j] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out


@dataclass
class TreeArrays:
    """Flat node arrays in pre-order (node 0 is the root)."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    br_start: np.ndarray
    br_len: np.ndarray
    br_code: np.ndarray
    br_child: np.ndarray
    fallback: np.ndarray
    value: np.ndarray
    count: np.ndarray

    @property
    def node_count(self) -> int:
        return len(self.feature)

    def is_leaf(self) -> np.ndarray:
        return self.feature < 0

    def depth(self) -> int:
        depth = np.zeros(self.node_count, np.int64)
        for node in range(self.node_count):
            for child in self.children(node):
                depth[child] = depth[node] + 1
        return int(depth.max())

    def children(self, node: int) -> list[int]:
        if self.feature[node] < 0:
            return []
        if self.br_len[node] > 0:
            a = self.br_start[node]
            return self.br_child[a:a + self.br_len[node]].tolist()
        return [int(self.left[node]), int(self.right[node])]

    def leaf_index(self, X: np.ndarray) -> np.ndarray:
        return _apply(np.ascontiguousarray(X, dtype=np.float64), self.feature, self.threshold,
                      self.left, self.right, self.br_start, self.br_len, self.br_code,
                      self.br_child, self.fallback)

    def malicious_fraction(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.leaf_index(X)]


def _preorder(t: TreeArrays) -> TreeArrays:
    order = []
    stack = [0]
    while stack:
        node = stack.pop()
        order.append(node)
        stack.extend(reversed(t.children(node)))
    new_id = np.empty(t.node_count, np.int64)
    new_id[order] = np.arange(len(order))
    order = np.array(order, np.int64)

    def remap(a):
        return np.where(a >= 0, new_id[np.maximum(a, 0)], -1)

    br_start = np.zeros(len(order), np.int64)
    br_code, br_child = [], []
    br_len = t.br_len[order].copy()
    for k, node in enumerate(order):
        if br_len[k]:
            a = t.br_start[node]
            br_start[k] = len(br_code)
            br_code.extend(t.br_code[a:a + br_len[k]].tolist())
            br_child.extend(new_id[t.br_child[a:a + br_len[k]]].tolist())
    return TreeArrays(
        feature=t.feature[order].copy(),
        threshold=t.threshold[order].copy(),
        left=remap(t.left[order]),
        right=remap(t.right[order]),
        br_start=br_start,
        br_len=br_len,
        br_code=np.array(br_code, np.int64),
        br_child=np.array(br_child, np.int64),
        fallback=remap(t.fallback[order]),
        value=t.value[order].copy(),
        count=t.count[order].copy(),
    )


@dataclass
class RankTable:
    """Dense per-column ranks of the training values (continuous columns only)."""

    ranks: np.ndarray  # (n, d) int64; zero for categorical columns
    uniq: np.ndarray  # concatenated sorted unique values
    uoff: np.ndarray  # (d + 1,) offsets into uniq

    @classmethod
    def build(cls, X: np.ndarray, is_cat: np.ndarray) -> "RankTable":
        n, d = X.shape
        ranks = np.zeros((n, d), np.int64)
        chunks, uoff = [], [0]
        for j in range(d):
            if is_cat[j]:
                u = np.empty(0)
            else:
                u, inv = np.unique(X[:, j], return_inverse=True)
                ranks[:, j] = inv.reshape(-1)
            chunks.append(u)
            uoff.append(uoff[-1] + len(u))
        return cls(ranks, np.concatenate(chunks) if chunks else np.empty(0), np.array(uoff, np.int64))


def grow_tree(X, y, w, is_cat, n_codes, *, max_depth, min_samples_split, min_samples_leaf,
              ig_epsilon, max_features=None, seed=0, ranks: RankTable | None = None) -> TreeArrays:
    """Grow one tree on rows with positive integer weight ``w`` (bootstrap counts)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    w = np.asarray(w, dtype=np.int64)
    d = X.shape[1]
    if ranks is None:
        ranks = RankTable.build(X, is_cat)
    keep = np.flatnonzero(w > 0)
    if len(keep) == 0:
        raise ValueError("no rows with positive weight")
    if len(keep) < len(w):
        Xk, yk, wk, rk = X[keep], y[keep], w[keep], ranks.ranks[keep]
    else:
        Xk, yk, wk, rk = X, y, w, ranks.ranks
    mf = d if max_features is None else int(max_features)
    out = _grow(Xk, yk, wk, np.asarray(is_cat, np.bool_), np.asarray(n_codes, np.int64),
                np.ascontiguousarray(rk), ranks.uniq, ranks.uoff, mf, np.uint64(seed),
                int(max_depth), int(min_samples_split), int(min_samples_leaf), float(ig_epsilon))
    return _preorder(TreeArrays(*out))
