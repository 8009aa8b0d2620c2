"""Compiled kernels for CART growing and forest prediction.

Private module: dga_sentinel.forest is the API.  Everything here is
deterministic given its arguments.  The per-tree random stream is the
package-wide SplitMix64 sequence, consumed in a fixed order: first the
n bootstrap draws (when bagging), then k feature-subset draws at every
node that attempts a split, nodes visited in preorder.  Changing that
order invalidates committed fixtures.

Trees live in flat parallel arrays indexed by node id (preorder).  A
node with feature < 0 is a leaf; internal nodes send x[feature] <=
threshold left.  An impure node splits whenever any sampled feature has
two distinct values: the winner is the best (Gini decrease, lowest
feature index, lowest threshold) in that priority, realized by scanning
features in ascending index order and thresholds in ascending value
order with strict-greater acceptance.  Zero-gain splits are legal; both
children are strictly smaller, so growth still terminates at purity,
min_samples_split, max_depth, or value exhaustion.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def _next_u64(state):
    state[0] = state[0] + _GAMMA
    return _mix64(state[0])


@njit(cache=True, inline="always")
def _rand_below(state, n):
    return np.int64(_next_u64(state) % np.uint64(n))


@njit(cache=True)
def grow_tree(X, y, n_classes, seed, bootstrap, k_features, min_samples_split, max_depth):
    """Grow one CART tree; max_depth < 0 means unlimited.

    Returns (feature, threshold, left, right, counts, importance, n_nodes)
    with arrays trimmed to n_nodes.  importance[f] is the total weighted
    impurity decrease credited to feature f, normalized by the bootstrap
    sample size.
    """
    n, p = X.shape
    state = np.empty(1, np.uint64)
    state[0] = seed

    idx = np.empty(n, np.int64)
    if bootstrap:
        for i in range(n):
            idx[i] = _rand_below(state, n)
    else:
        for i in range(n):
            idx[i] = i

    cap = 2 * n + 1
    feature = np.full(cap, -1, np.int64)
    threshold = np.zeros(cap, np.float64)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    counts = np.zeros((cap, n_classes), np.int64)
    importance = np.zeros(p, np.float64)

    # segment stack; entries are (start, end, depth, parent, is_left)
    st_start = np.empty(cap, np.int64)
    st_end = np.empty(cap, np.int64)
    st_depth = np.empty(cap, np.int64)
    st_parent = np.empty(cap, np.int64)
    st_isleft = np.empty(cap, np.int64)
    sp = 0
    st_start[sp], st_end[sp], st_depth[sp], st_parent[sp], st_isleft[sp] = 0, n, 0, -1, 0
    sp += 1

    feat_pool = np.empty(p, np.int64)
    vals = np.empty(n, np.float64)
    buf = np.empty(n, np.int64)
    left_counts = np.empty(n_classes, np.int64)

    n_nodes = 0
    while sp > 0:
        sp -= 1
        start, end = st_start[sp], st_end[sp]
        depth, parent, is_left = st_depth[sp], st_parent[sp], st_isleft[sp]
        node = n_nodes
        n_nodes += 1
        if parent >= 0:
            if is_left == 1:
                left[parent] = node
            else:
                right[parent] = node

        seg = end - start
        top = np.int64(0)
        ss_p = np.int64(0)
        for i in range(start, end):
            counts[node, y[idx[i]]] += 1
        for c in range(n_classes):
            cc = counts[node, c]
            ss_p += cc * cc
            if cc > top:
                top = cc

        if top == seg or seg < min_samples_split or (max_depth >= 0 and depth >= max_depth):
            continue

        for j in range(p):
            feat_pool[j] = j
        k = k_features if k_features < p else p
        for j in range(k):
            r = j + _rand_below(state, p - j)
            feat_pool[j], feat_pool[r] = feat_pool[r], feat_pool[j]
        # ascending feature order realizes the lowest-index tie rule
        for j in range(1, k):
            key = feat_pool[j]
            i = j - 1
            while i >= 0 and feat_pool[i] > key:
                feat_pool[i + 1] = feat_pool[i]
                i -= 1
            feat_pool[i + 1] = key

        best_score = -1.0
        best_f = np.int64(-1)
        best_thr = 0.0
        best_gain = 0.0
        for fi in range(k):
            f = feat_pool[fi]
            for i in range(seg):
                vals[i] = X[idx[start + i], f]
            order = np.argsort(vals[:seg], kind="mergesort")
            for c in range(n_classes):
                left_counts[c] = 0
            ss_l = np.int64(0)
            for i in range(seg - 1):
                c = y[idx[start + order[i]]]
                ss_l += 2 * left_counts[c] + 1
                left_counts[c] += 1
                v_lo = vals[order[i]]
                v_hi = vals[order[i + 1]]
                if v_hi <= v_lo:
                    continue
                n_l = np.int64(i + 1)
                n_r = seg - n_l
                ss_r = np.int64(0)
                for cc in range(n_classes):
                    d = counts[node, cc] - left_counts[cc]
                    ss_r += d * d
                score = ss_l / n_l + ss_r / n_r
                if score > best_score:
                    best_score = score
                    best_f = f
                    thr = 0.5 * (v_lo + v_hi)
                    if thr >= v_hi:  # adjacent doubles: keep <= going left exact
                        thr = v_lo
                    best_thr = thr
                    gain = (score - ss_p / seg) / n
                    best_gain = gain if gain > 0.0 else 0.0

        if best_f < 0:
            continue

        feature[node] = best_f
        threshold[node] = best_thr
        importance[best_f] += best_gain

        li = start
        for i in range(start, end):
            if X[idx[i], best_f] <= best_thr:
                buf[li] = idx[i]
                li += 1
        ri = li
        for i in range(start, end):
            if X[idx[i], best_f] > best_thr:
                buf[ri] = idx[i]
                ri += 1
        for i in range(start, end):
            idx[i] = buf[i]

        st_start[sp], st_end[sp], st_depth[sp], st_parent[sp], st_isleft[sp] = li, end, depth + 1, node, 0
        sp += 1
        st_start[sp], st_end[sp], st_depth[sp], st_parent[sp], st_isleft[sp] = start, li, depth + 1, node, 1
        sp += 1

    return (
        feature[:n_nodes].copy(),
        threshold[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        counts[:n_nodes].copy(),
        importance,
        n_nodes,
    )


@njit(cache=True)
def predict_forest(X, feats, thrs, lefts, rights, leaf_probs, offsets, n_classes):
    """Mean leaf class distribution over all packed trees, per row of X.

    Packed layout: per-tree arrays concatenated with child links already
    rebased to absolute positions; offsets[t] is tree t's root.
    """
    n = X.shape[0]
    n_trees = offsets.shape[0]
    out = np.zeros((n, n_classes), np.float64)
    for i in range(n):
        for t in range(n_trees):
            node = offsets[t]
            while feats[node] >= 0:
                if X[i, feats[node]] <= thrs[node]:
                    node = lefts[node]
                else:
                    node = rights[node]
            for c in range(n_classes):
                out[i, c] += leaf_probs[node, c]
    for i in range(n):
        for c in range(n_classes):
            out[i, c] /= n_trees
    return out
