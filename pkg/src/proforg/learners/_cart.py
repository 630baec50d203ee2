"""Compiled kernels for weighted least-squares regression trees.

Trees are grown depth-first on presorted index lists: every node owns one
contiguous segment per feature, kept sorted by that feature, and children are
formed by a stable partition of each segment.  Split search is therefore a
single linear scan per feature and node.

A tree is five flat arrays (feature, threshold, left, right, value); leaves
have ``feature == -1``.  Samples with ``x[feature] <= threshold`` go left.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def build_tree(X, y, w, sorted_idx, max_depth, min_leaf):
    n, F = X.shape
    n_eff = 0
    for i in range(n):
        if w[i] > 0:
            n_eff += 1

    order = np.empty((F, n_eff), dtype=np.int64)
    for f in range(F):
        k = 0
        for j in range(n):
            i = sorted_idx[f, j]
            if w[i] > 0:
                order[f, k] = i
                k += 1

    cap = 2 * n_eff + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    value = np.zeros(cap)

    go_left = np.zeros(n, dtype=np.bool_)
    tmp = np.empty(n_eff, dtype=np.int64)

    stack_node = np.empty(cap, dtype=np.int64)
    stack_start = np.empty(cap, dtype=np.int64)
    stack_end = np.empty(cap, dtype=np.int64)
    stack_depth = np.empty(cap, dtype=np.int64)
    top = 0
    stack_node[0] = 0
    stack_start[0] = 0
    stack_end[0] = n_eff
    stack_depth[0] = 0
    top = 1
    n_nodes = 1

    while top > 0:
        top -= 1
        node = stack_node[top]
        start = stack_start[top]
        end = stack_end[top]
        depth = stack_depth[top]

        w_tot = 0.0
        s_tot = 0.0
        y_min = np.inf
        y_max = -np.inf
        for j in range(start, end):
            i = order[0, j]
            w_tot += w[i]
            s_tot += w[i] * y[i]
            if y[i] < y_min:
                y_min = y[i]
            if y[i] > y_max:
                y_max = y[i]
        value[node] = s_tot / w_tot

        if y_max - y_min <= 0.0:
            value[node] = y_min
            continue
        if max_depth > 0 and depth >= max_depth:
            continue
        if w_tot < 2 * min_leaf:
            continue

        parent_score = s_tot * s_tot / w_tot
        best_score = parent_score
        best_f = -1
        best_pos = -1
        for f in range(F):
            wl = 0.0
            sl = 0.0
            for j in range(start, end - 1):
                i = order[f, j]
                wl += w[i]
                sl += w[i] * y[i]
                nxt = order[f, j + 1]
                if X[i, f] < X[nxt, f]:
                    wr = w_tot - wl
                    if wl >= min_leaf and wr >= min_leaf:
                        sr = s_tot - sl
                        score = sl * sl / wl + sr * sr / wr
                        if score > best_score + 1e-12 * abs(best_score):
                            best_score = score
                            best_f = f
                            best_pos = j

        if best_f < 0:
            continue

        lo = X[order[best_f, best_pos], best_f]
        hi = X[order[best_f, best_pos + 1], best_f]
        thr = 0.5 * (lo + hi)
        if not thr < hi:
            thr = lo

        for j in range(start, end):
            go_left[order[best_f, j]] = j <= best_pos
        n_left = best_pos + 1 - start

        for f in range(F):
            a = start
            b = 0
            for j in range(start, end):
                i = order[f, j]
                if go_left[i]:
                    order[f, a] = i
                    a += 1
                else:
                    tmp[b] = i
                    b += 1
            for j in range(b):
                order[f, a + j] = tmp[j]

        feature[node] = best_f
        threshold[node] = thr
        lc = n_nodes
        rc = n_nodes + 1
        n_nodes += 2
        left[node] = lc
        right[node] = rc

        # right pushed first so the left subtree is grown first
        stack_node[top] = rc
        stack_start[top] = start + n_left
        stack_end[top] = end
        stack_depth[top] = depth + 1
        top += 1
        stack_node[top] = lc
        stack_start[top] = start
        stack_end[top] = start + n_left
        stack_depth[top] = depth + 1
        top += 1

    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(),
            left[:n_nodes].copy(), right[:n_nodes].copy(), value[:n_nodes].copy())


@njit(cache=True)
def predict_trees(X, roots, feature, threshold, left, right, value):
    """Sum over trees (given by ``roots``) of the leaf values reached by each row."""
    n = X.shape[0]
    out = np.zeros(n)
    n_trees = roots.shape[0]
    for r in range(n):
        acc = 0.0
        for t in range(n_trees):
            node = roots[t]
            while feature[node] >= 0:
                if X[r, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            acc += value[node]
        out[r] = acc
    return out


@njit(cache=True)
def mean_trees(X, roots, feature, threshold, left, right, value):
    """Per-row mean leaf value, accumulated as offsets from the first tree's leaf so that
    unanimous trees reproduce their common value bit-exactly."""
    n = X.shape[0]
    out = np.zeros(n)
    n_trees = roots.shape[0]
    for r in range(n):
        first = 0.0
        acc = 0.0
        for t in range(n_trees):
            node = roots[t]
            while feature[node] >= 0:
                if X[r, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            if t == 0:
                first = value[node]
            else:
                acc += value[node] - first
        out[r] = first + acc / n_trees
    return out


def presort(X):
    """Stable per-feature argsort, shape ``(n_features, n_samples)``."""
    return np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T)
