"""Compiled kernels for axis-aligned binary trees.

Both builders work on presorted column orders: ``idx[f]`` lists the node's
samples sorted by feature ``f`` and every node owns the same ``[start, end)``
slice in all rows. After a split each row is stably partitioned, so no node
ever re-sorts. A split sends ``x[f] <= threshold`` left, where the threshold
is the largest left-hand training value; routing therefore only depends on
the order of feature values.
"""

from __future__ import annotations

import numpy as np
from numba import njit

LEAF = -1


def presort(x: np.ndarray) -> np.ndarray:
    """Per-feature stable argsort, shape ``(d, n)``."""
    return np.ascontiguousarray(np.argsort(x, axis=0, kind="stable").T.astype(np.int64))


@njit(cache=True)
def _partition(idx, f_split, start, end, goes_left, buf):
    d = idx.shape[0]
    for g in range(d):
        if g == f_split:
            continue
        lo = start
        hi = 0
        for p in range(start, end):
            s = idx[g, p]
            if goes_left[s]:
                idx[g, lo] = s
                lo += 1
            else:
                buf[hi] = s
                hi += 1
        for q in range(hi):
            idx[g, lo + q] = buf[q]


@njit(cache=True)
def filter_order(order, weight):
    d, n = order.shape
    m = 0
    for i in range(n):
        if weight[i] > 0:
            m += 1
    out = np.empty((d, m), np.int64)
    for f in range(d):
        k = 0
        for p in range(n):
            s = order[f, p]
            if weight[s] > 0:
                out[f, k] = s
                k += 1
    return out


@njit(cache=True)
def build_gini_tree(x, y, weight, idx, mtry, min_node_size, seed):
    """Grow one CART classification tree (Gini) to purity on weighted samples.

    ``idx`` is consumed (partitioned in place). Returns node arrays
    ``(feature, threshold, left, right, value)``; ``value`` is the leaf vote
    (1, 0, or 0.5 on an exact weighted tie).
    """
    np.random.seed(seed)
    d, m = idx.shape
    cap = 2 * m + 1
    feature = np.full(cap, LEAF, np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, LEAF, np.int64)
    right = np.full(cap, LEAF, np.int64)
    value = np.zeros(cap)
    goes_left = np.zeros(x.shape[0], np.bool_)
    buf = np.empty(m, np.int64)
    feats = np.arange(d)

    stack_node = np.empty(cap, np.int64)
    stack_start = np.empty(cap, np.int64)
    stack_end = np.empty(cap, np.int64)
    top = 0
    stack_node[0] = 0
    stack_start[0] = 0
    stack_end[0] = m
    top = 1
    n_nodes = 1

    while top > 0:
        top -= 1
        node = stack_node[top]
        start = stack_start[top]
        end = stack_end[top]

        w0 = 0.0
        w1 = 0.0
        for p in range(start, end):
            s = idx[0, p]
            if y[s] > 0.5:
                w1 += weight[s]
            else:
                w0 += weight[s]
        total = w0 + w1
        if w1 > w0:
            value[node] = 1.0
        elif w1 < w0:
            value[node] = 0.0
        else:
            value[node] = 0.5
        if w0 == 0.0 or w1 == 0.0 or total < 2 * min_node_size:
            continue

        # random feature order; only non-constant features count towards mtry
        for a in range(d - 1, 0, -1):
            b = np.random.randint(0, a + 1)
            tmp = feats[a]
            feats[a] = feats[b]
            feats[b] = tmp

        best_score = -1.0
        best_f = -1
        best_pos = -1
        visited = 0
        for t in range(d):
            if visited >= mtry:
                break
            f = feats[t]
            if x[idx[f, start], f] == x[idx[f, end - 1], f]:
                continue
            visited += 1
            l0 = 0.0
            l1 = 0.0
            for p in range(start, end - 1):
                s = idx[f, p]
                if y[s] > 0.5:
                    l1 += weight[s]
                else:
                    l0 += weight[s]
                if x[s, f] == x[idx[f, p + 1], f]:
                    continue
                nl = l0 + l1
                r0 = w0 - l0
                r1 = w1 - l1
                nr = r0 + r1
                if nl < min_node_size or nr < min_node_size:
                    continue
                # minimising weighted child Gini == maximising this
                score = (l0 * l0 + l1 * l1) / nl + (r0 * r0 + r1 * r1) / nr
                if score > best_score:
                    best_score = score
                    best_f = f
                    best_pos = p
        if best_f < 0:
            continue

        for p in range(start, end):
            goes_left[idx[best_f, p]] = p <= best_pos
        _partition(idx, best_f, start, end, goes_left, buf)

        mid = best_pos + 1
        feature[node] = best_f
        threshold[node] = x[idx[best_f, best_pos], best_f]
        left[node] = n_nodes
        right[node] = n_nodes + 1
        stack_node[top] = n_nodes
        stack_start[top] = start
        stack_end[top] = mid
        top += 1
        stack_node[top] = n_nodes + 1
        stack_start[top] = mid
        stack_end[top] = end
        top += 1
        n_nodes += 2

    return feature[:n_nodes], threshold[:n_nodes], left[:n_nodes], right[:n_nodes], value[:n_nodes]


@njit(cache=True)
def build_boost_tree(x, grad, hess, idx, max_depth, reg_lambda, min_child_weight, gamma, eta, margin):
    """Grow one second-order regression tree depth-first and add its output to ``margin``.

    Leaf weights are ``-eta * G / (H + lambda)``.
    """
    d, m = idx.shape
    cap = 2 ** (max_depth + 1)
    feature = np.full(cap, LEAF, np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, LEAF, np.int64)
    right = np.full(cap, LEAF, np.int64)
    value = np.zeros(cap)
    goes_left = np.zeros(x.shape[0], np.bool_)
    buf = np.empty(m, np.int64)

    stack_node = np.empty(cap, np.int64)
    stack_start = np.empty(cap, np.int64)
    stack_end = np.empty(cap, np.int64)
    stack_depth = np.empty(cap, np.int64)
    stack_node[0] = 0
    stack_start[0] = 0
    stack_end[0] = m
    stack_depth[0] = 0
    top = 1
    n_nodes = 1

    while top > 0:
        top -= 1
        node = stack_node[top]
        start = stack_start[top]
        end = stack_end[top]
        depth = stack_depth[top]

        g_sum = 0.0
        h_sum = 0.0
        for p in range(start, end):
            s = idx[0, p]
            g_sum += grad[s]
            h_sum += hess[s]
        leaf_value = -eta * g_sum / (h_sum + reg_lambda)
        value[node] = leaf_value

        best_gain = 1e-6
        best_f = -1
        best_pos = -1
        if depth < max_depth:
            parent = g_sum * g_sum / (h_sum + reg_lambda)
            for f in range(d):
                gl = 0.0
                hl = 0.0
                for p in range(start, end - 1):
                    s = idx[f, p]
                    gl += grad[s]
                    hl += hess[s]
                    if x[s, f] == x[idx[f, p + 1], f]:
                        continue
                    hr = h_sum - hl
                    if hl < min_child_weight or hr < min_child_weight:
                        continue
                    gr = g_sum - gl
                    gain = 0.5 * (gl * gl / (hl + reg_lambda) + gr * gr / (hr + reg_lambda) - parent) - gamma
                    if gain > best_gain:
                        best_gain = gain
                        best_f = f
                        best_pos = p

        if best_f < 0:
            for p in range(start, end):
                margin[idx[0, p]] += leaf_value
            continue

        for p in range(start, end):
            goes_left[idx[best_f, p]] = p <= best_pos
        _partition(idx, best_f, start, end, goes_left, buf)

        mid = best_pos + 1
        feature[node] = best_f
        threshold[node] = x[idx[best_f, best_pos], best_f]
        left[node] = n_nodes
        right[node] = n_nodes + 1
        stack_node[top] = n_nodes
        stack_start[top] = start
        stack_end[top] = mid
        stack_depth[top] = depth + 1
        top += 1
        stack_node[top] = n_nodes + 1
        stack_start[top] = mid
        stack_end[top] = end
        stack_depth[top] = depth + 1
        top += 1
        n_nodes += 2

    return feature[:n_nodes], threshold[:n_nodes], left[:n_nodes], right[:n_nodes], value[:n_nodes]


def pack_trees(trees):
    """Concatenate per-tree node arrays into flat arrays plus root offsets."""
    roots = np.zeros(len(trees), np.int64)
    offset = 0
    feats, thrs, lefts, rights, vals = [], [], [], [], []
    for t, (f, thr, lft, rgt, val) in enumerate(trees):
        roots[t] = offset
        feats.append(f)
        thrs.append(thr)
        lefts.append(np.where(lft >= 0, lft + offset, LEAF))
        rights.append(np.where(rgt >= 0, rgt + offset, LEAF))
        vals.append(val)
        offset += f.size
    return (
        roots,
        np.concatenate(feats),
        np.concatenate(thrs),
        np.concatenate(lefts),
        np.concatenate(rights),
        np.concatenate(vals),
    )


@njit(cache=True)
def predict_sum(x, roots, feature, threshold, left, right, value):
    """Sum of leaf values over all trees for every row of ``x``.

    Trees are visited in order for every row, so the floating-point sum
    does not depend on the loop nesting; tree-major order keeps one tree
    in cache at a time.
    """
    n = x.shape[0]
    out = np.zeros(n)
    for t in range(roots.size):
        root = roots[t]
        for i in range(n):
            node = root
            while feature[node] >= 0:
                if x[i, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            out[i] += value[node]
    return out
