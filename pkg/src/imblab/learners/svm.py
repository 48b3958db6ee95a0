"""C-SVC with an RBF kernel trained by SMO, made probabilistic by Platt scaling.

The solver follows the usual decomposition scheme for the dual

    min_a  1/2 a'Qa - e'a   s.t.  0 <= a_i <= C,  y'a = 0,   Q_ij = y_i y_j K(x_i, x_j)

with second-order working-set selection, shrinking of bounded variables and
a FIFO cache of kernel columns restricted to the active set.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from numba import njit
from scipy.special import expit

from ..datagen import LabeledDataset
from .base import LearnerKind, ScoringModel, SvmParams, check_training_set

TAU = 1e-12
LOWER, UPPER, FREE = 0, 1, 2

_LOG2E = 1.4426950408889634
_LN2_HI = 6.93147180369123816490e-01
_LN2_LO = 1.90821492927058770002e-10


@njit(fastmath=True, cache=True)
def _exp_nonpositive(v, nbuf, count):
    """In-place ``exp`` of ``v[:count]`` (all entries <= 0).

    Cody-Waite range reduction plus a degree-11 Taylor polynomial, with the
    power of two added straight into the exponent bits; written so that the
    loops vectorise. Relative error is ~1e-15; arguments below -700 give 0.
    """
    for k in range(count):
        x = v[k]
        tiny = x < -700.0
        x = max(x, -700.0)
        n = math.floor(x * _LOG2E + 0.5)
        r = (x - n * _LN2_HI) - n * _LN2_LO
        p = 1.0 + r * (1.0 + r * (0.5 + r * (1.0 / 6 + r * (1.0 / 24 + r * (1.0 / 120 + r * (1.0 / 720 + r * (
            1.0 / 5040 + r * (1.0 / 40320 + r * (1.0 / 362880 + r * (1.0 / 3628800 + r * (1.0 / 39916800)))))))))))
        v[k] = 0.0 if tiny else p
        nbuf[k] = 0 if tiny else np.int64(n) << 52
    bits = v.view(np.int64)
    for k in range(count):
        bits[k] += nbuf[k]


@njit(fastmath=True, cache=True)
def _rbf_row(z, zn, pts_t, pts_n, count, gamma, out, nbuf):
    """``out[k] = exp(-gamma * |z - p_k|^2)`` for the first ``count`` columns of ``pts_t`` (d x m)."""
    for k in range(count):
        out[k] = zn + pts_n[k]
    for f in range(pts_t.shape[0]):
        zf = 2.0 * z[f]
        for k in range(count):
            out[k] -= zf * pts_t[f, k]
    for k in range(count):
        out[k] = -gamma * max(out[k], 0.0)
    _exp_nonpositive(out, nbuf, count)


@njit(cache=True)
def kernel_sums(z, sv_t, sv_n, coef, gamma):
    """``sum_s coef_s K(z_r, sv_s)`` for every row ``z_r``."""
    m = z.shape[0]
    s = sv_t.shape[1]
    out = np.empty(m)
    row = np.empty(s)
    nbuf = np.empty(s, np.int64)
    for r in range(m):
        zr = z[r]
        _rbf_row(zr, np.dot(zr, zr), sv_t, sv_n, s, gamma, row, nbuf)
        acc = 0.0
        for k in range(s):
            acc += coef[k] * row[k]
        out[r] = acc
    return out


@njit(cache=True)
def _status(a, C):
    if a >= C:
        return UPPER
    if a <= 0.0:
        return LOWER
    return FREE


@njit(cache=True)
def _reconstruct_gradient(x, norms, y, gamma, alpha, G, in_active):
    """Recompute ``G = Q alpha - e`` for every variable outside the active set."""
    n = x.shape[0]
    n_sv = 0
    for t in range(n):
        if alpha[t] > 0:
            n_sv += 1
    n_out = 0
    for t in range(n):
        if not in_active[t]:
            n_out += 1
    if n_out == 0:
        return
    sv_t = np.empty((x.shape[1], n_sv))
    sv_n = np.empty(n_sv)
    coef = np.empty(n_sv)
    k = 0
    for t in range(n):
        if alpha[t] > 0:
            sv_t[:, k] = x[t]
            sv_n[k] = norms[t]
            coef[k] = alpha[t] * y[t]
            k += 1
    rows = np.empty((n_out, x.shape[1]))
    which = np.empty(n_out, np.int64)
    k = 0
    for t in range(n):
        if not in_active[t]:
            rows[k] = x[t]
            which[k] = t
            k += 1
    sums = kernel_sums(rows, sv_t, sv_n, coef, gamma)
    for k in range(n_out):
        t = which[k]
        G[t] = y[t] * sums[k] - 1.0


@njit(cache=True)
def _compact(x, norms, y, G, status, active, n_active):
    """Gather the active variables into contiguous arrays."""
    d = x.shape[1]
    xa_t = np.empty((d, n_active))
    na = np.empty(n_active)
    ya = np.empty(n_active)
    ga = np.empty(n_active)
    sa = np.empty(n_active, np.int64)
    for k in range(n_active):
        t = active[k]
        for f in range(d):
            xa_t[f, k] = x[t, f]
        na[k] = norms[t]
        ya[k] = y[t]
        ga[k] = G[t]
        sa[k] = status[t]
    return xa_t, na, ya, ga, sa


@njit(cache=True)
def _select_i(ga, ya, sa, n_active):
    gmax = -np.inf
    ki = -1
    for k in range(n_active):
        if ya[k] > 0:
            if sa[k] != UPPER and -ga[k] >= gmax:
                gmax = -ga[k]
                ki = k
        else:
            if sa[k] != LOWER and ga[k] >= gmax:
                gmax = ga[k]
                ki = k
    return ki, gmax


@njit(cache=True)
def _select_j(ga, ya, sa, n_active, col_i, yi, gmax):
    j = -1
    gmax2 = -np.inf
    obj_min = np.inf
    for k in range(n_active):
        if ya[k] > 0:
            if sa[k] != LOWER:
                diff = gmax + ga[k]
                if ga[k] >= gmax2:
                    gmax2 = ga[k]
                if diff > 0:
                    quad = 2.0 - 2.0 * yi * col_i[k]
                    if quad <= 0:
                        quad = TAU
                    obj = -(diff * diff) / quad
                    if obj <= obj_min:
                        j = k
                        obj_min = obj
        else:
            if sa[k] != UPPER:
                diff = gmax - ga[k]
                if -ga[k] >= gmax2:
                    gmax2 = -ga[k]
                if diff > 0:
                    quad = 2.0 + 2.0 * yi * col_i[k]
                    if quad <= 0:
                        quad = TAU
                    obj = -(diff * diff) / quad
                    if obj <= obj_min:
                        j = k
                        obj_min = obj
    return j, gmax2


@njit(cache=True)
def smo_solve(x, y, C, gamma, eps, max_iter, shrinking, cache_bytes):
    """Solve the C-SVC dual. Returns ``(alpha, G, rho, iterations)``.

    ``G`` is the full dual gradient ``Q alpha - e`` at the solution. While
    iterating, gradient, label and status of the active variables live in
    compact arrays indexed by active position; ``G`` and ``status`` by
    variable index are only brought up to date when the active set changes.
    """
    n = x.shape[0]
    norms = np.empty(n)
    for t in range(n):
        norms[t] = np.dot(x[t], x[t])
    alpha = np.zeros(n)
    G = np.full(n, -1.0)
    status = np.zeros(n, np.int64)
    active = np.arange(n)
    in_active = np.ones(n, np.bool_)
    n_active = n
    xa_t, na, ya, ga, sa = _compact(x, norms, y, G, status, active, n_active)
    nbuf = np.empty(n, np.int64)

    # kernel columns restricted to the active set, FIFO replacement;
    # flushed whenever the active set changes
    n_slots = max(2, min(n, int(cache_bytes // (8 * n_active))))
    cache = np.empty((n_slots, n_active))
    slot_of = np.full(n, -1, np.int64)
    var_of = np.full(n_slots, -1, np.int64)
    next_slot = 0

    unshrunk = False
    counter = min(n, 1000) + 1
    iteration = 0
    while iteration < max_iter:
        counter -= 1
        rebuild = False
        if counter == 0:
            counter = min(n, 1000)
            if shrinking:
                gmax1 = -np.inf
                gmax2 = -np.inf
                for k in range(n_active):
                    if ya[k] > 0:
                        if sa[k] != UPPER:
                            gmax1 = max(gmax1, -ga[k])
                        if sa[k] != LOWER:
                            gmax2 = max(gmax2, ga[k])
                    else:
                        if sa[k] != UPPER:
                            gmax2 = max(gmax2, -ga[k])
                        if sa[k] != LOWER:
                            gmax1 = max(gmax1, ga[k])
                for k in range(n_active):
                    G[active[k]] = ga[k]
                if not unshrunk and gmax1 + gmax2 <= eps * 10:
                    unshrunk = True
                    if n_active < n:
                        _reconstruct_gradient(x, norms, y, gamma, alpha, G, in_active)
                        rebuild = True
                        n_active = n
                        for t in range(n):
                            active[t] = t
                            in_active[t] = True
                kept = 0
                for k in range(n_active):
                    t = active[k]
                    g = G[t]
                    shrink = False
                    if status[t] == UPPER:
                        shrink = (-g > gmax1) if y[t] > 0 else (-g > gmax2)
                    elif status[t] == LOWER:
                        shrink = (g > gmax2) if y[t] > 0 else (g > gmax1)
                    if shrink:
                        in_active[t] = False
                        rebuild = True
                    else:
                        active[kept] = t
                        kept += 1
                n_active = kept

        for attempt in range(2):
            if rebuild:
                xa_t, na, ya, ga, sa = _compact(x, norms, y, G, status, active, n_active)
                n_slots = max(2, min(n, int(cache_bytes // (8 * max(n_active, 1)))))
                cache = np.empty((n_slots, n_active))
                slot_of[:] = -1
                var_of = np.full(n_slots, -1, np.int64)
                next_slot = 0
                rebuild = False

            # second-order working set selection
            ki, gmax = _select_i(ga, ya, sa, n_active)
            kj = -1
            gmax2 = -np.inf
            if ki >= 0:
                i = active[ki]
                si = slot_of[i]
                if si < 0:
                    si = next_slot
                    old = var_of[si]
                    if old >= 0:
                        slot_of[old] = -1
                    _rbf_row(x[i], norms[i], xa_t, na, n_active, gamma, cache[si], nbuf)
                    yi = y[i]
                    for k in range(n_active):
                        cache[si, k] *= yi * ya[k]
                    var_of[si] = i
                    slot_of[i] = si
                    next_slot = (next_slot + 1) % n_slots
                kj, gmax2 = _select_j(ga, ya, sa, n_active, cache[si], y[i], gmax)
            optimal = gmax + gmax2 < eps or kj < 0
            if not optimal or attempt == 1 or n_active == n:
                break
            # the shrunk problem looks solved: restore the full set once and retry
            for k in range(n_active):
                G[active[k]] = ga[k]
            _reconstruct_gradient(x, norms, y, gamma, alpha, G, in_active)
            n_active = n
            for t in range(n):
                active[t] = t
                in_active[t] = True
            rebuild = True
            counter = 1
        if optimal:
            break

        iteration += 1
        i = active[ki]
        j = active[kj]
        si = slot_of[i]
        sj = slot_of[j]
        if sj < 0:
            sj = next_slot
            if sj == si:
                sj = (sj + 1) % n_slots
            old = var_of[sj]
            if old >= 0:
                slot_of[old] = -1
            _rbf_row(x[j], norms[j], xa_t, na, n_active, gamma, cache[sj], nbuf)
            yj = y[j]
            for k in range(n_active):
                cache[sj, k] *= yj * ya[k]
            var_of[sj] = j
            slot_of[j] = sj
            next_slot = (sj + 1) % n_slots
        col_i = cache[si]
        col_j = cache[sj]

        # two-variable subproblem (both diagonal entries of Q are 1)
        old_ai = alpha[i]
        old_aj = alpha[j]
        q_ij = col_i[kj]
        if y[i] != y[j]:
            quad = 2.0 + 2.0 * q_ij
            if quad <= 0:
                quad = TAU
            delta = (-ga[ki] - ga[kj]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = diff
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = -diff
            if diff > 0:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = C - diff
            else:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = C + diff
        else:
            quad = 2.0 - 2.0 * q_ij
            if quad <= 0:
                quad = TAU
            delta = (ga[ki] - ga[kj]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = total - C
            else:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = total
            if total > C:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = total - C
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = total

        dai = alpha[i] - old_ai
        daj = alpha[j] - old_aj
        for k in range(n_active):
            ga[k] += col_i[k] * dai + col_j[k] * daj
        status[i] = _status(alpha[i], C)
        status[j] = _status(alpha[j], C)
        sa[ki] = status[i]
        sa[kj] = status[j]

    for k in range(n_active):
        G[active[k]] = ga[k]
    _reconstruct_gradient(x, norms, y, gamma, alpha, G, in_active)

    ub = np.inf
    lb = -np.inf
    n_free = 0
    sum_free = 0.0
    for t in range(n):
        yg = y[t] * G[t]
        if status[t] == UPPER:
            if y[t] < 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        elif status[t] == LOWER:
            if y[t] > 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        else:
            n_free += 1
            sum_free += yg
    rho = sum_free / n_free if n_free > 0 else (ub + lb) / 2.0
    return alpha, G, rho, iteration


def platt_fit(decision: np.ndarray, positive: np.ndarray, max_iter: int = 100) -> tuple[float, float]:
    """Fit ``P(y=1 | f) = 1 / (1 + exp(A f + B))`` by regularised-target Newton steps.

    Targets are smoothed to ``(N+ + 1)/(N+ + 2)`` and ``1/(N- + 2)``; the Newton
    iteration uses a backtracking line search and a small Hessian ridge.
    """
    f = np.asarray(decision, dtype=float)
    pos = np.asarray(positive, dtype=bool)
    n_pos = int(pos.sum())
    n_neg = pos.size - n_pos
    hi = (n_pos + 1.0) / (n_pos + 2.0)
    lo = 1.0 / (n_neg + 2.0)
    t = np.where(pos, hi, lo)
    a, b = 0.0, math.log((n_neg + 1.0) / (n_pos + 1.0))
    min_step, sigma, eps = 1e-10, 1e-12, 1e-5

    def objective(a_, b_):
        z = f * a_ + b_
        # sum of t*z + log(1 + exp(-z)) written stably
        return float(np.sum(t * z + np.logaddexp(0.0, -z)))

    fval = objective(a, b)
    for _ in range(max_iter):
        z = f * a + b
        p = expit(-z)  # P(y=1)
        q = 1.0 - p
        d2 = p * q
        h11 = sigma + np.sum(f * f * d2)
        h22 = sigma + np.sum(d2)
        h21 = np.sum(f * d2)
        d1 = t - p
        g1 = np.sum(f * d1)
        g2 = np.sum(d1)
        if abs(g1) < eps and abs(g2) < eps:
            break
        det = h11 * h22 - h21 * h21
        da = -(h22 * g1 - h21 * g2) / det
        db = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * da + g2 * db
        step = 1.0
        while step >= min_step:
            na, nb = a + step * da, b + step * db
            nf = objective(na, nb)
            if nf < fval + 1e-4 * step * gd:
                a, b, fval = na, nb, nf
                break
            step /= 2.0
        else:
            break
    return float(a), float(b)


class SvmModel(ScoringModel):
    kind = LearnerKind.Svm

    def __init__(self, support, coef, rho, gamma, platt, n_iter, n_features):
        super().__init__(n_features)
        self.support_vectors = support
        self.dual_coef = coef
        self.rho = rho
        self.gamma = gamma
        self.platt = platt
        self.n_iter = n_iter

    def decision_function(self, x: np.ndarray) -> np.ndarray:
        sv = self.support_vectors
        sums = kernel_sums(
            np.ascontiguousarray(x, dtype=float),
            np.ascontiguousarray(sv.T),
            np.einsum("ij,ij->i", sv, sv),
            self.dual_coef,
            self.gamma,
        )
        return sums - self.rho

    def _raw_score(self, x):
        a, b = self.platt
        return expit(-(a * self.decision_function(x) + b))


def fit_svm(train: LabeledDataset, hp: SvmParams = SvmParams()) -> SvmModel:
    x, y01 = check_training_set(train)
    x = np.ascontiguousarray(x)
    n, d = x.shape
    y = np.where(y01 > 0.5, 1.0, -1.0)
    gamma = hp.gamma if hp.gamma is not None else 1.0 / d
    max_iter = int(hp.max_passes) * n
    alpha, grad, rho, n_iter = smo_solve(
        x, y, float(hp.C), float(gamma), float(hp.tol), max_iter, bool(hp.shrinking), float(hp.cache_mb) * 2**20
    )
    if n_iter >= max_iter:
        warnings.warn(f"SMO hit the iteration cap ({max_iter}) before reaching tolerance {hp.tol}")
    # decision values on the training set come for free from the dual gradient
    train_decision = y * (grad + 1.0) - rho
    platt = platt_fit(train_decision, y > 0)
    sv = alpha > 0
    return SvmModel(
        np.ascontiguousarray(x[sv]), alpha[sv] * y[sv], float(rho), float(gamma), platt, int(n_iter), d
    )
