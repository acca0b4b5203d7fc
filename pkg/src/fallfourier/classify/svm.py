"""Soft-margin and one-class SVMs trained by sequential minimal optimisation.

Both problems are solved in the common dual form

    min_a  0.5 a'Qa + p'a   s.t.  y'a = const,  0 <= a_i <= C

with second-order working-set selection (Fan, Chen and Lin 2005). The
two-class problem uses ``Q_ij = y_i y_j K(x_i, x_j)`` and ``p = -1``; the
one-class (nu) problem uses ``Q = K``, ``p = 0``, upper bound 1 and
``sum(a) = nu * l``. Training stops once the maximal KKT violation
``m(a) - M(a)`` drops to ``tol``; if ``max_iter`` is hit first,
:class:`NonConvergence` is raised.
"""

from __future__ import annotations

import enum
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from ..errors import ContainsFall, EmptyTrainingSet, MissingClass, NonConvergence
from ..records import Label
from ._common import as_feature_set, query_matrix

__all__ = ["SvmKind", "KernelKind", "SvmModel", "svm_train", "svm_decision", "svm_predict"]

_TAU = 1e-12


class SvmKind(str, enum.Enum):
    TWO_CLASS = "TWO_CLASS"
    ONE_CLASS = "ONE_CLASS"


class KernelKind(str, enum.Enum):
    LINEAR = "LINEAR"
    RBF = "RBF"


def _kernel(A: np.ndarray, B: np.ndarray, kind: KernelKind, gamma: float) -> np.ndarray:
    G = A @ B.T
    if kind is KernelKind.LINEAR:
        return G
    sq = np.sum(A * A, axis=1)[:, None] + np.sum(B * B, axis=1)[None, :] - 2.0 * G
    return np.exp(-gamma * np.maximum(sq, 0.0))


class _QRows:
    """LRU cache of rows of Q."""

    def __init__(self, X, y, kind, gamma, cache_rows):
        self.X, self.y, self.kind, self.gamma = X, y, kind, gamma
        self.cache: OrderedDict[int, np.ndarray] = OrderedDict()
        self.capacity = max(2, cache_rows)

    def __call__(self, i: int) -> np.ndarray:
        row = self.cache.get(i)
        if row is not None:
            self.cache.move_to_end(i)
            return row
        row = self.y[i] * self.y * _kernel(self.X[i : i + 1], self.X, self.kind, self.gamma)[0]
        self.cache[i] = row
        if len(self.cache) > self.capacity:
            self.cache.popitem(last=False)
        return row

    def diag(self) -> np.ndarray:
        if self.kind is KernelKind.LINEAR:
            return np.sum(self.X * self.X, axis=1)
        return np.ones(self.X.shape[0])


def _solve(Q: _QRows, p, y, C, alpha, tol, max_iter):
    n = len(y)
    QD = Q.diag()
    G = p.copy()
    for i in np.flatnonzero(alpha):
        G += alpha[i] * Q(i)
    ypos = y > 0
    it = 0
    while True:
        up = np.where(ypos, alpha < C, alpha > 0)
        low = np.where(ypos, alpha > 0, alpha < C)
        minus_yG = -y * G
        if not up.any() or not low.any():
            gap = 0.0
            break
        cand_up = np.where(up, minus_yG, -np.inf)
        i = int(np.argmax(cand_up))
        g_max = cand_up[i]
        g_max2 = np.max(np.where(low, y * G, -np.inf))
        gap = g_max + g_max2
        if gap < tol:
            break
        if it >= max_iter:
            raise NonConvergence(it, gap)
        Qi = Q(i)
        grad_diff = g_max + y * G
        quad = QD[i] + QD - 2.0 * y[i] * y * Qi
        quad = np.where(quad > 0, quad, _TAU)
        obj = np.where(low & (grad_diff > 0), -(grad_diff**2) / quad, np.inf)
        j = int(np.argmin(obj))
        if not np.isfinite(obj[j]):
            break
        Qj = Q(j)
        ai, aj = alpha[i], alpha[j]
        if y[i] != y[j]:
            qc = QD[i] + QD[j] + 2.0 * Qi[j]
            delta = (-G[i] - G[j]) / (qc if qc > 0 else _TAU)
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj, ni = 0.0, diff
            elif ni < 0:
                ni, nj = 0.0, -diff
            if diff > 0:  # C_i == C_j here
                if ni > C:
                    ni, nj = C, C - diff
            elif nj > C:
                nj, ni = C, C + diff
        else:
            qc = QD[i] + QD[j] - 2.0 * Qi[j]
            delta = (G[i] - G[j]) / (qc if qc > 0 else _TAU)
            total = ai + aj
            ni, nj = ai - delta, aj + delta
            if total > C:
                if ni > C:
                    ni, nj = C, total - C
                if nj > C:
                    nj, ni = C, total - C
            else:
                if nj < 0:
                    nj, ni = 0.0, total
                if ni < 0:
                    ni, nj = 0.0, total
        G += Qi * (ni - ai) + Qj * (nj - aj)
        alpha[i], alpha[j] = ni, nj
        it += 1
    # offset from free variables, else midpoint of the feasible interval
    yG = y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = float(yG[free].mean())
    else:
        at_ub = alpha >= C
        upper_side = (at_ub & (y < 0)) | (~at_ub & (y > 0))
        ub = yG[upper_side].min() if upper_side.any() else np.inf
        lb = yG[~upper_side].max() if (~upper_side).any() else -np.inf
        rho = float((ub + lb) / 2) if np.isfinite(ub) and np.isfinite(lb) else float(ub if np.isfinite(ub) else lb)
    return alpha, rho, it, float(gap)


@dataclass(frozen=True)
class SvmModel:
    kind: SvmKind
    kernel: KernelKind
    gamma: float
    C: float
    nu: float
    support_vectors: np.ndarray
    coef: np.ndarray
    rho: float
    iterations: int = 0
    gap: float = 0.0

    @property
    def dim(self) -> int:
        return self.support_vectors.shape[1]


def svm_train(
    data,
    kind=SvmKind.TWO_CLASS,
    kernel=KernelKind.RBF,
    C: float = 1.0,
    nu: float = 0.1,
    gamma: float | None = None,
    tol: float = 1e-3,
    max_iter: int = 200_000,
    cache_mb: float = 200.0,
) -> SvmModel:
    """Train a two-class C-SVM or a one-class nu-SVM.

    ``gamma`` defaults to ``1/d`` for the RBF kernel. For TWO_CLASS, FALL
    is the +1 class. ONE_CLASS training data must be ADL only; its decision
    function is positive for inliers (ADL).
    """
    fs = as_feature_set(data)
    if len(fs) == 0:
        raise EmptyTrainingSet("no training data")
    kind, kernel = SvmKind(kind), KernelKind(kernel)
    X = np.ascontiguousarray(fs.X, dtype=np.float64)
    n, d = X.shape
    gamma = float(gamma) if gamma is not None else 1.0 / d
    cache_rows = int(cache_mb * 2**20 / (8 * n))
    if kind is SvmKind.TWO_CLASS:
        if set(np.unique(fs.labels).tolist()) != {Label.ADL, Label.FALL}:
            raise MissingClass("two-class SVM needs both ADL and FALL examples")
        if not C > 0:
            raise ValueError("C must be positive")
        y = np.where(fs.labels == Label.FALL, 1.0, -1.0)
        alpha = np.zeros(n)
        p = -np.ones(n)
        upper = float(C)
    else:
        if np.any(fs.labels == Label.FALL):
            raise ContainsFall("one-class SVM trains on ADL only")
        if not 0 < nu <= 1:
            raise ValueError("nu must lie in (0, 1]")
        y = np.ones(n)
        total = nu * n
        alpha = np.zeros(n)
        whole = min(int(total), n)
        alpha[:whole] = 1.0
        if whole < n:
            alpha[whole] = total - whole
        p = np.zeros(n)
        upper = 1.0
    Q = _QRows(X, y, kernel, gamma, cache_rows)
    alpha, rho, iterations, gap = _solve(Q, p, y, upper, alpha, tol, max_iter)
    sv = alpha > 0
    return SvmModel(
        kind=kind,
        kernel=kernel,
        gamma=gamma,
        C=float(C),
        nu=float(nu),
        support_vectors=X[sv].copy(),
        coef=(alpha * y)[sv],
        rho=rho,
        iterations=iterations,
        gap=gap,
    )


def svm_decision(model: SvmModel, x) -> np.ndarray:
    Q, single = query_matrix(x, model.dim)
    out = np.empty(Q.shape[0])
    for start in range(0, Q.shape[0], 512):
        K = _kernel(Q[start : start + 512], model.support_vectors, model.kernel, model.gamma)
        out[start : start + 512] = K @ model.coef - model.rho
    return out[0] if single else out


def svm_predict(model: SvmModel, x):
    """Map the decision sign to a label.

    Two-class: FALL iff decision > 0. One-class: FALL iff decision < 0.
    A decision of exactly zero is ADL in both cases.
    """
    _, single = query_matrix(x, model.dim)
    f = np.atleast_1d(svm_decision(model, x))
    fall = f > 0 if model.kind is SvmKind.TWO_CLASS else f < 0
    pred = fall.astype(np.int8)
    return Label(int(pred[0])) if single else pred
