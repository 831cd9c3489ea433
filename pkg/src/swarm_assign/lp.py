"""Numerical core for the max-min packing/covering LP.

    maximize w  s.t.  sum_{v in g} x_v <= b_g  (each variable in one group g)
                      (C x)_t >= w             (one row per covering target)
                      x >= 0

Solved with HiGHS; optimality is certified independently by building a
feasible dual from the covering multipliers. The least-distance projection
used to pick a canonical point of the optimal face goes through NNLS.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import highspy
import numpy as np
from scipy.optimize import nnls
from scipy.sparse import csc_matrix


@dataclass(frozen=True)
class MaxMinSolution:
    x: np.ndarray
    w: float
    dual_bound: float

    @property
    def gap(self) -> float:
        return self.dual_bound - self.w


def _group_matrix(groups: Sequence[Sequence[int]], n: int) -> np.ndarray:
    P = np.zeros((len(groups), n))
    for i, g in enumerate(groups):
        P[i, list(g)] = 1.0
    return P


def dual_bound(groups, bounds, C: np.ndarray, v: np.ndarray) -> float:
    """Objective of the dual point built from covering multipliers ``v``.

    Any ``v >= 0`` with positive sum yields a feasible dual after
    normalization, so the returned value is an upper bound on the LP optimum.
    """
    v = np.clip(np.asarray(v, dtype=float), 0.0, None)
    if C.shape[0] == 0:
        return np.inf
    if v.sum() <= 0:
        v = np.full(C.shape[0], 1.0 / C.shape[0])
    v = v / v.sum()
    reduced = C.T @ v
    return float(sum(b * max(0.0, reduced[list(g)].max(initial=0.0)) for g, b in zip(groups, bounds)))


def primal_value(groups, bounds, C: np.ndarray, x: np.ndarray, tol: float = 1e-9) -> float:
    """Covering value ``min_t (C x)_t`` after checking packing feasibility."""
    if (x < -tol).any():
        raise ValueError("negative primal entry")
    for g, b in zip(groups, bounds):
        if x[list(g)].sum() > b + tol:
            raise ValueError("packing row violated")
    return float((C @ x).min()) if C.shape[0] else np.inf


def solve_maxmin(groups: Sequence[Sequence[int]], bounds: Sequence[float], C: np.ndarray) -> MaxMinSolution:
    n = C.shape[1]
    m_pack, m_cov = len(groups), C.shape[0]
    if m_cov == 0:
        raise ValueError("max-min LP needs at least one covering row")
    A = np.zeros((m_pack + m_cov, n + 1))
    A[:m_pack, :n] = _group_matrix(groups, n)
    A[m_pack:, :n] = -C
    A[m_pack:, n] = 1.0
    inf = highspy.kHighsInf
    lp = highspy.HighsLp()
    lp.num_col_, lp.num_row_ = n + 1, m_pack + m_cov
    lp.col_cost_ = np.r_[np.zeros(n), -1.0]
    lp.col_lower_ = np.r_[np.zeros(n), -inf]
    lp.col_upper_ = np.full(n + 1, inf)
    lp.row_lower_ = np.full(m_pack + m_cov, -inf)
    lp.row_upper_ = np.r_[np.asarray(bounds, dtype=float), np.zeros(m_cov)]
    M = csc_matrix(A)
    lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
    lp.a_matrix_.start_, lp.a_matrix_.index_, lp.a_matrix_.value_ = M.indptr, M.indices, M.data
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("solver", "simplex")
    h.setOptionValue("threads", 1)
    h.passModel(lp)
    h.run()
    status = h.getModelStatus()
    if status != highspy.HighsModelStatus.kOptimal:
        raise RuntimeError(f"HiGHS failed: {h.modelStatusToString(status)}")
    sol = h.getSolution()
    col, row_dual = np.asarray(sol.col_value), np.asarray(sol.row_dual)
    x = np.clip(col[:n], 0.0, None)
    # shave rounding overshoot so packing rows hold exactly
    for g, bnd in zip(groups, bounds):
        s = x[list(g)].sum()
        if s > bnd:
            x[list(g)] *= bnd / s
    w = float((C @ x).min())
    v = -row_dual[m_pack:]
    return MaxMinSolution(x, w, dual_bound(groups, bounds, C, v))


def least_distance(G: np.ndarray, h: np.ndarray) -> np.ndarray | None:
    """Minimum-norm ``z`` with ``G z >= h`` via Lawson-Hanson NNLS; None if infeasible."""
    m, n = G.shape
    if m == 0 or (h <= 0).all():
        return np.zeros(n)
    E = np.vstack([G.T, h[None, :]])
    f = np.zeros(n + 1)
    f[n] = 1.0
    u, _ = nnls(E, f, maxiter=50 * (m + n))
    r = E @ u - f
    if abs(r[n]) < 1e-12 or np.linalg.norm(r) < 1e-12:
        return None
    return -r[:n] / r[n]


def project_onto_face(
    groups: Sequence[Sequence[int]],
    bounds: Sequence[float],
    C: np.ndarray,
    w_floor: float,
    x0: np.ndarray,
) -> np.ndarray | None:
    """Closest point to ``x0`` that is packing-feasible, nonnegative and
    covers every row by at least ``w_floor``."""
    n = C.shape[1]
    P = _group_matrix(groups, n)
    G = np.vstack([-P, C, np.eye(n)])
    h = np.concatenate([
        -(np.asarray(bounds, dtype=float) - P @ x0),
        w_floor - C @ x0,
        -x0,
    ])
    z = least_distance(G, h)
    if z is None:
        return None
    return np.clip(x0 + z, 0.0, None)
