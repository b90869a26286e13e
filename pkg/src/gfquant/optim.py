"""Self-contained convex quadratic-program solver for the design problems.

minimize 0.5 z^T Q z + c^T z subject to a_i^T z <= b_i and optional box
bounds, solved by operator splitting (ADMM with over-relaxation) followed by
an exact active-set polish of the identified solution. Deterministic:
identical inputs produce identical iterates.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

_SIGMA = 1e-6
_RHO = 1.0
_ALPHA = 1.6
_CHECK_EVERY = 25


@dataclass(frozen=True)
class QuadraticProgram:
    """Convex QP data: symmetric PSD Q, linear term c, rows G z <= h, boxes.

    Q is symmetrized on construction; eigenvalues below zero (tolerated down
    to -1e-9, e.g. discretization noise) are clipped, with a logged warning
    once the deficit exceeds roundoff scale.
    """

    Q: np.ndarray
    c: np.ndarray
    G: np.ndarray | None = None
    h: np.ndarray | None = None
    lb: np.ndarray | None = None
    ub: np.ndarray | None = None

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float)
        c = np.asarray(self.c, dtype=float).reshape(-1)
        n = c.size
        if Q.shape != (n, n):
            raise ValueError("Q must be n x n matching c")
        scale = max(1.0, float(np.abs(Q).max()))
        if np.abs(Q - Q.T).max() > 1e-12 * scale:
            raise ValueError("Q must be symmetric within 1e-12")
        Q = 0.5 * (Q + Q.T)
        eigvals, eigvecs = np.linalg.eigh(Q)
        if eigvals[0] < -1e-9 * scale:
            raise ValueError(f"Q is not positive semidefinite (min eig {eigvals[0]:.3g})")
        if eigvals[0] < 0.0:
            # roundoff-scale negatives are routine for assembled Gram matrices;
            # only larger clips deserve a visible warning
            log = logger.warning if eigvals[0] < -1e-13 * scale else logger.debug
            log(
                "clipping %d negative eigenvalue(s) of Q at 0 (min %.3g)",
                int(np.sum(eigvals < 0)),
                eigvals[0],
            )
            eigvals = np.clip(eigvals, 0.0, None)
            Q = (eigvecs * eigvals) @ eigvecs.T
            Q = 0.5 * (Q + Q.T)
        Q.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "c", c)
        G = self.G
        h = self.h
        if (G is None) != (h is None):
            raise ValueError("G and h must be supplied together")
        if G is not None:
            G = np.asarray(G, dtype=float).reshape(-1, n)
            h = np.asarray(h, dtype=float).reshape(-1)
            if G.shape[0] != h.size:
                raise ValueError("G rows and h length differ")
            G.setflags(write=False)
            h.setflags(write=False)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "h", h)
        for name in ("lb", "ub"):
            v = getattr(self, name)
            if v is not None:
                v = np.asarray(v, dtype=float).reshape(-1)
                if v.size != n:
                    raise ValueError(f"{name} length mismatch")
                v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def n(self) -> int:
        return self.c.size

    def stacked_inequalities(self):
        """All constraints as (A, b) rows meaning A z <= b (boxes included)."""
        rows, rhs = [], []
        if self.G is not None:
            rows.append(self.G)
            rhs.append(self.h)
        eye = np.eye(self.n)
        if self.ub is not None:
            finite = np.isfinite(self.ub)
            rows.append(eye[finite])
            rhs.append(self.ub[finite])
        if self.lb is not None:
            finite = np.isfinite(self.lb)
            rows.append(-eye[finite])
            rhs.append(-self.lb[finite])
        if not rows:
            return np.zeros((0, self.n)), np.zeros(0)
        return np.vstack(rows), np.concatenate(rhs)

    def objective(self, z: np.ndarray) -> float:
        z = np.asarray(z, dtype=float)
        return float(0.5 * z @ self.Q @ z + self.c @ z)


def _polish(p: QuadraticProgram, A, b, z, y, tol):
    """Exact KKT solve on the active set identified from (z, y)."""
    n = p.n
    scale = np.maximum(1.0, np.abs(b)) if b.size else b
    active = np.zeros(len(b), dtype=bool)
    if len(b):
        active = (b - A @ z <= 1e-6 * scale) | (y > 1e-6)
    A_act = A[active]
    k = A_act.shape[0]
    kkt = np.zeros((n + k, n + k))
    kkt[:n, :n] = p.Q + 1e-12 * np.eye(n)
    if k:
        kkt[:n, n:] = A_act.T
        kkt[n:, :n] = A_act
    rhs = np.concatenate([-p.c, b[active]])
    try:
        sol = np.linalg.solve(kkt, rhs)
    except np.linalg.LinAlgError:
        sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
    z_pol = sol[:n]
    mu = sol[n:]
    if k and np.any(mu < -1e-7):
        return None
    if len(b) and np.any(A @ z_pol - b > tol):
        return None
    stat = p.Q @ z_pol + p.c
    if k:
        stat = stat + A_act.T @ mu
    if np.abs(stat).max() > tol * max(1.0, np.abs(p.c).max()):
        return None
    return z_pol


def solve_qp(
    p: QuadraticProgram,
    tol: float = 1e-8,
    max_iter: int = 100_000,
    residuals_csv=None,
):
    """Solve the QP; returns (z, status) with status in
    {"optimal", "infeasible", "max_iter"}.

    Operator splitting with over-relaxation (alpha=1.6) on the splitting
    z-update / projection of A z onto {s <= b} / dual ascent, factorizing
    (Q + sigma I + rho A^T A) once. On convergence the active set is polished
    by an exact equality-constrained KKT solve, driving KKT residuals well
    below tol. Divergence of the dual update with A^T dy -> 0 and
    b^T dy < 0 certifies infeasibility.
    """
    A, b = p.stacked_inequalities()
    n = p.n
    m_rows = A.shape[0]
    if m_rows == 0:
        try:
            z = np.linalg.solve(p.Q + 1e-12 * np.eye(n), -p.c)
        except np.linalg.LinAlgError:
            z, *_ = np.linalg.lstsq(p.Q, -p.c, rcond=None)
        return z, "optimal"

    kkt = p.Q + _SIGMA * np.eye(n) + _RHO * (A.T @ A)
    try:
        chol = np.linalg.cholesky(kkt)
        solve = lambda rhs: np.linalg.solve(chol.T, np.linalg.solve(chol, rhs))
    except np.linalg.LinAlgError:
        solve = lambda rhs: np.linalg.solve(kkt, rhs)

    z = np.zeros(n)
    s = np.minimum(np.zeros(m_rows), b)
    y = np.zeros(m_rows)
    y_window = y.copy()
    rows = []
    status = "max_iter"
    for it in range(1, max_iter + 1):
        rhs = _SIGMA * z - p.c + A.T @ (_RHO * s - y)
        z_tilde = solve(rhs)
        az_tilde = A @ z_tilde
        z = _ALPHA * z_tilde + (1.0 - _ALPHA) * z
        s_arg = _ALPHA * az_tilde + (1.0 - _ALPHA) * s + y / _RHO
        s_new = np.minimum(s_arg, b)
        y = _RHO * (s_arg - s_new)
        s = s_new
        if it % _CHECK_EVERY == 0 or it == max_iter:
            az = A @ z
            r_prim = np.abs(az - s).max() if m_rows else 0.0
            r_dual = np.abs(p.Q @ z + p.c + A.T @ y).max()
            if residuals_csv is not None:
                rows.append((it, r_prim, r_dual))
            prim_scale = max(1.0, np.abs(az).max(), np.abs(s).max())
            dual_scale = max(1.0, np.abs(p.Q @ z).max(), np.abs(A.T @ y).max(), np.abs(p.c).max())
            if r_prim <= tol * prim_scale and r_dual <= tol * dual_scale:
                status = "optimal"
                break
        if it % 100 == 0:
            dy = y - y_window
            y_window = y.copy()
            dy_norm = np.abs(dy).max()
            if dy_norm > 1e-10:
                if np.abs(A.T @ dy).max() <= 1e-8 * dy_norm and b @ dy < -1e-10 * dy_norm:
                    status = "infeasible"
                    break
    if residuals_csv is not None:
        with open(residuals_csv, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "primal_residual", "dual_residual"])
            for row in rows:
                writer.writerow([row[0], repr(row[1]), repr(row[2])])
    if status == "optimal":
        z_pol = _polish(p, A, b, z, y, tol)
        if z_pol is not None:
            z = z_pol
    return z, status
