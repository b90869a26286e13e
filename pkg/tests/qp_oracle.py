"""Brute-force reference solver for small convex QPs.

Enumerates every candidate active set of the stacked inequality rows, solves
the corresponding equality-constrained KKT system, and keeps the best point
that is primal feasible with nonnegative multipliers. Exponential in the
number of constraints, so only usable for the handful-of-variables problems
in the tests, where it serves as an independent check on the iterative
solver.
"""

import itertools

import numpy as np

from gfquant.optim import QuadraticProgram


def random_qp(rng):
    """A feasible 5-variable QP with ridge-regularized random data."""
    n = 5
    B = rng.normal(size=(n, n))
    Q = B @ B.T + 0.5 * np.eye(n)
    c = rng.normal(size=n)
    G = rng.normal(size=(3, n))
    z0 = rng.uniform(-1.0, 1.0, size=n)
    h = G @ z0 + rng.uniform(0.05, 1.0, size=3)
    return QuadraticProgram(Q, c, G=G, h=h, lb=np.full(n, -2.0), ub=np.full(n, 2.0))


def solve_qp_bruteforce(p, feas_tol=1e-9, dual_tol=1e-9):
    """Return the exact minimizer of the QuadraticProgram p, or None.

    Requires Q to be positive definite on the feasible directions (the tests
    add a ridge). None means no candidate active set produced a feasible
    KKT point, i.e. the problem is infeasible.
    """
    A, b = p.stacked_inequalities()
    m, n = A.shape
    scale = np.maximum(1.0, np.abs(b)) if m else np.zeros(0)
    best = None
    best_obj = np.inf
    for size in range(min(m, n) + 1):
        for subset in itertools.combinations(range(m), size):
            idx = list(subset)
            A_act = A[idx]
            kkt = np.zeros((n + size, n + size))
            kkt[:n, :n] = p.Q
            if size:
                kkt[:n, n:] = A_act.T
                kkt[n:, :n] = A_act
            rhs = np.concatenate([-p.c, b[idx]])
            try:
                sol = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                continue
            z = sol[:n]
            mu = sol[n:]
            if size and np.any(mu < -dual_tol):
                continue
            if m and np.any(A @ z - b > feas_tol * scale):
                continue
            obj = p.objective(z)
            if obj < best_obj - 1e-15:
                best_obj = obj
                best = z
    return best
