"""Filter-coefficient synthesis.

Least-squares fitting of FIR taps to a target spectral response, the
quantization-aware convex design (LS objective plus linear caps on the
accumulated quantization MSE and on the coefficient tail sum), the
link-loss-robust design penalizing quantization noise amplification over the
expected graph, and the closed-form one-pole constructions for Tikhonov
denoising and smooth interpolation of partially observed signals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from gfquant.filters import ArmaCoefficients, FirCoefficients
from gfquant.graphs import ResModel, ShiftOperator, expected_shift, interpolation_shift
from gfquant.optim import QuadraticProgram, solve_qp
from gfquant.quantization import StepsizeSchedule, stepsize_at

_CONSTRAINT_TOL = 1e-8


@dataclass(frozen=True)
class DesignConstraints:
    """Knobs of the convex designs.

    epsilon caps the accumulated quantization MSE expression; gamma caps the
    coefficient tail sum 1^T phi_1 (or weights the quantization penalty in
    the robust design); delta caps the per-round stepsize (validated against
    the schedule); chi is the per-iteration bit cap; lambda_grid samples
    [lambda_min, lambda_max] for the response fit.
    """

    lambda_grid: np.ndarray
    schedule: StepsizeSchedule
    epsilon: float = math.inf
    gamma: float = math.inf
    delta: float = math.inf
    chi: int | None = None

    def __post_init__(self):
        grid = np.asarray(self.lambda_grid, dtype=float).reshape(-1)
        if grid.size < 2 or np.any(np.diff(grid) < 0):
            raise ValueError("lambda_grid must be sorted with >= 2 points")
        grid.setflags(write=False)
        object.__setattr__(self, "lambda_grid", grid)
        for name in ("epsilon", "delta"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive or +inf")
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")


@dataclass(frozen=True)
class DesignResult:
    """Designed coefficients with solver provenance."""

    coefficients: object
    objective: float
    active_constraints: tuple
    solver_status: str
    constraint_values: dict


def uniform_grid(lambda_min: float, lambda_max: float, points: int = 200) -> np.ndarray:
    """Uniform response-fit grid over [lambda_min, lambda_max]."""
    return np.linspace(lambda_min, lambda_max, points)


def _target_on_grid(h_star, grid: np.ndarray) -> np.ndarray:
    if callable(h_star):
        return np.array([float(h_star(lam)) for lam in grid])
    h = np.asarray(h_star, dtype=float).reshape(-1)
    if h.size != grid.size:
        raise ValueError("target array length must match grid")
    return h


def _vandermonde(grid: np.ndarray, K: int) -> np.ndarray:
    return np.vander(grid, K + 1, increasing=True)


def fir_ls_design(h_star, K: int, grid) -> FirCoefficients:
    """Least-squares FIR taps for a target response on a frequency grid.

    Solves the Vandermonde normal equations (V^T V + 1e-12 I) phi = V^T h.
    """
    grid = np.asarray(grid, dtype=float).reshape(-1)
    if grid.size < K + 1:
        raise ValueError(f"grid needs >= K+1 = {K + 1} points")
    h = _target_on_grid(h_star, grid)
    v = _vandermonde(grid, K)
    g = v.T @ v + 1e-12 * np.eye(K + 1)
    phi = np.linalg.solve(g, v.T @ h)
    return FirCoefficients(phi)


def ls_objective(c: FirCoefficients, h_star, grid) -> float:
    """Riemann-sum squared response error of taps on a grid."""
    grid = np.asarray(grid, dtype=float).reshape(-1)
    h = _target_on_grid(h_star, grid)
    v = _vandermonde(grid, c.order)
    dlam = (grid[-1] - grid[0]) / max(grid.size - 1, 1)
    return float(np.sum((v @ c.phi - h) ** 2)) * dlam


def mse_constraint_row(K: int, schedule: StepsizeSchedule, lambda_max: float) -> np.ndarray:
    """Per-tap coefficients of the linear accumulated-quantization-MSE cap.

    Entry k (k >= 1) is (1/12) sum_{kappa=0}^{k-1} Delta_kappa^2
    (lambda_max^2)^(k-kappa); a filter phi satisfies the cap when
    row . phi <= epsilon.
    """
    row = np.zeros(K + 1)
    lam2 = lambda_max**2
    for k in range(1, K + 1):
        acc = 0.0
        for kappa in range(k):
            acc += stepsize_at(schedule, kappa) ** 2 * lam2 ** (k - kappa)
        row[k] = acc / 12.0
    return row


def fir_quantization_aware_design(h_star, K: int, dc: DesignConstraints) -> DesignResult:
    """Convex FIR design: LS response fit with quantization-noise caps.

    minimize the discretized squared response error subject to the linear
    accumulated-MSE cap (<= epsilon) and the coefficient tail sum cap
    1^T phi_1 <= gamma. The stepsize cap delta binds the schedule, not phi,
    and is validated as a precondition.
    """
    grid = dc.lambda_grid
    if grid.size < K + 1:
        raise ValueError(f"lambda_grid needs >= K+1 = {K + 1} points")
    if math.isfinite(dc.delta):
        for k in range(K):
            if stepsize_at(dc.schedule, k) > dc.delta * (1 + 1e-12):
                raise ValueError(
                    f"schedule stepsize at round {k} exceeds delta={dc.delta}"
                )
    h = _target_on_grid(h_star, grid)
    v = _vandermonde(grid, K)
    dlam = (grid[-1] - grid[0]) / max(grid.size - 1, 1)
    q_mat = 2.0 * (v.T @ v * dlam + 1e-12 * np.eye(K + 1))
    c_vec = -2.0 * (v.T @ h) * dlam

    rows, rhs, labels = [], [], []
    mse_row = mse_constraint_row(K, dc.schedule, float(grid[-1]))
    if math.isfinite(dc.epsilon):
        rows.append(mse_row)
        rhs.append(dc.epsilon)
        labels.append("mse")
    if math.isfinite(dc.gamma):
        tail = np.ones(K + 1)
        tail[0] = 0.0
        rows.append(tail)
        rhs.append(dc.gamma)
        labels.append("coeff-sum")
    problem = QuadraticProgram(
        q_mat,
        c_vec,
        G=np.array(rows) if rows else None,
        h=np.array(rhs) if rows else None,
    )
    z, status = solve_qp(problem, tol=1e-9)
    if status == "infeasible":
        raise ValueError(
            f"design infeasible for epsilon={dc.epsilon}, gamma={dc.gamma}"
        )
    coeffs = FirCoefficients(z)
    active = []
    values = {}
    for label, row, bound in zip(labels, rows, rhs):
        value = float(row @ z)
        values[label] = value
        if value > bound + _CONSTRAINT_TOL * max(1.0, abs(bound)):
            raise ValueError(f"{label} constraint violated after solve: {value} > {bound}")
        if value >= bound - 1e-6 * max(1.0, abs(bound)):
            active.append(label)
    return DesignResult(
        coefficients=coeffs,
        objective=ls_objective(coeffs, h_star, grid),
        active_constraints=tuple(active),
        solver_status=status,
        constraint_values=values,
    )


def _matrix_powers(m: np.ndarray, K: int) -> list:
    powers = [np.eye(m.shape[0])]
    for _ in range(K):
        powers.append(powers[-1] @ m)
    return powers


def robust_penalty(c: FirCoefficients, rho: float, schedule: StepsizeSchedule) -> float:
    """Quantization-noise amplification term of the robust design objective.

    (1/12) sum_{kappa=1}^K Delta_{kappa-1}^2 (sum_{k=kappa}^K rho^(k-kappa+1)
    |phi_k|)^2 -- the same expression bounding the RES quantized-FIR MSE.
    """
    total = 0.0
    for kappa in range(1, c.order + 1):
        inner = sum(
            rho ** (k - kappa + 1) * abs(c.phi[k]) for k in range(kappa, c.order + 1)
        )
        total += stepsize_at(schedule, kappa - 1) ** 2 * inner**2
    return total / 12.0


def fir_robust_res_design(
    phi_ref: FirCoefficients, S: ShiftOperator, m: ResModel, dc: DesignConstraints
) -> DesignResult:
    """Link-loss-robust FIR taps around a deterministic-graph reference design.

    minimize ||sum_k (phi_k S_bar^k - phi_ref_k S^k)||_F^2 + (gamma/12)
    sum_kappa Delta_{kappa-1}^2 (sum_k rho^(k-kappa+1) |phi_k|)^2 over phi,
    with S_bar the expected shift of the RES model. |phi_k| is handled by
    sign-splitting phi_k = u+_k - u-_k (k >= 1, both nonnegative); gamma = 0
    reduces to the plain least-squares matching problem.
    """
    K = phi_ref.order
    s_bar = expected_shift(m)
    powers_bar = _matrix_powers(s_bar.matrix, K)
    powers_ref = _matrix_powers(S.matrix, K)
    target = sum(phi_ref.phi[k] * powers_ref[k] for k in range(K + 1))
    basis = np.column_stack([p.reshape(-1) for p in powers_bar])
    d = target.reshape(-1)
    gamma = dc.gamma if math.isfinite(dc.gamma) else None
    if gamma is None:
        raise ValueError("robust design needs a finite gamma penalty weight")

    if gamma == 0.0:
        phi, *_ = np.linalg.lstsq(basis, d, rcond=None)
        coeffs = FirCoefficients(phi)
        resid = basis @ phi - d
        return DesignResult(
            coefficients=coeffs,
            objective=float(resid @ resid),
            active_constraints=(),
            solver_status="optimal",
            constraint_values={"penalty": robust_penalty(coeffs, S.rho, dc.schedule)},
        )

    # variables z = (phi_0, u+_1..K, u-_1..K); phi_k = u+_k - u-_k
    nvar = 2 * K + 1
    b_map = np.zeros((basis.shape[0], nvar))
    b_map[:, 0] = basis[:, 0]
    b_map[:, 1 : K + 1] = basis[:, 1:]
    b_map[:, K + 1 :] = -basis[:, 1:]
    q_mat = 2.0 * (b_map.T @ b_map)
    c_vec = -2.0 * (b_map.T @ d)
    rho = S.rho
    for kappa in range(1, K + 1):
        r = np.zeros(nvar)
        for k in range(kappa, K + 1):
            coef = rho ** (k - kappa + 1)
            r[k] = coef
            r[K + k] = coef
        weight = gamma / 12.0 * stepsize_at(dc.schedule, kappa - 1) ** 2
        q_mat += 2.0 * weight * np.outer(r, r)
    lb = np.zeros(nvar)
    lb[0] = -math.inf
    problem = QuadraticProgram(q_mat, c_vec, lb=lb)
    z, status = solve_qp(problem, tol=1e-9)
    if status != "optimal":
        raise RuntimeError(f"robust design solve failed with status {status}")
    phi = np.empty(K + 1)
    phi[0] = z[0]
    phi[1:] = z[1 : K + 1] - z[K + 1 :]
    coeffs = FirCoefficients(phi)
    resid = basis @ phi - d
    penalty = robust_penalty(coeffs, rho, dc.schedule)
    return DesignResult(
        coefficients=coeffs,
        objective=float(resid @ resid) + gamma * penalty,
        active_constraints=(),
        solver_status=status,
        constraint_values={"penalty": penalty},
    )


def tikhonov_arma1(w: float, S: ShiftOperator) -> ArmaCoefficients:
    """One-pole filter realizing the smoothness-regularized denoiser.

    The regularized least-squares solution (I + wS)^(-1) x is the steady
    state of the recursion with pole psi = -w and residue varphi = 1.
    """
    if w < 0:
        raise ValueError("w must be nonnegative")
    c = ArmaCoefficients([-w], [1.0])
    c.check_stable(S.rho)
    return c


def interpolation_arma1(mask, w: float, S: ShiftOperator):
    """One-pole filter reconstructing a signal observed on a node subset.

    For sampling mask T (0/1 diagonal) the reconstruction (T + wS)^(-1) x'
    is the steady state of the recursion on S~ = T + wS - I with pole
    psi = -1, residue varphi = 1: y* = (I + S~)^(-1) x' = (T + wS)^(-1) x'.
    Returns (S~, coefficients); stable iff ||T + wS - I||_2 < 1.
    """
    s_tilde = interpolation_shift(mask, w, S)
    c = ArmaCoefficients([-1.0], [1.0])
    c.check_stable(s_tilde.rho)
    return s_tilde, c
