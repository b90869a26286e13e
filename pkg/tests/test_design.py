"""Filter synthesis: LS fit, quantization-aware QP, robust design, one-pole closed forms."""

import math

import numpy as np
import pytest

from gfquant.analysis import fir_res_mse_bound
from gfquant.design import (
    DesignConstraints,
    fir_ls_design,
    fir_quantization_aware_design,
    fir_robust_res_design,
    interpolation_arma1,
    ls_objective,
    mse_constraint_row,
    robust_penalty,
    tikhonov_arma1,
    uniform_grid,
)
from gfquant.filters import FirCoefficients, arma_steady_state
from gfquant.graphs import build_shift, random_geometric, res_model
from gfquant.quantization import StepsizeSchedule


GRID = uniform_grid(0.0, 2.0, 40)


def constraints(**kwargs):
    kwargs.setdefault("lambda_grid", GRID)
    kwargs.setdefault("schedule", StepsizeSchedule.fixed(0.5))
    return DesignConstraints(**kwargs)


def test_ls_recovers_exact_polynomial():
    c = fir_ls_design(lambda lam: lam**2, 2, GRID)
    assert np.allclose(c.phi, [0.0, 0.0, 1.0], atol=1e-10)


def test_ls_constant_target_uses_only_identity_tap():
    c = fir_ls_design(lambda lam: 1.0, 3, GRID)
    assert np.allclose(c.phi, [1.0, 0.0, 0.0, 0.0], atol=1e-9)


def test_ls_accepts_sampled_target_array():
    target = GRID**3
    c = fir_ls_design(target, 3, GRID)
    assert np.allclose(c.phi, [0.0, 0.0, 0.0, 1.0], atol=1e-8)


def test_ls_residual_shrinks_with_order():
    h = lambda lam: 1.0 / (1.0 + 5.0 * lam)
    objs = [ls_objective(fir_ls_design(h, K, GRID), h, GRID) for K in (2, 4, 8)]
    assert objs[1] <= objs[0] + 1e-12
    assert objs[2] <= objs[1] + 1e-12
    assert objs[2] < 0.5 * objs[0]


def test_ls_needs_enough_grid_points():
    with pytest.raises(ValueError):
        fir_ls_design(lambda lam: lam, 5, np.array([0.0, 1.0, 2.0]))


def test_unconstrained_qp_design_matches_ls():
    h = lambda lam: np.exp(-lam)
    res = fir_quantization_aware_design(h, 4, constraints())
    ls = fir_ls_design(h, 4, GRID)
    assert res.solver_status == "optimal"
    assert res.active_constraints == ()
    assert np.max(np.abs(res.coefficients.phi - ls.phi)) <= 1e-6


def test_zero_tail_cap_forces_zero_coefficient_sum():
    res = fir_quantization_aware_design(lambda lam: lam, 3, constraints(gamma=0.0))
    assert float(np.sum(res.coefficients.phi[1:])) <= 1e-8


def test_mse_cap_binds_and_is_respected():
    h = lambda lam: lam
    dc_free = constraints()
    free = fir_quantization_aware_design(h, 2, dc_free)
    row = mse_constraint_row(2, dc_free.schedule, float(GRID[-1]))
    unconstrained_mse = float(row @ free.coefficients.phi)
    dc = constraints(epsilon=0.5 * unconstrained_mse)
    res = fir_quantization_aware_design(h, 2, dc)
    assert "mse" in res.active_constraints
    value = res.constraint_values["mse"]
    assert value <= dc.epsilon + 1e-8
    assert value == pytest.approx(float(row @ res.coefficients.phi), abs=1e-12)
    assert res.objective >= free.objective - 1e-12


def test_stepsize_cap_is_a_precondition():
    dc = constraints(schedule=StepsizeSchedule.fixed(0.5), delta=0.3)
    with pytest.raises(ValueError):
        fir_quantization_aware_design(lambda lam: lam, 2, dc)


def test_mse_row_hand_value():
    sched = StepsizeSchedule.geometric(0.6, 0.5)
    lam = 1.5
    row = mse_constraint_row(2, sched, lam)
    assert row[0] == 0.0
    assert row[1] == pytest.approx(0.6**2 * lam**2 / 12.0, rel=1e-12)
    want2 = (0.6**2 * lam**4 + 0.3**2 * lam**2) / 12.0
    assert row[2] == pytest.approx(want2, rel=1e-12)


def test_robust_penalty_equals_res_bound():
    sched = StepsizeSchedule.geometric(0.4, 0.7)
    c = FirCoefficients([0.3, -0.8, 0.5, 0.2])
    assert robust_penalty(c, 1.3, sched) == pytest.approx(
        fir_res_mse_bound(1.3, c, sched), rel=1e-14
    )


def test_robust_design_with_certain_links_recovers_reference():
    g = random_geometric(15, 100.0, 55.0, seed=0)
    S = build_shift(g, "scaled-laplacian")
    m = res_model(g, "scaled-laplacian", 1.0)
    phi_ref = FirCoefficients([0.5, -0.4, 0.3, 0.1])
    res = fir_robust_res_design(phi_ref, S, m, constraints(gamma=0.0))
    assert np.max(np.abs(res.coefficients.phi - phi_ref.phi)) <= 1e-6
    assert res.objective <= 1e-10


def test_robust_design_large_weight_kills_tail():
    g = random_geometric(12, 100.0, 60.0, seed=1)
    S = build_shift(g, "scaled-laplacian")
    m = res_model(g, "scaled-laplacian", 0.8)
    phi_ref = FirCoefficients([0.2, 0.7, -0.3])
    res = fir_robust_res_design(phi_ref, S, m, constraints(gamma=1e5))
    assert np.max(np.abs(res.coefficients.phi[1:])) <= 1e-3


def test_robust_penalty_shrinks_with_weight():
    g = random_geometric(12, 100.0, 60.0, seed=2)
    S = build_shift(g, "scaled-laplacian")
    m = res_model(g, "scaled-laplacian", 0.9)
    phi_ref = FirCoefficients([0.1, 0.6, 0.3])
    penalties = [
        fir_robust_res_design(phi_ref, S, m, constraints(gamma=g_)).constraint_values[
            "penalty"
        ]
        for g_ in (0.0, 1.0, 100.0)
    ]
    assert penalties[1] <= penalties[0] + 1e-12
    assert penalties[2] <= penalties[1] + 1e-12


def test_tikhonov_identity_at_zero_weight():
    S = build_shift(random_geometric(10, 100.0, 60.0, seed=3), "normalized-laplacian")
    c = tikhonov_arma1(0.0, S)
    x = np.random.default_rng(4).normal(size=10)
    assert np.allclose(arma_steady_state(S, c, x), x)


def test_tikhonov_matches_direct_regularized_solve():
    S = build_shift(random_geometric(10, 100.0, 60.0, seed=5), "normalized-laplacian")
    w = 0.3
    c = tikhonov_arma1(w, S)
    x = np.random.default_rng(6).normal(size=10)
    direct = np.linalg.solve(np.eye(10) + w * S.matrix, x)
    assert np.max(np.abs(arma_steady_state(S, c, x) - direct)) <= 1e-10


def test_tikhonov_scaled_laplacian_stable():
    S = build_shift(random_geometric(10, 100.0, 60.0, seed=7), "scaled-laplacian")
    c = tikhonov_arma1(0.25, S)
    assert c.psi[0] == -0.25


def test_tikhonov_rejects_unstable_weight():
    S = build_shift(random_geometric(10, 100.0, 60.0, seed=8), "normalized-laplacian")
    with pytest.raises(ValueError):
        tikhonov_arma1(1.0, S)
    with pytest.raises(ValueError):
        tikhonov_arma1(-0.1, S)


def test_interpolation_full_observation_zero_weight_is_identity():
    S = build_shift(random_geometric(8, 100.0, 60.0, seed=9), "scaled-laplacian")
    s_tilde, c = interpolation_arma1(np.ones(8), 0.0, S)
    assert np.allclose(s_tilde.matrix, 0.0)
    x = np.random.default_rng(10).normal(size=8)
    assert np.allclose(arma_steady_state(s_tilde, c, x), x)


def test_interpolation_full_observation_reduces_to_tikhonov():
    S = build_shift(random_geometric(10, 100.0, 60.0, seed=11), "scaled-laplacian")
    w = 0.3
    s_tilde, c = interpolation_arma1(np.ones(10), w, S)
    x = np.random.default_rng(12).normal(size=10)
    lhs = arma_steady_state(s_tilde, c, x)
    rhs = arma_steady_state(S, tikhonov_arma1(w, S), x)
    assert np.max(np.abs(lhs - rhs)) <= 1e-10


def test_interpolation_partial_mask_matches_dense_solve():
    n = 20
    S = build_shift(random_geometric(n, 100.0, 45.0, seed=13), "scaled-laplacian")
    rng = np.random.default_rng(14)
    mask = np.zeros(n)
    mask[rng.choice(n, size=6, replace=False)] = 1.0
    w = 0.3
    s_tilde, c = interpolation_arma1(mask, w, S)
    x = rng.normal(size=n)
    xp = mask * x
    y = arma_steady_state(s_tilde, c, xp)
    direct = np.linalg.solve(np.diag(mask) + w * S.matrix, xp)
    assert np.max(np.abs(y - direct)) <= 1e-9
    # observed nodes are reproduced up to the smoothing leakage, which must
    # shrink as w does
    tighter, _ = interpolation_arma1(mask, 0.05, S)
    y_tight = arma_steady_state(tighter, c, xp)
    obs = mask.astype(bool)
    assert np.max(np.abs(y_tight[obs] - x[obs])) < np.max(np.abs(y[obs] - x[obs])) + 1e-12


def test_design_constraint_validation():
    with pytest.raises(ValueError):
        constraints(lambda_grid=np.array([1.0]))
    with pytest.raises(ValueError):
        constraints(lambda_grid=np.array([2.0, 1.0, 3.0]))
    with pytest.raises(ValueError):
        constraints(epsilon=0.0)
    with pytest.raises(ValueError):
        constraints(gamma=-1.0)
    with pytest.raises(ValueError):
        constraints(delta=-0.5)
    with pytest.raises(ValueError):
        fir_quantization_aware_design(lambda lam: lam, 50, constraints())
    with pytest.raises(ValueError):
        fir_robust_res_design(
            FirCoefficients([1.0, 0.5]),
            build_shift(random_geometric(8, 100.0, 60.0, seed=15), "scaled-laplacian"),
            res_model(random_geometric(8, 100.0, 60.0, seed=15), "scaled-laplacian", 0.9),
            constraints(gamma=math.inf),
        )
