"""Quadratic-program solver checked against a brute-force active-set oracle."""

import numpy as np
import pytest

from gfquant.optim import QuadraticProgram, solve_qp
from qp_oracle import random_qp as random_program
from qp_oracle import solve_qp_bruteforce


def test_unconstrained_scalar_minimum():
    z, status = solve_qp(QuadraticProgram(np.array([[2.0]]), np.array([-2.0])))
    assert status == "optimal"
    assert z[0] == pytest.approx(1.0, abs=1e-8)


def test_active_lower_bound():
    p = QuadraticProgram(np.array([[2.0]]), np.array([0.0]), lb=np.array([2.0]))
    z, status = solve_qp(p)
    assert status == "optimal"
    assert z[0] == pytest.approx(2.0, abs=1e-8)


def test_inequality_row_binds():
    # minimize z1^2 + z2^2 subject to z1 + z2 >= 2 -> (1, 1)
    p = QuadraticProgram(
        2.0 * np.eye(2), np.zeros(2), G=np.array([[-1.0, -1.0]]), h=np.array([-2.0])
    )
    z, status = solve_qp(p)
    assert status == "optimal"
    assert np.allclose(z, [1.0, 1.0], atol=1e-7)


def test_matches_bruteforce_on_random_batch():
    rng = np.random.default_rng(0)
    for trial in range(20):
        p = random_program(rng)
        z, status = solve_qp(p)
        assert status == "optimal", f"trial {trial} ended {status}"
        z_ref = solve_qp_bruteforce(p)
        assert z_ref is not None, f"oracle found trial {trial} infeasible"
        assert np.max(np.abs(z - z_ref)) <= 1e-5, (
            f"trial {trial}: solver {z} vs oracle {z_ref}"
        )
        assert p.objective(z) <= p.objective(z_ref) + 1e-7


def test_solver_is_deterministic():
    rng = np.random.default_rng(3)
    p = random_program(rng)
    z1, _ = solve_qp(p)
    z2, _ = solve_qp(p)
    assert np.array_equal(z1, z2)


def test_infeasible_box_detected():
    p = QuadraticProgram(
        np.array([[2.0]]),
        np.array([0.0]),
        G=np.array([[1.0], [-1.0]]),
        h=np.array([1.0, -2.0]),  # z <= 1 and z >= 2
    )
    _, status = solve_qp(p)
    assert status == "infeasible"


def test_slightly_indefinite_matrix_is_clipped():
    p = QuadraticProgram(
        np.array([[-1e-12]]), np.array([1.0]), lb=np.array([-1.0]), ub=np.array([1.0])
    )
    assert p.Q[0, 0] == 0.0
    z, status = solve_qp(p)
    assert status == "optimal"
    assert z[0] == pytest.approx(-1.0, abs=1e-7)


def test_clearly_indefinite_matrix_rejected():
    with pytest.raises(ValueError):
        QuadraticProgram(np.array([[-1.0]]), np.array([0.0]))


def test_mismatched_constraint_rows_rejected():
    with pytest.raises(ValueError):
        QuadraticProgram(np.eye(2), np.zeros(2), G=np.ones((1, 2)))
    with pytest.raises(ValueError):
        QuadraticProgram(np.eye(2), np.zeros(2), G=np.ones((2, 2)), h=np.ones(3))


def test_residual_log_written(tmp_path):
    rng = np.random.default_rng(5)
    p = random_program(rng)
    path = tmp_path / "residuals.csv"
    solve_qp(p, residuals_csv=path)
    lines = path.read_text().splitlines()
    assert lines[0] == "iteration,primal_residual,dual_residual"
    assert len(lines) >= 2
