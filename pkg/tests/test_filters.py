"""Filter engines: FIR, time-varying FIR, and the parallel ARMA recursion."""

import json

import numpy as np
import pytest

from gfquant.filters import (
    ArmaCoefficients,
    FirCoefficients,
    arma_run,
    arma_steady_state,
    draw_res_sequence,
    fir_apply,
    fir_apply_quantized,
    fir_apply_tv,
    fir_apply_tv_quantized,
    fir_freq_response,
    run_metadata_json,
    trajectory_to_csv,
)
from gfquant.graphs import (
    Graph,
    build_shift,
    eigendecompose,
    gft,
    random_geometric,
    res_model,
)
from gfquant.quantization import DitheredQuantizer, StepsizeSchedule


def path3_adjacency():
    return build_shift(Graph(3, np.array([[0, 1], [1, 2]]), np.ones(2)), "adjacency")


def small_shift(seed=0, kind="normalized-laplacian", n=12):
    return build_shift(random_geometric(n, 100.0, 55.0, seed=seed), kind)


def test_fir_identity_filter():
    S = path3_adjacency()
    x = np.array([1.0, -2.0, 0.5])
    assert np.array_equal(fir_apply(S, FirCoefficients([1.0]), x), x)


def test_fir_single_shift_on_path():
    S = path3_adjacency()
    y = fir_apply(S, FirCoefficients([0.0, 1.0]), np.array([1.0, 0.0, 0.0]))
    assert np.allclose(y, [0.0, 1.0, 0.0])


def test_fir_matches_spectral_response():
    S = small_shift(1)
    dec = eigendecompose(S)
    c = FirCoefficients(np.random.default_rng(2).normal(size=5))
    x = np.random.default_rng(3).normal(size=S.matrix.shape[0])
    lhs = gft(dec, fir_apply(S, c, x))
    rhs = fir_freq_response(c, dec.eigvals) * gft(dec, x)
    assert np.max(np.abs(lhs - rhs)) <= 1e-9


def test_freq_response_constant_and_linear():
    assert np.allclose(fir_freq_response(FirCoefficients([1.0, 0.0, 0.0]), [0.3, 2.0]), 1.0)
    assert fir_freq_response(FirCoefficients([0.0, 1.0]), [2.0])[0] == pytest.approx(2.0)


def test_freq_response_matches_power_sum():
    rng = np.random.default_rng(4)
    phi = rng.normal(size=6)
    lam = rng.uniform(-2, 2, size=9)
    naive = sum(phi[k] * lam**k for k in range(6))
    assert np.max(np.abs(fir_freq_response(FirCoefficients(phi), lam) - naive)) <= 1e-12


def test_quantized_fir_transparent_at_tiny_stepsize():
    S = small_shift(5)
    x = np.random.default_rng(6).normal(size=S.matrix.shape[0])
    c = FirCoefficients([0.2, -0.4, 0.3, 0.1])
    q = DitheredQuantizer(StepsizeSchedule.fixed(1e-13), seed=7)
    run = fir_apply_quantized(S, c, x, q)
    assert np.max(np.abs(run.output - fir_apply(S, c, x))) <= 1e-11


def test_quantized_fir_order_zero_has_no_error():
    S = small_shift(8)
    x = np.random.default_rng(9).normal(size=S.matrix.shape[0])
    run = fir_apply_quantized(
        S, FirCoefficients([0.7]), x, DitheredQuantizer(StepsizeSchedule.fixed(0.5), seed=1)
    )
    assert np.array_equal(run.error, np.zeros_like(x))
    assert run.ledger.total_bits == 0


def test_quantized_fir_single_node_error_is_scaled_noise():
    lam = 1.7
    S = np.array([[lam]])
    q = DitheredQuantizer(StepsizeSchedule.fixed(0.5), range_policy=8.0, seed=11)
    c = FirCoefficients([0.3, 0.9])
    run = fir_apply_quantized(S, c, np.array([1.1]), q)
    _, _, noise0 = run.noises[0]
    assert run.error[0] == pytest.approx(0.9 * lam * noise0[0], abs=1e-14)


def test_quantized_fir_error_reconstructs_from_logged_noise():
    S = small_shift(10)
    m = S.matrix
    x = np.random.default_rng(12).normal(size=m.shape[0])
    c = FirCoefficients([0.5, -0.3, 0.2, 0.4, -0.1])
    q = DitheredQuantizer(StepsizeSchedule.geometric(0.4, 0.6), range_policy=64.0, seed=13)
    run = fir_apply_quantized(S, c, x, q)
    # replay each logged noise vector through the remaining shift rounds
    rebuilt = np.zeros_like(x)
    for kappa, _, noise in run.noises:
        z = noise
        for k in range(kappa + 1, c.order + 1):
            z = m @ z
            rebuilt = rebuilt + c.phi[k] * z
    assert np.max(np.abs(rebuilt - run.error)) <= 1e-12


def test_fir_linearity():
    S = small_shift(14)
    c = FirCoefficients([0.3, 0.2, -0.5])
    rng = np.random.default_rng(15)
    x, z = rng.normal(size=(2, S.matrix.shape[0]))
    lhs = fir_apply(S, c, 2.0 * x - 3.0 * z)
    rhs = 2.0 * fir_apply(S, c, x) - 3.0 * fir_apply(S, c, z)
    assert np.max(np.abs(lhs - rhs)) <= 1e-10


def test_fir_shift_composition():
    S = small_shift(16)
    x = np.random.default_rng(17).normal(size=S.matrix.shape[0])
    once = fir_apply(S, FirCoefficients([0.0, 0.0, 1.0]), x)
    twice = fir_apply(S, FirCoefficients([0.0, 1.0]),
                      fir_apply(S, FirCoefficients([0.0, 1.0]), x))
    assert np.max(np.abs(once - twice)) <= 1e-10


def test_tv_fir_static_reduction():
    S = small_shift(18)
    c = FirCoefficients([0.1, 0.4, -0.2])
    x = np.random.default_rng(19).normal(size=S.matrix.shape[0])
    assert np.allclose(fir_apply_tv([S, S], c, x), fir_apply(S, c, x))


def test_tv_fir_applies_shifts_oldest_term_deepest():
    A = path3_adjacency()
    B = build_shift(Graph(3, np.array([[0, 2]]), np.ones(1)), "adjacency")
    x = np.array([1.0, 2.0, 3.0])
    first = fir_apply_tv([A, B], FirCoefficients([0.0, 1.0, 0.0]), x)
    assert np.allclose(first, A.matrix @ x)
    second = fir_apply_tv([A, B], FirCoefficients([0.0, 0.0, 1.0]), x)
    assert np.allclose(second, B.matrix @ (A.matrix @ x))


def test_tv_fir_wrong_length_rejected():
    S = path3_adjacency()
    with pytest.raises(ValueError):
        fir_apply_tv([S], FirCoefficients([0.0, 1.0, 1.0]), np.ones(3))


def test_tv_quantized_certain_links_match_static():
    g = random_geometric(10, 100.0, 60.0, seed=20)
    S = build_shift(g, "scaled-laplacian")
    m = res_model(g, "scaled-laplacian", 1.0)
    c = FirCoefficients([0.2, 0.5, -0.3])
    x = np.random.default_rng(21).normal(size=10)
    q = DitheredQuantizer(StepsizeSchedule.fixed(0.25), range_policy=32.0, seed=22)
    shifts = draw_res_sequence(m, c.order, np.random.default_rng(23))
    run_tv = fir_apply_tv_quantized(shifts, c, x, q)
    run_static = fir_apply_quantized(S, c, x, q)
    assert np.allclose(run_tv.output, run_static.output, atol=1e-12)


def test_arma_memoryless_branches():
    S = small_shift(24)
    c = ArmaCoefficients([0.0, 0.0], [0.4, 0.6])
    x = np.random.default_rng(25).normal(size=S.matrix.shape[0])
    run = arma_run(S, c, x, T=5)
    for t in range(5):
        assert np.allclose(run.outputs[t], x)


def test_arma_single_node_rational_response():
    lam, psi, varphi = 1.5, 0.4, 0.8
    S = np.array([[lam]])
    c = ArmaCoefficients([psi], [varphi])
    run = arma_run(S, c, np.array([1.0]), T=200)
    assert run.output[0] == pytest.approx(varphi / (1 - psi * lam), abs=1e-12)


def test_arma_trajectory_converges_geometrically():
    S = small_shift(26)
    c = ArmaCoefficients([0.25], [1.0])
    x = np.random.default_rng(27).normal(size=S.matrix.shape[0])
    star = arma_steady_state(S, c, x)
    run = arma_run(S, c, x, T=40)
    a = c.psi_max * S.rho
    gap0 = np.linalg.norm(run.outputs[0] - star)
    for t in (5, 15, 30):
        assert np.linalg.norm(run.outputs[t] - star) <= 2.0 * gap0 * a**t + 1e-12


def test_arma_instability_rejected():
    c = ArmaCoefficients([0.6], [1.0])
    with pytest.raises(ValueError):
        arma_run(np.array([[2.0]]), c, np.ones(1), T=3)


def test_arma_steady_state_memoryless():
    S = small_shift(29)
    c = ArmaCoefficients([0.0], [0.7])
    x = np.random.default_rng(30).normal(size=S.matrix.shape[0])
    assert np.allclose(arma_steady_state(S, c, x), 0.7 * x)


def test_arma_steady_state_is_tikhonov_solve():
    S = small_shift(31)
    w = 0.3
    c = ArmaCoefficients([-w], [1.0])
    x = np.random.default_rng(32).normal(size=S.matrix.shape[0])
    direct = np.linalg.solve(np.eye(S.matrix.shape[0]) + w * S.matrix, x)
    assert np.max(np.abs(arma_steady_state(S, c, x) - direct)) <= 1e-10


def test_arma_long_run_matches_steady_state():
    S = small_shift(33)
    c = ArmaCoefficients([0.3], [1.0])  # psi_max * rho <= 0.6
    x = np.random.default_rng(34).normal(size=S.matrix.shape[0])
    run = arma_run(S, c, x, T=500)
    assert np.linalg.norm(run.output - arma_steady_state(S, c, x)) <= 1e-9


def test_arma_res_requires_rng():
    g = random_geometric(8, 100.0, 60.0, seed=35)
    m = res_model(g, "scaled-laplacian", 0.9)
    c = ArmaCoefficients([0.4], [1.0])
    with pytest.raises(ValueError):
        arma_run(m, c, np.ones(8), T=3)


def test_arma_unquantized_run_ignores_quantizer_seed():
    S = small_shift(36)
    c = ArmaCoefficients([0.2], [1.0])
    x = np.random.default_rng(37).normal(size=S.matrix.shape[0])
    a = arma_run(S, c, x, T=20)
    b = arma_run(S, c, x, T=20)
    assert np.array_equal(a.outputs, b.outputs)
    assert a.seed == 0


def test_arma_quantized_error_trajectory_shape():
    S = small_shift(38, kind="scaled-laplacian")
    c = ArmaCoefficients([0.5, -0.3], [0.6, 0.4])
    x = np.random.default_rng(39).normal(size=S.matrix.shape[0])
    q = DitheredQuantizer(StepsizeSchedule.fixed(0.25), seed=40)
    run = arma_run(S, c, x, T=15, q=q)
    assert run.error_trajectory.shape == (15, S.matrix.shape[0])
    # two branches transmit every iteration
    assert len(run.noises) == 30


def test_trajectory_and_metadata_export(tmp_path):
    S = small_shift(41)
    c = ArmaCoefficients([0.2], [1.0])
    x = np.random.default_rng(42).normal(size=S.matrix.shape[0])
    q = DitheredQuantizer(StepsizeSchedule.fixed(0.5), seed=43)
    run = arma_run(S, c, x, T=4, q=q)
    csv_path = tmp_path / "traj.csv"
    trajectory_to_csv(run, csv_path)
    header = csv_path.read_text().splitlines()[0]
    assert header == "t,node,value,error"
    meta_path = tmp_path / "meta.json"
    run_metadata_json(run, c, q, meta_path)
    meta = json.loads(meta_path.read_text())
    assert meta["seed"] == 43
