"""Dithered quantizer statistics, stepsize schedules, and bit accounting."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gfquant.quantization import (
    DitheredQuantizer,
    QuantizationLedger,
    StepsizeSchedule,
    bits_at,
    budgeted_initial_stepsize,
    effective_stepsize,
    quantize,
    stepsize_at,
)


def make_q(schedule, r=100.0, seed=0, dither=True):
    return DitheredQuantizer(schedule, range_policy=r, seed=seed, dither=dither)


def test_round_to_nearest_without_dither():
    q = make_q(StepsizeSchedule.fixed(1.0), dither=False)
    recv, noise = quantize(0.4, 0, q)
    assert recv == 0.0
    assert noise == pytest.approx(-0.4)


def test_half_step_rounds_away_from_zero():
    q = make_q(StepsizeSchedule.fixed(1.0), dither=False)
    assert quantize(0.5, 0, q)[0] == 1.0
    assert quantize(-0.5, 0, q)[0] == -1.0


def test_vanishing_stepsize_is_transparent():
    q = make_q(StepsizeSchedule.fixed(1e-12), r=8.0)
    x = np.array([0.3, -1.7, 2.2])
    recv, _ = quantize(x, 0, q)
    assert np.max(np.abs(recv - x)) <= 1e-11


def test_dither_noise_statistics():
    # one long vector = many scalar draws over one link/iteration key
    delta = 0.5
    rng = np.random.default_rng(100)
    x = rng.uniform(-10, 10, size=100_000)
    q = make_q(StepsizeSchedule.fixed(delta), r=64.0, seed=1)
    _, noise = quantize(x, 0, q)
    assert abs(noise.mean()) <= 0.002
    assert abs(noise.var() - delta**2 / 12.0) <= 0.02 * delta**2 / 12.0
    assert abs(np.corrcoef(noise, x)[0, 1]) < 0.02


def test_noise_uncorrelated_across_iterations():
    delta = 0.5
    rng = np.random.default_rng(101)
    x = rng.uniform(-10, 10, size=50_000)
    q = make_q(StepsizeSchedule.fixed(delta), r=64.0, seed=2)
    _, n0 = quantize(x, 0, q)
    _, n1 = quantize(x, 1, q)
    assert abs(np.corrcoef(n0, n1)[0, 1]) < 0.02


def test_dither_stream_reproducible_from_key():
    q = make_q(StepsizeSchedule.fixed(0.25), seed=42)
    a = q.dither_values(3, 1, 64, 0.25)
    b = q.dither_values(3, 1, 64, 0.25)
    assert np.array_equal(a, b)
    c = q.dither_values(3, 2, 64, 0.25)
    assert not np.array_equal(a, c)


def test_quantize_idempotent_on_lattice_points():
    q = make_q(StepsizeSchedule.fixed(0.25), r=16.0, dither=False)
    x = np.array([0.5, -1.25, 3.0])
    once, _ = quantize(x, 0, q)
    twice, noise = quantize(once, 0, q)
    assert np.array_equal(once, twice)
    assert np.allclose(noise, 0.0)


def test_geometric_stepsize_value():
    s = StepsizeSchedule.geometric(1.0, 0.5)
    assert stepsize_at(s, 2) == pytest.approx(0.25)


def test_fixed_bits_from_range():
    s = StepsizeSchedule.fixed(0.1)
    assert bits_at(s, 0, 1.6) == 4


def test_geometric_bits_monotone_until_cap():
    s = StepsizeSchedule.geometric(1.0, 0.5, max_bits=15)
    bits = [bits_at(s, t, 2.0) for t in range(30)]
    assert all(b2 >= b1 for b1, b2 in zip(bits, bits[1:]))
    assert max(bits) == 15
    assert bits[-1] == 15


def test_bit_cap_raises_stepsize():
    s = StepsizeSchedule.geometric(1.0, 0.5, max_bits=4)
    delta, bits, capped = effective_stepsize(s, 20, 2.0)
    assert capped
    assert bits == 4
    assert delta == pytest.approx(2.0 / 16.0)


def test_budgeted_stepsize_base_case():
    # B = 2 bits per iteration, one iteration: Delta_0 = ||x|| / 2
    d0 = budgeted_initial_stepsize(2.0, 0, 3.0, 0.5)
    assert d0 == pytest.approx(1.5)


def test_budgeted_stepsize_spends_the_budget():
    x_norm, rate, t_max, B = 2.0, 0.7, 9, 60.0
    d0 = budgeted_initial_stepsize(B, t_max, x_norm, rate)
    spent = sum(
        np.log2(2.0 * x_norm / (rate**t * d0)) for t in range(t_max + 1)
    )
    assert spent == pytest.approx(B, abs=1e-9)


def test_budgeted_stepsize_budget_scaling():
    d1 = budgeted_initial_stepsize(30.0, 4, 1.0, 0.6)
    d2 = budgeted_initial_stepsize(60.0, 4, 1.0, 0.6)
    assert d2 / d1 == pytest.approx(2.0 ** (-30.0 / 5.0))


def test_budgeted_stepsize_rejects_bad_rate():
    with pytest.raises(ValueError):
        budgeted_initial_stepsize(10.0, 3, 1.0, 1.0)


def test_schedule_validation():
    with pytest.raises(ValueError):
        StepsizeSchedule.fixed(0.0)
    with pytest.raises(ValueError):
        StepsizeSchedule.geometric(1.0, 0.0)
    with pytest.raises(ValueError):
        StepsizeSchedule.explicit([0.5, -0.1])
    with pytest.raises(ValueError):
        StepsizeSchedule.fixed(1.0, max_bits=0)


def test_explicit_schedule_bounds_checked():
    s = StepsizeSchedule.explicit([0.5, 0.25])
    assert stepsize_at(s, 1) == 0.25
    with pytest.raises(ValueError):
        stepsize_at(s, 2)


def test_saturation_clamps_and_counts():
    q = make_q(StepsizeSchedule.fixed(0.5), r=2.0, dither=False)
    ledger = QuantizationLedger()
    recv, _ = quantize(np.array([5.0, 0.25, -9.0]), 0, q, ledger=ledger)
    assert recv[0] == 1.0 and recv[2] == -1.0
    assert ledger.saturation_events == 2


def test_saturation_warns_without_ledger():
    q = make_q(StepsizeSchedule.fixed(0.5), r=2.0, dither=False)
    with pytest.warns(UserWarning):
        quantize(np.array([5.0]), 0, q)


def test_ledger_totals():
    q = make_q(StepsizeSchedule.fixed(0.1), r=1.6)
    ledger = QuantizationLedger()
    quantize(np.zeros(7), 0, q, link_id=0, ledger=ledger)
    quantize(np.zeros(7), 0, q, link_id=1, ledger=ledger)
    quantize(np.zeros(7), 1, q, link_id=0, ledger=ledger)
    assert ledger.total_bits == 4 * 7 * 3
    assert ledger.bits_per_iteration == [4, 4]


def test_ledger_csv_format(tmp_path):
    q = make_q(StepsizeSchedule.fixed(0.1), r=1.6)
    ledger = QuantizationLedger()
    quantize(np.zeros(3), 0, q, ledger=ledger)
    path = tmp_path / "ledger.csv"
    ledger.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "iteration,delta,bits,saturations"
    assert lines[1].startswith("0,")


def test_unresolved_range_policy_rejected():
    q = DitheredQuantizer(StepsizeSchedule.fixed(0.5))
    with pytest.raises(ValueError):
        quantize(np.ones(3), 0, q)


def test_with_range_from_default_is_twice_norm():
    q = DitheredQuantizer(StepsizeSchedule.fixed(0.5))
    x = np.array([3.0, 4.0])
    assert q.with_range_from(x).range_at(0) == pytest.approx(10.0)


@settings(max_examples=60, deadline=None)
@given(
    x=st.floats(min_value=-30.0, max_value=30.0,
                allow_nan=False, allow_infinity=False),
    delta=st.floats(min_value=1e-3, max_value=2.0),
    seed=st.integers(min_value=0, max_value=2**31),
)
def test_noise_bounded_by_half_step(x, delta, seed):
    q = make_q(StepsizeSchedule.fixed(delta), r=200.0, seed=seed)
    _, noise = quantize(x, 0, q)
    assert abs(noise) <= delta / 2.0 + 1e-12
