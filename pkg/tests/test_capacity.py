import math

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest

from holomimo.antenna import ElementPattern
from holomimo.capacity import (
    equal_power_capacity,
    evaluate_sweep,
    mode_gains,
    normalize_channel,
    snapshot_stats,
    spacing_sweep,
    waterfill,
    waterfilling_capacity,
    waterfilling_rate,
)
from holomimo.errors import ConfigurationError, NormalizationError
from holomimo.geometry import build_array
from holomimo.presets import cluster_preset
from holomimo.synthesis import PolarizationParams, Scenario

from conftest import LAM
from oracles import grid_search_three_modes, grid_search_two_modes


def test_equal_power_closed_forms():
    assert equal_power_capacity(np.eye(2), 1.0).bits_per_s_per_hz == pytest.approx(2 * math.log2(1.5), abs=1e-12)
    assert equal_power_capacity(np.zeros((3, 2)), 1.0).bits_per_s_per_hz == 0.0
    assert equal_power_capacity(np.array([[1.0]]), 1.0).bits_per_s_per_hz == pytest.approx(1.0, abs=1e-15)


def test_equal_power_matches_log_det():
    rng = np.random.default_rng(3)
    for _ in range(20):
        h = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
        snr = rng.uniform(0.1, 50)
        _, logdet = np.linalg.slogdet(np.eye(5) + snr / 3 * h @ h.conj().T)
        assert equal_power_capacity(h, snr).bits_per_s_per_hz == pytest.approx(logdet / math.log(2), rel=1e-12)


def test_waterfilling_strong_mode_example():
    h = np.diag(np.sqrt([2.0, 0.5]))
    res = waterfilling_capacity(h, 1.0)
    assert res.bits_per_s_per_hz == pytest.approx(math.log2(3), abs=1e-9)
    assert res.bits_per_s_per_hz == pytest.approx(grid_search_two_modes(2.0, 0.5, 1.0), abs=1e-9)
    np.testing.assert_allclose(res.mode_powers, [1.0, 0.0], atol=1e-12)


def test_waterfilling_equal_modes_is_equal_power():
    h = np.eye(3) * 0.7
    assert waterfilling_capacity(h, 2.0).bits_per_s_per_hz == pytest.approx(
        equal_power_capacity(h, 2.0).bits_per_s_per_hz, abs=1e-9
    )


def test_waterfilling_high_snr_splits_evenly():
    p, _ = waterfill(np.array([1.0, 1.0]), 1e6)
    np.testing.assert_allclose(p, [5e5, 5e5], rtol=1e-6)


def test_rank_zero_channel():
    res = waterfilling_capacity(np.zeros((2, 2)), 3.0)
    assert res.bits_per_s_per_hz == 0.0
    assert not np.any(res.mode_powers)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 20), st.floats(0.01, 20), st.floats(0.05, 30))
def test_waterfilling_matches_grid_search_two_modes(g1, g2, snr):
    ref = grid_search_two_modes(g1, g2, snr, points=200_001)
    got = waterfilling_rate(np.array([g1, g2]), snr)
    assert got >= ref - 1e-9
    assert got == pytest.approx(ref, abs=1e-6)


def test_waterfilling_matches_grid_search_three_modes():
    rng = np.random.default_rng(5)
    for _ in range(10):
        g = rng.uniform(0.05, 5.0, 3)
        snr = rng.uniform(0.1, 10)
        assert waterfilling_rate(g, snr) >= grid_search_three_modes(g, snr) - 1e-9


@settings(max_examples=50, deadline=None)
@given(st.lists(st.one_of(st.just(0.0), st.floats(1e-6, 100.0)), min_size=1, max_size=8), st.floats(1e-3, 1e4))
def test_waterfill_kkt(gains, total):
    g = np.array(gains)
    p, mu = waterfill(g, total)
    assert np.all(p >= 0)
    if not np.any(g > 0):
        assert not np.any(p)
        return
    assert p.sum() == pytest.approx(total, rel=1e-12)
    on = p > 0
    np.testing.assert_allclose(p[on] + 1 / g[on], mu, rtol=1e-9)
    off = (~on) & (g > 0)
    assert np.all(1 / g[off] >= mu * (1 - 1e-9))


def test_waterfilling_never_loses_to_equal_power():
    rng = np.random.default_rng(7)
    for _ in range(200):
        n_r, n_s = rng.integers(1, 7, size=2)
        h = rng.standard_normal((n_r, n_s)) + 1j * rng.standard_normal((n_r, n_s))
        snr = 10 ** rng.uniform(-2, 3)
        wf = waterfilling_capacity(h, snr).bits_per_s_per_hz
        assert wf >= equal_power_capacity(h, snr).bits_per_s_per_hz - 1e-9


def test_batched_waterfill_matches_rows():
    rng = np.random.default_rng(8)
    g = rng.uniform(0, 3, (50, 4))
    batched = waterfilling_rate(g, 2.0)
    for row, value in zip(g, batched):
        assert waterfilling_rate(row, 2.0) == pytest.approx(value, rel=1e-13)


def test_mode_gains_are_padded():
    g = mode_gains(np.ones((2, 4)))
    np.testing.assert_allclose(g, [8.0, 0.0, 0.0, 0.0], atol=1e-12)


def test_normalization_examples():
    n_r, n_s = 3, 2
    h = np.full((n_r, n_s), 2.0)  # ||H||^2 = 4 * N_R * N_S
    scaled, c = normalize_channel(h)
    assert c == pytest.approx(0.5)
    np.testing.assert_allclose(scaled, 1.0)
    _, c = normalize_channel(scaled)
    assert c == pytest.approx(1.0, abs=1e-12)
    pair = np.stack([np.zeros((n_r, n_s)), np.full((n_r, n_s), math.sqrt(2.0))])
    _, c = normalize_channel(pair)
    assert c == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(NormalizationError):
        normalize_channel(np.zeros((2, 2, 2)))


def _sweep_scenario(n=4):
    rx = build_array(LAM / 2, LAM / 2, n, n, LAM)
    tx = build_array(LAM / 2, LAM / 2, 2, 2, LAM, "transmit")
    return Scenario(
        rx, tx, cluster_preset("indoor-nlos-rx"), cluster_preset("indoor-nlos-tx"),
        ElementPattern.patch(70.0), ElementPattern.patch(70.0),
        polarization=PolarizationParams(10.0, 4.0),
    )


def test_self_baseline_is_100_percent():
    res = spacing_sweep(_sweep_scenario(), [LAM / 2], 1.0, 10)
    assert len(res) == 2
    assert all(r.relative_percent == 100.0 and r.n_rx == 16 for r in res)


def test_missing_baseline_is_a_configuration_error():
    with pytest.raises(ConfigurationError, match="spacings"):
        spacing_sweep(_sweep_scenario(), [LAM / 4], 1.0, 5)


def test_spacing_that_does_not_divide_the_aperture():
    with pytest.raises(ConfigurationError):
        spacing_sweep(_sweep_scenario(), [LAM / 2, 0.3 * LAM], 1.0, 5)


def test_hannan_gains_are_scaled_by_eta():
    """In the power domain the receive gains shrink by eta = pi/64 at lambda/8."""
    rng = np.random.default_rng(0)
    mats = [rng.standard_normal((16, 4)) for _ in range(5)]
    eta = math.pi / 64
    st_ = snapshot_stats(mats, LAM / 8, {"ideal": np.ones(16), "hannan": np.full(16, math.sqrt(eta))}, np.ones(4))
    np.testing.assert_allclose(st_.gains["hannan"], eta * st_.gains["ideal"], rtol=1e-12)


def test_common_and_per_spacing_normalization_differ_only_off_baseline():
    sc = _sweep_scenario()
    spacings = [LAM / 2, LAM / 4]
    a = spacing_sweep(sc, spacings, 1.0, 20, normalization="per-spacing")
    b = spacing_sweep(sc, spacings, 1.0, 20, normalization="common")
    key = lambda r: (r.spacing, r.strategy)
    a, b = {key(r): r for r in a}, {key(r): r for r in b}
    for k in a:
        if k[0] == LAM / 2:
            assert a[k].mean_capacity == b[k].mean_capacity


def test_capacity_grows_with_oversampling():
    res = spacing_sweep(_sweep_scenario(), [LAM / 2, LAM / 4, LAM / 8], 1.0, 40, master_seed=3)
    eq = sorted((r for r in res if r.strategy == "equal"), key=lambda r: -r.spacing)
    assert eq[0].mean_capacity < eq[1].mean_capacity < eq[2].mean_capacity
    assert [r.n_rx for r in eq] == [16, 64, 256]


def test_evaluate_sweep_rejects_unknown_normalization():
    with pytest.raises(ConfigurationError):
        evaluate_sweep([], LAM, 1.0, normalization="global")
