import math

import numpy as np
import pytest

from holomimo.capacity import equal_power_capacity, waterfilling_capacity
from holomimo.errors import ConfigurationError, DatasetError, DomainError
from holomimo.geometry import build_array
from holomimo.measurement import (
    MeasurementDataset,
    channel_at_frequency,
    default_spacings,
    export_synthetic,
    load_dataset,
    measured_spacing_sweep,
    spatial_correlation,
    subsample_by_spacing,
    synthesize_dataset,
    write_dataset,
)
from holomimo.synthesis import Scenario, monte_carlo

from conftest import LAM


def toy_dataset(n_rx=(2, 1), n_tx=(1, 1), n=5, fill=None):
    rx = build_array(LAM / 2, LAM / 2, *n_rx, LAM)
    tx = build_array(LAM / 2, LAM / 2, *n_tx, LAM, "transmit")
    shape = (rx.num_elements, tx.num_elements, n)
    if fill is None:
        rng = np.random.default_rng(0)
        samples = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    else:
        samples = np.full(shape, fill, dtype=complex)
    return MeasurementDataset("perpendicular", rx, tx, samples, 4.6e9, 4.8e9)


def write_lines(path, header, rows):
    with open(path, "w") as fh:
        for k, v in header.items():
            fh.write(f"# {k}={v}\n")
        fh.write("q,p,sample_index,re,im\n")
        for r in rows:
            fh.write(",".join(str(x) for x in r) + "\n")


def toy_header(rx=(2, 2), tx=(1, 1), n=3):
    return {
        "scenario": "toy",
        "f_start_hz": 4.6e9,
        "f_stop_hz": 4.8e9,
        "n_samples": n,
        "rx_nx": rx[0], "rx_ny": rx[1], "rx_dx_m": 0.03, "rx_dy_m": 0.03,
        "tx_nx": tx[0], "tx_ny": tx[1], "tx_dx_m": 0.03, "tx_dy_m": 0.03,
    }


def full_rows(n_r, n_s, n):
    return [(q, p, s, q + 0.5 * s, -p) for q in range(1, n_r + 1) for p in range(1, n_s + 1) for s in range(n)]


def test_toy_file_loads(tmp_path):
    path = tmp_path / "toy.csv"
    write_lines(path, toy_header((2, 1), (2, 1)), full_rows(2, 2, 3))
    ds = load_dataset(path)
    assert len(ds.records) == 4
    assert ds.record(2, 1).samples[2] == 3.0 - 1j
    assert ds.center_frequency == pytest.approx(4.7e9)


def test_rows_may_come_in_any_order(tmp_path):
    rows = full_rows(4, 1, 3)
    rng = np.random.default_rng(1)
    path = tmp_path / "shuffled.csv"
    write_lines(path, toy_header(), [rows[i] for i in rng.permutation(len(rows))])
    ds = load_dataset(path)
    assert ds.record(3, 1).samples[1] == 3.5 - 1j


def test_missing_pair_is_named(tmp_path):
    rows = [r for r in full_rows(4, 1, 3) if r[0] != 3]
    path = tmp_path / "missing.csv"
    write_lines(path, toy_header(), rows)
    with pytest.raises(DatasetError, match=r"\(3, 1\)"):
        load_dataset(path)


def test_duplicate_record_is_named(tmp_path):
    rows = full_rows(4, 1, 3) + [(2, 1, 1, 0.0, 0.0)]
    path = tmp_path / "dup.csv"
    write_lines(path, toy_header(), rows)
    with pytest.raises(DatasetError, match=r"duplicate.*\(2, 1\)"):
        load_dataset(path)


def test_short_frequency_grid_is_rejected(tmp_path):
    rows = [r for r in full_rows(4, 1, 3) if not (r[0] == 4 and r[2] == 2)]
    path = tmp_path / "short.csv"
    write_lines(path, toy_header(), rows)
    with pytest.raises(DatasetError, match=r"\(4, 1\) has 2 samples"):
        load_dataset(path)


def test_corrupt_row_names_its_line(tmp_path):
    rows = full_rows(4, 1, 3)
    rows[5] = (2, 1, 2, "abc", 0.0)
    path = tmp_path / "corrupt.csv"
    write_lines(path, toy_header(), rows)
    with pytest.raises(DatasetError, match=r"line 19 \(record 6\): invalid re"):
        load_dataset(path)  # 12 header lines and the column line precede record 1


def test_out_of_range_index(tmp_path):
    rows = full_rows(4, 1, 3)
    rows[0] = (5, 1, 0, 0.0, 0.0)
    path = tmp_path / "range.csv"
    write_lines(path, toy_header(), rows)
    with pytest.raises(DatasetError, match="q out of range"):
        load_dataset(path)


def test_missing_header_key(tmp_path):
    header = toy_header()
    del header["tx_dx_m"]
    path = tmp_path / "header.csv"
    write_lines(path, header, full_rows(4, 1, 3))
    with pytest.raises(DatasetError, match="tx_dx_m"):
        load_dataset(path)


def test_missing_file():
    with pytest.raises(DatasetError, match="no such file"):
        load_dataset("/nonexistent/data.csv")


def test_sweep_centre_frequency():
    ds = toy_dataset(n=1023)
    assert ds.center_frequency == 4.7e9
    assert ds.frequencies[0] == 4.6e9 and ds.frequencies[-1] == 4.8e9


def test_channel_at_frequency_passthrough():
    ds = toy_dataset(fill=1 + 0j)
    for i in range(ds.n_samples):
        np.testing.assert_array_equal(channel_at_frequency(ds, i), np.ones((2, 1)))
    with pytest.raises(DomainError):
        channel_at_frequency(ds, ds.n_samples)
    with pytest.raises(DomainError):
        channel_at_frequency(ds, -1)


def test_write_then_load_is_exact(tmp_path):
    ds = toy_dataset((4, 2), (2, 1), 7)
    path = tmp_path / "rt.csv"
    write_dataset(ds, path)
    back = load_dataset(path)
    assert np.array_equal(back.samples, ds.samples)
    assert back.rx_array.spacing_x == ds.rx_array.spacing_x
    assert back.scenario_label == "perpendicular"


def test_correlation_cases():
    ds = toy_dataset()
    assert spatial_correlation(ds, (1, 1), (1, 1)).correlation_magnitude == pytest.approx(1.0, abs=1e-12)
    samples = np.zeros((2, 1, 4), dtype=complex)
    samples[0, 0, :2] = [1, 2j]
    samples[1, 0, 2:] = [3, -1]
    ortho = MeasurementDataset("x", ds.rx_array, ds.tx_array, samples, 4.6e9, 4.8e9)
    rep = spatial_correlation(ortho, (1, 1), (2, 1))
    assert rep.correlation_magnitude == 0.0
    assert rep.rx_separation == pytest.approx(LAM / 2)
    samples[1, 0] = 0
    with pytest.raises(DomainError):
        spatial_correlation(ortho, (1, 1), (2, 1))


def test_correlation_is_bounded():
    ds = toy_dataset((4, 4), (2, 1), 50)
    for a in range(1, 17):
        for b in range(1, 17):
            c = spatial_correlation(ds, (a, 1), (b, 2)).correlation_magnitude
            assert 0.0 <= c <= 1.0 + 1e-9


def _fine_dataset(n=2):
    rx = build_array(LAM / 8, LAM / 8, 16, 16, LAM)
    tx = build_array(LAM / 2, LAM / 2, 4, 4, LAM, "transmit")
    return synthesize_dataset(Scenario(rx, tx), n, 5)


def test_subsampling_element_counts_256_64_16():
    ds = _fine_dataset()
    quarter = subsample_by_spacing(ds, LAM / 4)
    half = subsample_by_spacing(quarter, LAM / 2)
    assert [ds.rx_array.num_elements, quarter.rx_array.num_elements, half.rx_array.num_elements] == [256, 64, 16]
    assert half.rx_array.aperture_x == pytest.approx(ds.rx_array.aperture_x)
    assert np.array_equal(half.samples, subsample_by_spacing(ds, LAM / 2).samples)


def test_subsampling_keeps_corner_anchored_elements():
    ds = _fine_dataset()
    sub = subsample_by_spacing(ds, LAM / 4)
    # element (ix, iy) of the coarse grid is element (2 ix, 2 iy) of the fine grid
    for ix, iy in [(0, 0), (3, 5), (7, 7)]:
        fine_q = 2 * iy * 16 + 2 * ix
        np.testing.assert_array_equal(sub.samples[iy * 8 + ix], ds.samples[fine_q])
        offset = ds.rx_array.positions[fine_q] - sub.rx_array.positions[iy * 8 + ix]
        np.testing.assert_allclose(offset, ds.rx_array.positions[0] - sub.rx_array.positions[0], atol=1e-15)


def test_subsampling_identity_and_errors():
    ds = _fine_dataset()
    assert np.array_equal(subsample_by_spacing(ds, LAM / 8).samples, ds.samples)
    with pytest.raises(ConfigurationError):
        subsample_by_spacing(ds, LAM / 3)
    with pytest.raises(ConfigurationError):
        subsample_by_spacing(ds, 3 * LAM / 8)  # integer ratio, but 16 is not a multiple of 3


def test_default_spacings():
    assert default_spacings(_fine_dataset()) == pytest.approx([LAM / 8, LAM / 4, LAM / 2])


def test_export_round_trip_and_determinism(tmp_path):
    rx = build_array(LAM / 4, LAM / 4, 4, 4, LAM)
    tx = build_array(LAM / 2, LAM / 2, 2, 1, LAM, "transmit")
    sc = Scenario(rx, tx, scenario_id="rt")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    export_synthetic(sc, 6, 21, a)
    export_synthetic(sc, 6, 21, b)
    assert a.read_bytes() == b.read_bytes()
    ds = load_dataset(a)
    source = monte_carlo(sc, 6, 21)
    for i, r in enumerate(source):
        np.testing.assert_allclose(channel_at_frequency(ds, i), r.matrix, rtol=0, atol=1e-12)
    export_synthetic(sc, 1, 21, tmp_path / "one.csv")
    single = load_dataset(tmp_path / "one.csv")
    assert np.array_equal(channel_at_frequency(single, 0), source[0].matrix)


def test_isotropic_correlation_decays_with_distance():
    """lambda/8 neighbours correlate more than elements 2 lambda apart.  The
    aperture (6 lambda) exceeds twice the larger separation, because the
    harmonic expansion is periodic over the aperture."""
    rx = build_array(LAM / 8, LAM / 8, 48, 1, LAM)
    tx = build_array(LAM / 2, LAM / 2, 1, 1, LAM, "transmit")
    ds = synthesize_dataset(Scenario(rx, tx), 400, 3)
    near = np.mean([spatial_correlation(ds, (q, 1), (q + 1, 1)).correlation_magnitude for q in range(1, 48)])
    far = np.mean([spatial_correlation(ds, (q, 1), (q + 16, 1)).correlation_magnitude for q in range(1, 33)])
    assert near > 0.8
    assert near > far + 0.5


def test_measured_sweep_equals_direct_capacity():
    ds = _fine_dataset(n=3)
    res = measured_spacing_sweep(ds, [LAM / 8, LAM / 2], 1.0)
    for r in res:
        sub = subsample_by_spacing(ds, r.spacing)
        mats = [sub.samples[:, :, i] for i in range(3)]
        c = math.sqrt(sub.rx_array.num_elements * 16 / np.mean([np.vdot(m, m).real for m in mats]))
        fn = equal_power_capacity if r.strategy == "equal" else waterfilling_capacity
        direct = [fn(c * m, 1.0).bits_per_s_per_hz for m in mats]
        np.testing.assert_allclose(r.per_snapshot, direct, rtol=1e-12)
        assert r.mean_capacity == pytest.approx(np.mean(direct), rel=1e-12)
