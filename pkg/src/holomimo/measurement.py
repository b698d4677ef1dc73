"""Frequency-sweep channel datasets: file format, validation, analysis.

File layout (CSV)::

    # scenario=perpendicular
    # f_start_hz=4600000000
    ...                                   (one "# key=value" line per header key)
    q,p,sample_index,re,im
    1,1,0,0.123...,-0.456...

``q`` and ``p`` are 1-based receive/transmit element indices in the
row-major order of :class:`~holomimo.geometry.PlanarArray`;
``sample_index`` is 0-based.  Values are written with 17 significant
digits, which round-trips float64 exactly.
"""
from dataclasses import dataclass
import math
import os

import numpy as np

from .antenna import EfficiencyModel, channel_gamma
from .capacity import STRATEGIES, evaluate_sweep, snapshot_stats
from .errors import ConfigurationError, DatasetError, DomainError
from .geometry import PlanarArray, build_array
from .presets import SPEED_OF_LIGHT, SWEEP_START_HZ, SWEEP_STOP_HZ

HEADER_KEYS = (
    "scenario",
    "f_start_hz",
    "f_stop_hz",
    "n_samples",
    "rx_nx",
    "rx_ny",
    "rx_dx_m",
    "rx_dy_m",
    "tx_nx",
    "tx_ny",
    "tx_dx_m",
    "tx_dy_m",
)
COLUMNS = ["q", "p", "sample_index", "re", "im"]


@dataclass(frozen=True, eq=False)
class FrequencySweepRecord:
    rx_index: int
    tx_index: int
    samples: np.ndarray
    f_start: float
    f_stop: float


@dataclass(frozen=True, eq=False)
class MeasurementDataset:
    scenario_label: str
    rx_array: PlanarArray
    tx_array: PlanarArray
    samples: np.ndarray  # (N_R, N_S, n_samples) complex
    f_start: float
    f_stop: float

    def __post_init__(self):
        if not self.f_start < self.f_stop:
            raise DatasetError(f"f_start {self.f_start} must be below f_stop {self.f_stop}")
        expect = (self.rx_array.num_elements, self.tx_array.num_elements)
        if self.samples.ndim != 3 or self.samples.shape[:2] != expect:
            raise DatasetError(f"samples have shape {self.samples.shape}, expected {expect} + (n,)")

    @property
    def n_samples(self):
        return self.samples.shape[2]

    @property
    def center_frequency(self):
        return 0.5 * (self.f_start + self.f_stop)

    @property
    def wavelength(self):
        return SPEED_OF_LIGHT / self.center_frequency

    @property
    def frequencies(self):
        return np.linspace(self.f_start, self.f_stop, self.n_samples)

    def record(self, q, p):
        """Record of receive element ``q`` and transmit element ``p`` (1-based)."""
        n_r, n_s = self.samples.shape[:2]
        if not (1 <= q <= n_r and 1 <= p <= n_s):
            raise DomainError(f"pair {(q, p)} is outside the {n_r}x{n_s} dataset")
        return FrequencySweepRecord(q, p, self.samples[q - 1, p - 1], self.f_start, self.f_stop)

    @property
    def records(self):
        n_r, n_s = self.samples.shape[:2]
        return [self.record(q, p) for q in range(1, n_r + 1) for p in range(1, n_s + 1)]


def _array_from_header(h, end, wavelength):
    return build_array(
        float(h[f"{end}_dx_m"]),
        float(h[f"{end}_dy_m"]),
        int(h[f"{end}_nx"]),
        int(h[f"{end}_ny"]),
        wavelength,
        "receive" if end == "rx" else "transmit",
    )


def dataset_from_matrices(matrices, rx_array, tx_array, label="synthetic", f_start=SWEEP_START_HZ, f_stop=SWEEP_STOP_HZ):
    """Stack per-frequency ``N_R x N_S`` matrices into a dataset."""
    stack = np.stack([np.asarray(m, dtype=complex) for m in matrices], axis=-1)
    return MeasurementDataset(label, rx_array, tx_array, stack, float(f_start), float(f_stop))


def write_dataset(dataset, path):
    import pandas as pd

    n_r, n_s, n = dataset.samples.shape
    rx, tx = dataset.rx_array, dataset.tx_array
    header = {
        "scenario": dataset.scenario_label,
        "f_start_hz": repr(float(dataset.f_start)),
        "f_stop_hz": repr(float(dataset.f_stop)),
        "n_samples": n,
        "rx_nx": rx.count_x,
        "rx_ny": rx.count_y,
        "rx_dx_m": repr(float(rx.spacing_x)),
        "rx_dy_m": repr(float(rx.spacing_y)),
        "tx_nx": tx.count_x,
        "tx_ny": tx.count_y,
        "tx_dx_m": repr(float(tx.spacing_x)),
        "tx_dy_m": repr(float(tx.spacing_y)),
    }
    q, p, s = np.meshgrid(np.arange(1, n_r + 1), np.arange(1, n_s + 1), np.arange(n), indexing="ij")
    flat = dataset.samples.ravel()
    frame = pd.DataFrame(
        {"q": q.ravel(), "p": p.ravel(), "sample_index": s.ravel(), "re": flat.real, "im": flat.imag}
    )
    try:
        with open(path, "w", newline="") as fh:
            for key in HEADER_KEYS:
                fh.write(f"# {key}={header[key]}\n")
            frame.to_csv(fh, index=False, float_format="%.17g", lineterminator="\n")
    except OSError as exc:
        raise DatasetError(f"cannot write dataset to {path}: {exc}") from exc


def _read_header(path):
    header, n_meta = {}, 0
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            n_meta += 1
            key, sep, value = line[1:].strip().partition("=")
            if not sep:
                raise DatasetError(f"{path}: line {n_meta}: malformed header line {line.strip()!r}")
            header[key.strip()] = value.strip()
    missing = [k for k in HEADER_KEYS if k not in header]
    if missing:
        raise DatasetError(f"{path}: missing header keys {missing}")
    return header, n_meta


def load_dataset(path):
    """Read and validate a dataset file.

    Every ``(q, p)`` pair must appear with each sample index exactly once;
    violations name the offending row, pair or field.
    """
    import pandas as pd

    if not os.path.exists(path):
        raise DatasetError(f"{path}: no such file")
    header, n_meta = _read_header(path)
    try:
        f_start, f_stop = float(header["f_start_hz"]), float(header["f_stop_hz"])
        n = int(header["n_samples"])
        if n < 1:
            raise ValueError("n_samples must be >= 1")
        wavelength = SPEED_OF_LIGHT / (0.5 * (f_start + f_stop))
        rx = _array_from_header(header, "rx", wavelength)
        tx = _array_from_header(header, "tx", wavelength)
    except (ValueError, ConfigurationError) as exc:
        raise DatasetError(f"{path}: bad header value: {exc}") from exc
    try:
        df = pd.read_csv(path, skiprows=n_meta, float_precision="round_trip")
    except (ValueError, pd.errors.ParserError) as exc:
        raise DatasetError(f"{path}: cannot parse records: {exc}") from exc
    if list(df.columns) != COLUMNS:
        raise DatasetError(f"{path}: line {n_meta + 1}: expected columns {COLUMNS}, got {list(df.columns)}")
    first_data_line = n_meta + 2
    cols = {}
    for name in COLUMNS:
        col = pd.to_numeric(df[name], errors="coerce").to_numpy(dtype=float)
        bad = ~np.isfinite(col)
        if name in ("q", "p", "sample_index"):
            bad |= col != np.round(col)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise DatasetError(
                f"{path}: line {first_data_line + i} (record {i + 1}): invalid {name} value {df[name].iloc[i]!r}"
            )
        cols[name] = col
    n_r, n_s = rx.num_elements, tx.num_elements
    q = cols["q"].astype(np.int64)
    p = cols["p"].astype(np.int64)
    s = cols["sample_index"].astype(np.int64)
    for name, arr, top in (("q", q, n_r), ("p", p, n_s), ("sample_index", s + 1, n)):
        bad = (arr < 1) | (arr > top)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise DatasetError(f"{path}: line {first_data_line + i}: {name} out of range")
    flat = ((q - 1) * n_s + (p - 1)) * n + s
    counts = np.bincount(flat, minlength=n_r * n_s * n).reshape(n_r, n_s, n)
    dup = np.argwhere(counts > 1)
    if dup.size:
        qq, pp, ss = dup[0]
        raise DatasetError(f"{path}: duplicate record for pair ({qq + 1}, {pp + 1}) at sample {ss}")
    per_pair = counts.sum(axis=2)
    missing = np.argwhere(per_pair == 0)
    if missing.size:
        qq, pp = missing[0]
        raise DatasetError(f"{path}: missing pair ({qq + 1}, {pp + 1})")
    partial = np.argwhere(per_pair != n)
    if partial.size:
        qq, pp = partial[0]
        raise DatasetError(
            f"{path}: pair ({qq + 1}, {pp + 1}) has {per_pair[qq, pp]} samples, frequency grid needs {n}"
        )
    samples = np.empty(n_r * n_s * n, dtype=complex)
    samples[flat] = cols["re"] + 1j * cols["im"]
    return MeasurementDataset(header["scenario"], rx, tx, samples.reshape(n_r, n_s, n), f_start, f_stop)


def channel_at_frequency(dataset, sample_index):
    if not 0 <= sample_index < dataset.n_samples:
        raise DomainError(f"sample index {sample_index} outside 0..{dataset.n_samples - 1}")
    return dataset.samples[:, :, sample_index].copy()


@dataclass(frozen=True)
class CorrelationReport:
    pair_a: tuple
    pair_b: tuple
    correlation_magnitude: float
    rx_separation: float


def _correlation(a, b):
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise DomainError("correlation is undefined for a zero-energy record")
    return min(1.0, abs(np.vdot(a, b)) / (na * nb))


def spatial_correlation(dataset, pair_a, pair_b):
    """Normalised inner product of two records over frequency.

    The mean is not removed.  ``rx_separation`` is the distance between
    the two receive elements.
    """
    ra, rb = dataset.record(*pair_a), dataset.record(*pair_b)
    pos = dataset.rx_array.positions
    sep = float(np.linalg.norm(pos[pair_a[0] - 1] - pos[pair_b[0] - 1]))
    return CorrelationReport(tuple(pair_a), tuple(pair_b), _correlation(ra.samples, rb.samples), sep)


def decimation_indices(count, ratio):
    """Grid indices kept when every ``ratio``-th element is retained.

    Anchored at index 0 (the minimum-coordinate corner).
    """
    return np.arange(0, count, ratio)


def _ratio(target, native, count, axis):
    r = target / native
    k = int(round(r))
    if k < 1 or abs(r - k) > 1e-9 * max(1.0, r):
        raise ConfigurationError(
            f"target spacing {target:g} m is not an integer multiple of the native {axis} spacing {native:g} m",
            "spacings",
        )
    if count % k:
        raise ConfigurationError(f"decimation by {k} does not preserve the {count}-element {axis} aperture", "spacings")
    return k


def subsample_by_spacing(dataset, target_spacing):
    """Keep every k-th receive element per axis, starting at the corner."""
    rx = dataset.rx_array
    kx = _ratio(target_spacing, rx.spacing_x, rx.count_x, "x")
    ky = _ratio(target_spacing, rx.spacing_y, rx.count_y, "y")
    ix = decimation_indices(rx.count_x, kx)
    iy = decimation_indices(rx.count_y, ky)
    keep = (iy[:, None] * rx.count_x + ix[None, :]).ravel()
    new_rx = build_array(
        rx.spacing_x * kx, rx.spacing_y * ky, len(ix), len(iy), rx.wavelength, rx.role
    )
    return MeasurementDataset(
        dataset.scenario_label, new_rx, dataset.tx_array, dataset.samples[keep], dataset.f_start, dataset.f_stop
    )


def synthesize_dataset(scenario, num_frequencies, seed, f_start=SWEEP_START_HZ, f_stop=SWEEP_STOP_HZ, workers=1):
    """Dataset whose i-th frequency sample is Monte Carlo realization i.

    Snapshots are independent draws at the carrier; the narrowband model
    carries no frequency correlation.
    """
    from .synthesis import map_realizations

    mats = map_realizations(scenario, num_frequencies, seed, lambda r: r.matrix, workers)
    return dataset_from_matrices(mats, scenario.rx_array, scenario.tx_array, scenario.scenario_id, f_start, f_stop)


def export_synthetic(scenario, num_frequencies, seed, path, f_start=SWEEP_START_HZ, f_stop=SWEEP_STOP_HZ, workers=1):
    ds = synthesize_dataset(scenario, num_frequencies, seed, f_start, f_stop, workers)
    write_dataset(ds, path)
    return ds


def default_spacings(dataset):
    """Native spacing times every ratio that divides the grid, up to lambda/2."""
    rx, lam = dataset.rx_array, dataset.wavelength
    if not math.isclose(rx.spacing_x, rx.spacing_y, rel_tol=1e-9):
        raise ConfigurationError("default spacings need a square receive grid", "spacings")
    out = []
    for k in range(1, min(rx.count_x, rx.count_y) + 1):
        s = rx.spacing_x * k
        if s > lam / 2 * (1 + 1e-9):
            break
        if rx.count_x % k == 0 and rx.count_y % k == 0:
            out.append(s)
    return out


def measured_spacing_sweep(
    dataset,
    spacings,
    snr,
    efficiency_kinds=("ideal",),
    strategies=STRATEGIES,
    normalization="per-spacing",
    efficiency_domain="power",
):
    """Capacity versus receive spacing from decimated measured snapshots.

    Per spacing, every frequency sample is one snapshot; the reported
    capacity is the mean over snapshots and ``per_snapshot`` holds the
    individual values.  Efficiency applies to the receive array only.
    """
    kinds = ["ideal"] + [k for k in efficiency_kinds if k != "ideal"]
    stats = []
    for s in spacings:
        sub = subsample_by_spacing(dataset, s)
        gammas = {k: channel_gamma(sub.rx_array, EfficiencyModel(k), efficiency_domain) for k in kinds}
        mats = (sub.samples[:, :, i] for i in range(sub.n_samples))
        stats.append(snapshot_stats(mats, s, gammas, np.ones(sub.tx_array.num_elements)))
    results = evaluate_sweep(stats, dataset.wavelength, snr, strategies, normalization)
    return [r for r in results if r.efficiency in kinds]
