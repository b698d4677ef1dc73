"""Single-link MIMO capacity, channel normalization and spacing sweeps.

SNR convention: total transmit power over per-receive-antenna noise
power (noise power 1).  Equal power splits it evenly over the ``N_S``
transmit dimensions.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .antenna import EfficiencyModel, channel_gamma
from .errors import ConfigurationError, NormalizationError
from .geometry import build_array

STRATEGIES = ("equal", "waterfilling")
_LOG2 = math.log(2.0)


@dataclass(frozen=True, eq=False)
class CapacityResult:
    bits_per_s_per_hz: float
    mode_gains: np.ndarray
    mode_powers: np.ndarray
    strategy: str
    water_level: float = math.nan


def normalization_scale(frobenius_powers, n_rx, n_tx):
    """Power scale ``c**2`` making the mean ``||H||_F**2`` equal ``n_rx * n_tx``."""
    mean = float(np.mean(np.asarray(frobenius_powers, dtype=float)))
    if not mean > 0:
        raise NormalizationError("cannot normalize a set of all-zero channels")
    return n_rx * n_tx / mean


def normalize_channel(matrices):
    """Scale a set of channel matrices by one common factor.

    Returns ``(scaled, c)`` where ``c`` multiplies amplitudes.
    """
    stack = np.asarray(matrices)
    if stack.ndim == 2:
        stack = stack[None]
    if stack.size == 0:
        raise NormalizationError("empty channel set")
    powers = np.sum(np.abs(stack) ** 2, axis=(1, 2))
    c = math.sqrt(normalization_scale(powers, stack.shape[1], stack.shape[2]))
    scaled = stack * c
    return (scaled if np.ndim(matrices) == 3 else scaled[0]), c


def mode_gains(h, n_modes=None):
    """Squared singular values, descending, zero-padded to ``n_modes``."""
    h = np.asarray(h)
    if h.size == 0:
        return np.zeros(n_modes or 0)
    g = np.linalg.svd(h, compute_uv=False) ** 2
    n = h.shape[-1] if n_modes is None else n_modes
    out = np.zeros(h.shape[:-2] + (n,))
    k = min(n, g.shape[-1])
    out[..., :k] = g[..., :k]
    return out


def equal_power_rate(gains, snr, n_tx):
    gains = np.asarray(gains, dtype=float)
    return np.sum(np.log1p(snr * gains / n_tx), axis=-1) / _LOG2


def waterfill(gains, total_power):
    """Water-filling powers and water level for rows of ``gains``.

    The level is found exactly: with the inverse gains sorted ascending,
    the first ``k`` modes are active for the largest ``k`` whose candidate
    level ``(P + sum of the k smallest inverse gains) / k`` still exceeds
    the k-th inverse gain.  Rows without a positive gain get no power and
    a NaN level.  A mode whose inverse gain dwarfs the budget beyond
    float64 precision receives zero power.
    """
    g = np.atleast_2d(np.asarray(gains, dtype=float))
    with np.errstate(divide="ignore"):
        inv = np.where(g > 0, 1.0 / g, np.inf)
    inv_sorted = np.sort(inv, axis=1)
    k = np.arange(1, g.shape[1] + 1)
    with np.errstate(invalid="ignore"):
        levels = (total_power + np.cumsum(inv_sorted, axis=1)) / k
        feasible = levels > inv_sorted
    n_act = feasible.sum(axis=1)  # feasible is a prefix: true, ..., true, false, ...
    rows = np.arange(g.shape[0])
    mu = np.where(n_act > 0, levels[rows, np.maximum(n_act, 1) - 1], np.nan)
    with np.errstate(invalid="ignore"):
        powers = np.where(inv < mu[:, None], mu[:, None] - inv, 0.0)
        # mu - 1/g cancels badly when 1/g >> P; restore the exact budget
        total = powers.sum(axis=1, keepdims=True)
        powers = powers * np.where(total > 0, total_power / np.where(total > 0, total, 1.0), 1.0)
    if np.ndim(gains) == 1:
        return powers[0], float(mu[0])
    return powers, mu


def waterfilling_rate(gains, snr):
    g = np.atleast_2d(np.asarray(gains, dtype=float))
    p, _ = waterfill(g, snr)
    rate = np.sum(np.log1p(p * g), axis=1) / _LOG2
    return rate[0] if np.ndim(gains) == 1 else rate


def equal_power_capacity(h, snr):
    """``log2 det(I + snr/N_S H H^H)``."""
    h = np.atleast_2d(np.asarray(h))
    n_tx = h.shape[1]
    g = mode_gains(h)
    return CapacityResult(
        float(equal_power_rate(g, snr, n_tx)), g, np.full(n_tx, snr / n_tx), "equal"
    )


def waterfilling_capacity(h, snr):
    h = np.atleast_2d(np.asarray(h))
    g = mode_gains(h)
    p, mu = waterfill(g, snr)
    rate = float(np.sum(np.log1p(p * g)) / _LOG2)
    return CapacityResult(rate, g, p, "waterfilling", mu)


def capacity(h, snr, strategy):
    if strategy == "equal":
        return equal_power_capacity(h, snr)
    if strategy == "waterfilling":
        return waterfilling_capacity(h, snr)
    raise ConfigurationError(f"unknown strategy {strategy!r}")


def rates(gains, snr, n_tx, strategy):
    if strategy == "equal":
        return equal_power_rate(gains, snr, n_tx)
    return waterfilling_rate(gains, snr)


@dataclass(frozen=True, eq=False)
class SpacingSweepResult:
    spacing: float
    n_rx: int
    strategy: str
    efficiency: str
    mean_capacity: float
    relative_percent: float
    num_realizations: int
    seed: int = None
    per_snapshot: np.ndarray = field(default=None, repr=False)

    def spacing_over_lambda(self, wavelength):
        return self.spacing / wavelength


@dataclass(eq=False)
class SnapshotStats:
    """Per-snapshot quantities of one spacing before normalization."""

    spacing: float
    n_rx: int
    n_tx: int
    frobenius: np.ndarray  # ||H||_F**2 of the efficiency-free channel
    gains: dict  # efficiency name -> (K, n_tx) squared singular values


def snapshot_stats(matrices, spacing, gammas_r, gamma_s):
    """Collect normalization powers and mode gains from channel snapshots.

    ``gammas_r`` maps an efficiency name to the receive amplitude factors
    applied after normalization.
    """
    frob, gains = [], {name: [] for name in gammas_r}
    n_rx = n_tx = None
    for h in matrices:
        h = np.asarray(h)
        n_rx, n_tx = h.shape
        frob.append(float(np.vdot(h, h).real))
        for name, gr in gammas_r.items():
            gains[name].append(mode_gains(gr[:, None] * h * gamma_s[None, :]))
    return SnapshotStats(
        spacing, n_rx, n_tx, np.array(frob), {k: np.array(v) for k, v in gains.items()}
    )


def is_baseline(spacing, wavelength):
    return abs(spacing - wavelength / 2) <= 1e-9 * wavelength


def evaluate_sweep(stats_list, wavelength, snr, strategies=STRATEGIES, normalization="per-spacing", seed=None):
    """Mean and relative capacities from a list of :class:`SnapshotStats`."""
    if normalization not in ("per-spacing", "common"):
        raise ConfigurationError(f"unknown normalization {normalization!r}", "normalization")
    base = [s for s in stats_list if is_baseline(s.spacing, wavelength)]
    if not base:
        raise ConfigurationError("spacings must include lambda/2 as the baseline", "spacings")
    common = normalization_scale(base[0].frobenius, base[0].n_rx, base[0].n_tx)
    table = {}
    for st in stats_list:
        c2 = normalization_scale(st.frobenius, st.n_rx, st.n_tx) if normalization == "per-spacing" else common
        for eff, g in st.gains.items():
            for strategy in strategies:
                per = np.asarray(rates(c2 * g, snr, st.n_tx, strategy), dtype=float)
                table[(st.spacing, eff, strategy)] = (st, per)
    results = []
    for (spacing, eff, strategy), (st, per) in table.items():
        ref = table[(base[0].spacing, eff, strategy)][1]
        mean, ref_mean = float(np.mean(per)), float(np.mean(ref))
        rel = 100.0 if spacing == base[0].spacing else (100.0 * mean / ref_mean if ref_mean > 0 else math.nan)
        results.append(
            SpacingSweepResult(spacing, st.n_rx, strategy, eff, mean, rel, len(per), seed, per)
        )
    return results


def _grid_count(aperture, spacing):
    n = aperture / spacing
    if abs(n - round(n)) > 1e-9 * max(1.0, n) or round(n) < 1:
        raise ConfigurationError(
            f"spacing {spacing:g} m does not divide the aperture {aperture:g} m", "spacings"
        )
    return int(round(n))


def spacing_sweep(
    scenario,
    spacings,
    snr,
    num_realizations,
    efficiency_kind="ideal",
    master_seed=0,
    strategies=STRATEGIES,
    normalization="per-spacing",
    workers=1,
):
    """Capacity versus receive spacing at a fixed receive aperture.

    Every spacing reuses the same master seed, so all of them see the same
    wavenumber-domain channel (common random numbers), just sampled by a
    different element grid.  Channels are normalized without receive
    efficiency; the efficiency loss is applied afterwards so that it
    survives normalization.

    ``efficiency_kind`` may be one name or a sequence of names; the ideal
    case is always evaluated as well.
    """
    from .synthesis import map_realizations

    kinds = [efficiency_kind] if isinstance(efficiency_kind, str) else list(efficiency_kind)
    kinds = ["ideal"] + [k for k in kinds if k != "ideal"]
    lam = scenario.wavelength
    if not any(is_baseline(s, lam) for s in spacings):
        raise ConfigurationError("spacings must include lambda/2 as the baseline", "spacings")
    ax, ay = scenario.rx_array.aperture_x, scenario.rx_array.aperture_y
    stats = []
    for s in spacings:
        rx = build_array(s, s, _grid_count(ax, s), _grid_count(ay, s), lam, "receive")
        sc = scenario.with_rx_array(rx)
        gammas = {k: channel_gamma(rx, EfficiencyModel(k), scenario.efficiency_domain) for k in kinds}
        ones_r, ones_s = np.ones(rx.num_elements), np.ones(scenario.tx_array.num_elements)
        matrices = map_realizations(
            sc, num_realizations, master_seed, lambda r: r.matrix, workers, ones_r, ones_s
        )
        stats.append(snapshot_stats(matrices, s, gammas, sc.tx_gamma))
    results = evaluate_sweep(stats, lam, snr, strategies, normalization, master_seed)
    return [r for r in results if r.efficiency in kinds]
