"""Random wavenumber channels, polarization, harmonics and assembly."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import cached_property
import math

import numpy as np

from . import rng
from .antenna import EfficiencyModel, ElementPattern, channel_gamma, pattern_eval
from .errors import AssemblyError, ConfigurationError
from .geometry import PlanarArray, angular_cells, wavenumber_support
from .spectrum import ISOTROPIC, AngularPowerSpectrum, variance_matrix

BLOCKS = ("tt", "tp", "pt", "pp")  # row-major order of the 2x2 block matrix


@dataclass(frozen=True)
class PolarizationParams:
    """Cross-polarization ratio statistics, in dB.

    ``xpr_mean_db = inf`` switches the cross-polar blocks off;
    ``random_phase=False`` pins every phase to zero.
    """

    xpr_mean_db: float = math.inf
    xpr_std_db: float = 0.0
    random_phase: bool = True

    def __post_init__(self):
        if not self.xpr_std_db >= 0:
            raise ConfigurationError("xpr_std_db must be >= 0", "polarization.xpr_std_db")
        if math.isnan(self.xpr_mean_db) or self.xpr_mean_db == -math.inf:
            raise ConfigurationError("xpr_mean_db must be finite or +inf", "polarization.xpr_mean_db")

    @property
    def mean_inverse_xpr(self):
        """``E[1/kappa]`` for the log-normal XPR."""
        if self.xpr_mean_db == math.inf:
            return 0.0
        a = math.log(10) / 10
        return math.exp(-a * self.xpr_mean_db + 0.5 * (a * self.xpr_std_db) ** 2)


@dataclass(frozen=True, eq=False)
class WavenumberChannel:
    base: np.ndarray
    h_tt: np.ndarray
    h_tp: np.ndarray
    h_pt: np.ndarray
    h_pp: np.ndarray
    seed: int = 0

    def block(self, name):
        return getattr(self, "h_" + name)

    def block_matrix(self):
        return np.block([[self.h_tt, self.h_tp], [self.h_pt, self.h_pp]])


@dataclass(frozen=True, eq=False)
class HarmonicsMatrix:
    psi_theta: np.ndarray
    psi_phi: np.ndarray

    @property
    def combined(self):
        return np.concatenate([self.psi_theta, self.psi_phi], axis=1)

    def active(self):
        """Polarizations whose harmonics are not identically zero."""
        return [p for p, m in (("t", self.psi_theta), ("p", self.psi_phi)) if np.any(m)]

    def part(self, pol):
        return self.psi_theta if pol == "t" else self.psi_phi


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    matrix: np.ndarray
    scenario_id: str = ""
    seed: int = 0
    realization_index: int = 0


def sample_wavenumber_base(variance_map, seed):
    """Draw ``H_a`` with independent ``CN(0, sigma**2)`` entries.

    Entry ``(b, a)`` depends only on ``(seed, b, a)``.
    """
    var = np.asarray(getattr(variance_map, "variances", variance_map), dtype=float)
    z = rng.complex_normal(seed, "base", rng.entry_counters(*var.shape))
    return np.sqrt(var) * z


def polarize(base, params, seed):
    base = np.asarray(base, dtype=complex)
    counters = rng.entry_counters(*base.shape)

    def phase(name):
        if not params.random_phase:
            return np.ones(base.shape, dtype=complex)
        return np.exp(1j * rng.uniform_phase(seed, "phase/" + name, counters))

    if params.xpr_mean_db == math.inf:
        inv_sqrt_kappa = np.zeros(base.shape)
    else:
        x = params.xpr_mean_db + params.xpr_std_db * rng.standard_normal(seed, "xpr", counters)
        inv_sqrt_kappa = 10.0 ** (-x / 20.0)
    return WavenumberChannel(
        base=base,
        h_tt=base * phase("tt"),
        h_tp=base * phase("tp") * inv_sqrt_kappa,
        h_pt=base * phase("pt") * inv_sqrt_kappa,
        h_pp=base * phase("pp"),
        seed=int(seed),
    )


def build_harmonics(array, support, pattern):
    if not math.isclose(array.wavelength, support.wavelength, rel_tol=1e-12):
        raise ConfigurationError("array and support set use different wavelengths")
    if not (
        math.isclose(array.aperture_x, support.aperture_x, rel_tol=1e-12)
        and math.isclose(array.aperture_y, support.aperture_y, rel_tol=1e-12)
    ):
        raise ConfigurationError("array and support set use different apertures")
    cells = angular_cells(support)
    kx = 2 * np.pi * support.entries[:, 0] / support.aperture_x
    ky = 2 * np.pi * support.entries[:, 1] / support.aperture_y
    kz = np.array([c.kz for c in cells])
    theta = np.array([c.theta_hat for c in cells])
    phi = np.array([c.phi_hat for c in cells])
    pos = array.positions
    # z is zero for planar arrays; the kz term is kept for generality
    phase = np.outer(pos[:, 0], kx) + np.outer(pos[:, 1], ky) + np.outer(pos[:, 2], kz)
    steer = np.exp(1j * phase) / math.sqrt(array.num_elements)
    f_theta, f_phi = pattern_eval(pattern, theta, phi)
    return HarmonicsMatrix(steer * f_theta[None, :], steer * f_phi[None, :])


def _diag(gamma, n, name):
    g = np.asarray(gamma)
    if g.ndim == 2:
        if g.shape != (n, n):
            raise AssemblyError(f"{name} has shape {g.shape}, expected {(n, n)}")
        g = np.diag(g)
    if g.shape != (n,):
        raise AssemblyError(f"{name} has shape {g.shape}, expected ({n},)")
    return g


def _product(left, middle, right):
    return (left @ middle) @ right.conj().T


def assemble_unpolarized(gamma_r, psi_r, h_a, psi_s, gamma_s):
    """Single-polarization product ``Gamma_R Psi_R H_a Psi_S^H Gamma_S``."""
    n_r, n_s = psi_r.shape[0], psi_s.shape[0]
    if h_a.shape != (psi_r.shape[1], psi_s.shape[1]):
        raise AssemblyError(f"H_a has shape {h_a.shape}, expected {(psi_r.shape[1], psi_s.shape[1])}")
    gr, gs = _diag(gamma_r, n_r, "gamma_r"), _diag(gamma_s, n_s, "gamma_s")
    return gr[:, None] * _product(psi_r, h_a, psi_s) * gs[None, :]


def assemble(gamma_r, harmonics_r, channel, harmonics_s, gamma_s):
    """Polarized channel ``Gamma_R Psi_R^pol H_a^pol Psi_S^pol^H Gamma_S``.

    Polarizations whose harmonics vanish are dropped before the product,
    which leaves the result unchanged and makes single-polarization
    arrays reproduce the unpolarized product bit for bit.
    """
    n_r, n_s = harmonics_r.psi_theta.shape[0], harmonics_s.psi_theta.shape[0]
    expect = (harmonics_r.psi_theta.shape[1], harmonics_s.psi_theta.shape[1])
    for name in BLOCKS:
        if channel.block(name).shape != expect:
            raise AssemblyError(f"wavenumber block h_{name} has shape {channel.block(name).shape}, expected {expect}")
    gr, gs = _diag(gamma_r, n_r, "gamma_r"), _diag(gamma_s, n_s, "gamma_s")
    act_r, act_s = harmonics_r.active(), harmonics_s.active()
    if not act_r or not act_s:
        return ChannelRealization(np.zeros((n_r, n_s), dtype=complex), seed=channel.seed)
    if len(act_r) == 1 and len(act_s) == 1:
        left = harmonics_r.part(act_r[0])
        middle = channel.block(act_r[0] + act_s[0])
        right = harmonics_s.part(act_s[0])
    else:
        left = np.concatenate([harmonics_r.part(p) for p in act_r], axis=1)
        right = np.concatenate([harmonics_s.part(p) for p in act_s], axis=1)
        middle = np.block([[channel.block(a + b) for b in act_s] for a in act_r])
    h = gr[:, None] * _product(left, middle, right) * gs[None, :]
    return ChannelRealization(h, seed=channel.seed)


@dataclass(frozen=True, eq=False)
class Scenario:
    """Everything needed to draw channel realizations for one link."""

    rx_array: PlanarArray
    tx_array: PlanarArray
    rx_spectrum: AngularPowerSpectrum = ISOTROPIC
    tx_spectrum: AngularPowerSpectrum = ISOTROPIC
    rx_pattern: ElementPattern = ElementPattern()
    tx_pattern: ElementPattern = ElementPattern()
    rx_efficiency: EfficiencyModel = EfficiencyModel()
    tx_efficiency: EfficiencyModel = EfficiencyModel()
    polarization: PolarizationParams = PolarizationParams()
    efficiency_domain: str = "power"
    scenario_id: str = "scenario"

    def __post_init__(self):
        if not math.isclose(self.rx_array.wavelength, self.tx_array.wavelength, rel_tol=1e-12):
            raise ConfigurationError("both ends must share one wavelength")

    @property
    def wavelength(self):
        return self.rx_array.wavelength

    @cached_property
    def rx_support(self):
        a = self.rx_array
        return wavenumber_support(a.aperture_x, a.aperture_y, a.wavelength)

    @cached_property
    def tx_support(self):
        a = self.tx_array
        return wavenumber_support(a.aperture_x, a.aperture_y, a.wavelength)

    @cached_property
    def variance_map(self):
        return variance_matrix(self.rx_spectrum, self.tx_spectrum, self.rx_support, self.tx_support)

    @cached_property
    def rx_harmonics(self):
        return build_harmonics(self.rx_array, self.rx_support, self.rx_pattern)

    @cached_property
    def tx_harmonics(self):
        return build_harmonics(self.tx_array, self.tx_support, self.tx_pattern)

    @cached_property
    def rx_gamma(self):
        return channel_gamma(self.rx_array, self.rx_efficiency, self.efficiency_domain)

    @cached_property
    def tx_gamma(self):
        return channel_gamma(self.tx_array, self.tx_efficiency, self.efficiency_domain)

    def with_rx_array(self, rx_array, **changes):
        """Copy with a new receive array; cached matrices are rebuilt lazily.

        The variance map only depends on the aperture, so it is carried
        over when the aperture is unchanged.
        """
        new = replace(self, rx_array=rx_array, **changes)
        same_aperture = math.isclose(rx_array.aperture_x, self.rx_array.aperture_x, rel_tol=1e-12) and math.isclose(
            rx_array.aperture_y, self.rx_array.aperture_y, rel_tol=1e-12
        )
        if same_aperture and "variance_map" in self.__dict__ and "rx_spectrum" not in changes:
            new.__dict__["variance_map"] = self.variance_map
        return new

    def prepare(self):
        """Force every cached quantity (before fanning out to threads)."""
        for name in ("variance_map", "rx_harmonics", "tx_harmonics", "rx_gamma", "tx_gamma"):
            getattr(self, name)
        return self


def realization(scenario, seed, index=0, gamma_r=None, gamma_s=None):
    """One channel draw with the given 64-bit seed."""
    base = sample_wavenumber_base(scenario.variance_map, seed)
    channel = polarize(base, scenario.polarization, seed)
    out = assemble(
        scenario.rx_gamma if gamma_r is None else gamma_r,
        scenario.rx_harmonics,
        channel,
        scenario.tx_harmonics,
        scenario.tx_gamma if gamma_s is None else gamma_s,
    )
    return ChannelRealization(out.matrix, scenario.scenario_id, int(seed), int(index))


def map_realizations(scenario, num_realizations, master_seed, fn, workers=1, gamma_r=None, gamma_s=None):
    """Apply ``fn`` to realizations ``0..n-1``; results come back in index order."""
    if num_realizations < 1:
        raise ConfigurationError("num_realizations must be >= 1")
    scenario.prepare()

    def one(i):
        return fn(realization(scenario, rng.derive_seed(master_seed, i), i, gamma_r, gamma_s))

    workers = max(1, int(workers))
    if workers == 1:
        return [one(i) for i in range(num_realizations)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(num_realizations)))


def monte_carlo(scenario, num_realizations, master_seed, workers=1):
    return map_realizations(scenario, num_realizations, master_seed, lambda r: r, workers)


def expected_frobenius_power(scenario):
    """Analytic ``E ||H||_F**2`` of the scenario's channel.

    Cross terms vanish because the four phase draws are independent and
    uniform, so only the power of each block survives.
    """
    var = scenario.variance_map.variances
    gr2 = np.abs(scenario.rx_gamma) ** 2
    gs2 = np.abs(scenario.tx_gamma) ** 2
    hr, hs = scenario.rx_harmonics, scenario.tx_harmonics
    rt = gr2 @ np.abs(hr.psi_theta) ** 2
    rp = gr2 @ np.abs(hr.psi_phi) ** 2
    st = gs2 @ np.abs(hs.psi_theta) ** 2
    sp = gs2 @ np.abs(hs.psi_phi) ** 2
    if not scenario.polarization.random_phase:
        raise ValueError("analytic power needs random co-polar phases")
    co = np.outer(rt, st) + np.outer(rp, sp)
    cross = scenario.polarization.mean_inverse_xpr * (np.outer(rt, sp) + np.outer(rp, st))
    return float(np.sum(var * (co + cross)))


def write_realization_csv(realization_, path):
    """One row per ``(q, p)``; indices are 1-based, values at 17 digits."""
    h = realization_.matrix
    n_r, n_s = h.shape
    q, p = np.meshgrid(np.arange(1, n_r + 1), np.arange(1, n_s + 1), indexing="ij")
    with open(path, "w", newline="") as fh:
        fh.write("realization,q,p,re,im\n")
        for qq, pp, v in zip(q.ravel(), p.ravel(), h.ravel()):
            fh.write(f"{realization_.realization_index},{qq},{pp},{v.real:.17g},{v.imag:.17g}\n")
