"""Embedded element patterns and element efficiency."""
from dataclasses import dataclass
import math

import numpy as np

from .errors import ConfigurationError, DomainError

PATTERN_KINDS = ("isotropic", "cos-q", "tabulated")
POLARIZATIONS = ("theta", "phi")
EFFICIENCY_KINDS = ("ideal", "hannan", "tabulated")
EFFICIENCY_DOMAINS = ("power", "amplitude")
_EPS = 1e-12


def cosq_exponent(hpbw_deg):
    """Exponent ``q`` such that ``cos(theta)**q`` is at -3 dB at half the beamwidth."""
    return math.log(2 ** -0.5) / math.log(math.cos(math.radians(hpbw_deg) / 2.0))


@dataclass(frozen=True, eq=False)
class PatternTable:
    """Complex pattern samples on a full ``(theta, phi)`` grid (radians)."""

    theta: np.ndarray  # ascending, [0, pi/2]
    phi: np.ndarray  # ascending, within (-pi, pi]
    f_theta: np.ndarray  # (n_theta, n_phi) complex
    f_phi: np.ndarray


@dataclass(frozen=True)
class ElementPattern:
    kind: str = "isotropic"
    polarization: str = "theta"
    q_exponent: float = 0.0
    table: PatternTable = None

    def __post_init__(self):
        if self.kind not in PATTERN_KINDS:
            raise ConfigurationError(f"unknown pattern kind {self.kind!r}")
        if self.polarization not in POLARIZATIONS:
            raise ConfigurationError(f"unknown polarization {self.polarization!r}")
        if self.kind == "tabulated" and self.table is None:
            raise ConfigurationError("tabulated pattern needs a table")
        if self.kind == "cos-q" and self.q_exponent < 0:
            raise ConfigurationError("cos-q exponent must be non-negative")

    @classmethod
    def patch(cls, hpbw_deg=70.0, polarization="theta"):
        return cls("cos-q", polarization, cosq_exponent(hpbw_deg))


def _bilinear_periodic(table, values, theta, phi):
    th, ph = table.theta, table.phi
    if np.any(theta < th[0] - _EPS) or np.any(theta > th[-1] + _EPS):
        raise DomainError("theta outside the tabulated grid")
    theta = np.clip(theta, th[0], th[-1])
    i = np.clip(np.searchsorted(th, theta, side="right") - 1, 0, len(th) - 2)
    ft = (theta - th[i]) / (th[i + 1] - th[i])
    # periodic in phi: append the first column shifted by 2*pi
    ph_ext = np.append(ph, ph[0] + 2 * math.pi)
    vals = np.concatenate([values, values[:, :1]], axis=1)
    p = (phi - ph[0]) % (2 * math.pi) + ph[0]
    j = np.clip(np.searchsorted(ph_ext, p, side="right") - 1, 0, len(ph_ext) - 2)
    fp = (p - ph_ext[j]) / (ph_ext[j + 1] - ph_ext[j])
    return (
        (1 - ft) * (1 - fp) * vals[i, j]
        + ft * (1 - fp) * vals[i + 1, j]
        + (1 - ft) * fp * vals[i, j + 1]
        + ft * fp * vals[i + 1, j + 1]
    )


def pattern_eval(pattern, theta, phi):
    """Return ``(F_theta, F_phi)`` of ``pattern`` at the given directions.

    Only the upper hemisphere is defined.  The scalar pattern used by the
    unpolarized model is ``sqrt(|F_theta|**2 + |F_phi|**2)``.
    """
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    if np.any(theta < -_EPS) or np.any(theta > math.pi / 2 + _EPS):
        raise DomainError("pattern is defined for theta in [0, pi/2] only")
    if pattern.kind == "tabulated":
        ft = _bilinear_periodic(pattern.table, pattern.table.f_theta, theta, phi)
        fp = _bilinear_periodic(pattern.table, pattern.table.f_phi, theta, phi)
    else:
        if pattern.kind == "isotropic":
            mag = np.ones_like(theta)
        else:
            mag = np.clip(np.cos(theta), 0.0, 1.0) ** pattern.q_exponent
        zero = np.zeros_like(mag)
        ft, fp = (mag, zero) if pattern.polarization == "theta" else (zero, mag)
        ft = ft.astype(complex)
        fp = fp.astype(complex)
    if ft.ndim == 0:
        return complex(ft), complex(fp)
    return ft, fp


def pattern_magnitude(pattern, theta, phi):
    ft, fp = pattern_eval(pattern, theta, phi)
    return np.sqrt(np.abs(ft) ** 2 + np.abs(fp) ** 2)


def load_pattern_csv(path):
    """Read a tabulated pattern.

    Columns: ``theta_deg, phi_deg, re_Ftheta, im_Ftheta, re_Fphi, im_Fphi``.
    The grid must be complete, with theta spanning 0..90 degrees and phi
    values inside (-180, 180].
    """
    import pandas as pd

    cols = ["theta_deg", "phi_deg", "re_Ftheta", "im_Ftheta", "re_Fphi", "im_Fphi"]
    try:
        df = pd.read_csv(path)
    except (OSError, ValueError) as exc:
        raise ConfigurationError(f"cannot read pattern file {path}: {exc}") from exc
    missing = [c for c in cols if c not in df.columns]
    if missing:
        raise ConfigurationError(f"pattern file {path} lacks columns {missing}")
    th = np.unique(df["theta_deg"].to_numpy(float))
    ph = np.unique(df["phi_deg"].to_numpy(float))
    if len(df) != len(th) * len(ph) or df.duplicated(["theta_deg", "phi_deg"]).any():
        raise ConfigurationError(f"pattern file {path}: grid is not complete")
    if th[0] != 0.0 or th[-1] != 90.0 or len(th) < 2:
        raise ConfigurationError(f"pattern file {path}: theta must span 0..90 degrees")
    if ph[0] <= -180.0 or ph[-1] > 180.0 or len(ph) < 2:
        raise ConfigurationError(f"pattern file {path}: phi must lie in (-180, 180]")
    df = df.sort_values(["theta_deg", "phi_deg"])
    shape = (len(th), len(ph))
    f_theta = (df["re_Ftheta"].to_numpy() + 1j * df["im_Ftheta"].to_numpy()).reshape(shape)
    f_phi = (df["re_Fphi"].to_numpy() + 1j * df["im_Fphi"].to_numpy()).reshape(shape)
    table = PatternTable(np.radians(th), np.radians(ph), f_theta, f_phi)
    return ElementPattern("tabulated", "theta", 0.0, table)


def hannan_efficiency(spacing_x, spacing_y, wavelength):
    """Hannan's element-efficiency limit, capped at one."""
    if spacing_x <= 0 or spacing_y <= 0 or wavelength <= 0:
        raise DomainError("spacings and wavelength must be positive")
    return min(1.0, math.pi * spacing_x * spacing_y / wavelength**2)


@dataclass(frozen=True)
class EfficiencyModel:
    kind: str = "ideal"
    per_element: tuple = ()

    def __post_init__(self):
        if self.kind not in EFFICIENCY_KINDS:
            raise ConfigurationError(f"unknown efficiency kind {self.kind!r}")
        vals = tuple(float(v) for v in self.per_element)
        if any(not 0.0 <= v <= 1.0 for v in vals):
            raise ConfigurationError("efficiencies must lie in [0, 1]")
        if self.kind == "tabulated" and not vals:
            raise ConfigurationError("tabulated efficiency needs per-element values")
        object.__setattr__(self, "per_element", vals)


def element_efficiencies(array, model):
    n = array.num_elements
    if model.kind == "ideal":
        return np.ones(n)
    if model.kind == "hannan":
        return np.full(n, hannan_efficiency(array.spacing_x, array.spacing_y, array.wavelength))
    if len(model.per_element) != n:
        raise ConfigurationError(
            f"efficiency table has {len(model.per_element)} entries for {n} elements"
        )
    return np.asarray(model.per_element, dtype=float)


def efficiency_matrix(array, model):
    """Diagonal matrix of per-element efficiencies."""
    return np.diag(element_efficiencies(array, model))


def channel_gamma(array, model, domain="power"):
    """Diagonal of the efficiency matrix as it enters the channel product.

    ``domain="power"`` treats each efficiency as a power ratio, so the
    amplitude factor is its square root; ``"amplitude"`` uses it as is.
    """
    if domain not in EFFICIENCY_DOMAINS:
        raise ConfigurationError(f"unknown efficiency domain {domain!r}")
    eta = element_efficiencies(array, model)
    return np.sqrt(eta) if domain == "power" else eta
