"""Von Mises-Fisher mixture angular power spectra and their cell powers.

Cell powers are integrals of the spectrum over the solid angle that a
wavenumber cell maps to on the upper hemisphere.  Writing normalised
wavenumbers as ``k_x = sin(s)``, ``k_y = cos(s) sin(t)`` turns the solid
angle element into ``cos(s) ds dt`` and removes the ``1/k_z`` singularity
at the edge of the propagating disk.  The ``s`` range is split where the
clipped ``t`` limits change form; on each piece a cubic endpoint map
absorbs the square-root behaviour of those limits, and tensor
Gauss-Legendre quadrature with adaptive quadrisection does the rest.
"""
from dataclasses import dataclass
import math

import numpy as np

from ._backend import kernels
from .errors import ConfigurationError, QuadratureError
from .geometry import angular_cells

QUAD_ORDER = 16
QUAD_TOL = 1e-10
MAX_DEPTH = 10
_GL_X, _GL_W = np.polynomial.legendre.leggauss(QUAD_ORDER)
_GL_X = 0.5 * (_GL_X + 1.0)  # nodes on [0, 1]
_GL_W = 0.5 * _GL_W


@dataclass(frozen=True)
class VmfCluster:
    mean_theta: float
    mean_phi: float
    concentration: float
    weight: float = 1.0

    def __post_init__(self):
        if not self.concentration >= 0:
            raise ConfigurationError(f"concentration must be >= 0, got {self.concentration}")
        if not 0.0 <= self.weight <= 1.0:
            raise ConfigurationError(f"weight must lie in [0, 1], got {self.weight}")
        if not 0.0 <= self.mean_theta <= math.pi:
            raise ConfigurationError(f"mean_theta must lie in [0, pi], got {self.mean_theta}")
        if not -math.pi < self.mean_phi <= math.pi:
            raise ConfigurationError(f"mean_phi must lie in (-pi, pi], got {self.mean_phi}")

    @classmethod
    def from_degrees(cls, theta_deg, phi_deg, concentration, weight=1.0):
        phi = math.remainder(math.radians(phi_deg), 2 * math.pi)
        if phi <= -math.pi:
            phi += 2 * math.pi
        return cls(math.radians(theta_deg), phi, float(concentration), float(weight))

    @property
    def mean_direction(self):
        st = math.sin(self.mean_theta)
        return np.array(
            [st * math.cos(self.mean_phi), st * math.sin(self.mean_phi), math.cos(self.mean_theta)]
        )

    @property
    def normalizer(self):
        """Density at the mean direction, ``kappa / (4 pi sinh kappa) * e**kappa``."""
        k = self.concentration
        if k == 0.0:
            return 1.0 / (4.0 * math.pi)
        return k / (2.0 * math.pi * -math.expm1(-2.0 * k))


@dataclass(frozen=True)
class AngularPowerSpectrum:
    clusters: tuple

    def __post_init__(self):
        clusters = tuple(self.clusters)
        if not clusters:
            raise ConfigurationError("a spectrum needs at least one cluster", "clusters")
        total = sum(c.weight for c in clusters)
        if abs(total - 1.0) > 1e-9:
            raise ConfigurationError(f"weights sum to {total:.12g}, expected 1", "clusters")
        object.__setattr__(self, "clusters", clusters)

    @classmethod
    def single(cls, cluster):
        return cls((VmfCluster(cluster.mean_theta, cluster.mean_phi, cluster.concentration, 1.0),))

    def kernel_arrays(self):
        means = np.array([c.mean_direction for c in self.clusters])
        kappas = np.array([c.concentration for c in self.clusters], dtype=float)
        coefs = np.array([c.weight * c.normalizer for c in self.clusters])
        return means, kappas, coefs

    def mirrored(self):
        """Same mixture reflected through the array plane (``z -> -z``)."""
        return AngularPowerSpectrum(
            tuple(VmfCluster(math.pi - c.mean_theta, c.mean_phi, c.concentration, c.weight) for c in self.clusters)
        )

    def rotated(self, dphi):
        out = []
        for c in self.clusters:
            phi = math.remainder(c.mean_phi + dphi, 2 * math.pi)
            if phi <= -math.pi:
                phi += 2 * math.pi
            out.append(VmfCluster(c.mean_theta, phi, c.concentration, c.weight))
        return AngularPowerSpectrum(tuple(out))


ISOTROPIC = AngularPowerSpectrum((VmfCluster(0.0, 0.0, 0.0, 1.0),))


def _directions(theta, phi):
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def vmf_pdf(cluster, theta, phi):
    """VMF density (per steradian) of ``cluster`` at ``(theta, phi)``.

    Evaluated as ``normalizer * exp(kappa * (cos_angle - 1))`` so large
    concentrations never overflow.
    """
    u = _directions(theta, phi)
    cosang = u @ cluster.mean_direction
    out = cluster.normalizer * np.exp(cluster.concentration * (cosang - 1.0))
    return out if out.ndim else float(out)


def spectrum_eval(spectrum, theta, phi):
    u = _directions(theta, phi)
    shape = u.shape[:-1]
    means, kappas, coefs = spectrum.kernel_arrays()
    out = np.asarray(kernels.vmf_mixture(u.reshape(-1, 3), means, kappas, coefs)).reshape(shape)
    return out if out.ndim else float(out)


def _pieces(rect):
    """Split a normalised rectangle into ``(s0, s1, c, d)`` pieces."""
    (a, b), (c, d) = rect
    a, b = max(a, -1.0), min(b, 1.0)
    if a >= b or c >= d:
        return []
    s_lo, s_hi = math.asin(a), math.asin(b)
    cuts = {s_lo, s_hi}
    for y in (c, d):
        if abs(y) < 1.0:
            sb = math.acos(abs(y))
            for s in (-sb, sb):
                if s_lo < s < s_hi:
                    cuts.add(s)
    cuts = sorted(cuts)
    return [(s0, s1, c, d) for s0, s1 in zip(cuts[:-1], cuts[1:]) if s1 > s0]


def _eval_boxes(boxes, means, kappas, coefs):
    """Tensor Gauss-Legendre estimate on each box.

    ``boxes`` rows are ``(s0, s1, c, d, u0, u1, v0, v1)``; ``(u, v)`` live
    on the unit square of a piece.
    """
    s0, s1, c, d, u0, u1, v0, v1 = (boxes[:, i, None] for i in range(8))
    du, dv = u1 - u0, v1 - v0
    u = u0 + du * _GL_X[None, :]  # (B, n)
    v = v0 + dv * _GL_X[None, :]
    span = s1 - s0
    s = s0 + span * u * u * (3.0 - 2.0 * u)
    jac_s = span * 6.0 * u * (1.0 - u)
    r = np.cos(s)
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = np.arcsin(np.clip(np.where(r > 0, c / r, np.sign(c) * np.inf), -1.0, 1.0))
        t2 = np.arcsin(np.clip(np.where(r > 0, d / r, np.sign(d) * np.inf), -1.0, 1.0))
    t1 = np.nan_to_num(t1)
    t2 = np.nan_to_num(t2)
    t = t1[:, :, None] + (t2 - t1)[:, :, None] * v[:, None, :]  # (B, n_u, n_v)
    ss = np.broadcast_to(s[:, :, None], t.shape)
    rr = np.broadcast_to(r[:, :, None], t.shape)
    dirs = np.stack([np.sin(ss), rr * np.sin(t), rr * np.cos(t)], axis=-1).reshape(-1, 3)
    dens = np.asarray(kernels.vmf_mixture(dirs, means, kappas, coefs)).reshape(t.shape)
    w_u = _GL_W[None, :] * jac_s * r * (t2 - t1)  # (B, n_u)
    w_v = _GL_W[None, None, :]
    return (du[:, 0] * dv[:, 0]) * np.einsum("bi,bij,j->b", w_u, dens, w_v[0, 0])


def _integrate_pieces(pieces, spectrum, tol, max_depth):
    if not pieces:
        return 0.0, 0.0
    means, kappas, coefs = spectrum.kernel_arrays()
    boxes = np.array([(*p, 0.0, 1.0, 0.0, 1.0) for p in pieces], dtype=float)
    tols = np.full(len(boxes), tol / len(boxes))
    whole = _eval_boxes(boxes, means, kappas, coefs)
    total = 0.0
    err_total = 0.0
    for depth in range(max_depth + 1):
        um = 0.5 * (boxes[:, 4] + boxes[:, 5])
        vm = 0.5 * (boxes[:, 6] + boxes[:, 7])
        kids = []
        for lo_u, hi_u in ((boxes[:, 4], um), (um, boxes[:, 5])):
            for lo_v, hi_v in ((boxes[:, 6], vm), (vm, boxes[:, 7])):
                kid = boxes.copy()
                kid[:, 4], kid[:, 5], kid[:, 6], kid[:, 7] = lo_u, hi_u, lo_v, hi_v
                kids.append(kid)
        kids = np.stack(kids, axis=1)  # (B, 4, 8)
        kid_vals = _eval_boxes(kids.reshape(-1, 8), means, kappas, coefs).reshape(-1, 4)
        refined = kid_vals.sum(axis=1)
        err = np.abs(refined - whole)
        done = (err <= tols) | (depth == max_depth)
        total += float(np.sum(refined[done]))
        err_total += float(np.sum(err[done]))
        if done.all():
            break
        keep = ~done
        boxes = kids[keep].reshape(-1, 8)
        whole = kid_vals[keep].reshape(-1)
        tols = np.repeat(tols[keep] / 2.0, 4)
    return total, err_total


def region_power(spectrum, rect, wavelength, tol=QUAD_TOL, max_depth=MAX_DEPTH):
    """Spectrum mass over one wavenumber rectangle clipped to the disk.

    ``rect`` is ``((kx_lo, kx_hi), (ky_lo, ky_hi))`` in rad/m.  Returns
    ``(value, error_estimate)``.
    """
    k0 = 2 * math.pi / wavelength
    (a, b), (c, d) = rect
    return _integrate_pieces(_pieces(((a / k0, b / k0), (c / k0, d / k0))), spectrum, tol, max_depth)


def cell_power_with_error(spectrum, cell, tol=QUAD_TOL, max_depth=MAX_DEPTH):
    value = 0.0
    err = 0.0
    for rect, weight in cell.regions():
        v, e = region_power(spectrum, rect, cell.wavelength, tol, max_depth)
        value += weight * v
        err += weight * e
    if err > max(10 * tol, 1e-6):
        raise QuadratureError(f"adaptive quadrature stalled at error {err:.3g}", cell.index, err)
    return max(value, 0.0), err


def cell_power(spectrum, cell, tol=QUAD_TOL, max_depth=MAX_DEPTH):
    """Mass of ``spectrum`` inside ``cell`` (upper hemisphere only)."""
    return cell_power_with_error(spectrum, cell, tol, max_depth)[0]


def hemisphere_mass(spectrum, tol=QUAD_TOL):
    return region_power(spectrum, ((-1.0, 1.0), (-1.0, 1.0)), 2 * math.pi, tol)[0]


def sphere_mass(spectrum, tol=QUAD_TOL):
    return hemisphere_mass(spectrum, tol) + hemisphere_mass(spectrum.mirrored(), tol)


def cell_powers(spectrum, support, tol=QUAD_TOL):
    out = np.empty(len(support))
    for i, cell in enumerate(angular_cells(support)):
        out[i] = cell_power(spectrum, cell, tol)
    return out


@dataclass(frozen=True, eq=False)
class WavenumberVarianceMap:
    rx_cell_power: np.ndarray
    tx_cell_power: np.ndarray
    variances: np.ndarray

    @classmethod
    def from_cell_powers(cls, rx, tx):
        rx = np.asarray(rx, dtype=float)
        tx = np.asarray(tx, dtype=float)
        return cls(rx, tx, np.outer(rx, tx))

    @property
    def shape(self):
        return self.variances.shape


def variance_matrix(rx_spectrum, tx_spectrum, rx_set, tx_set, tol=QUAD_TOL):
    return WavenumberVarianceMap.from_cell_powers(
        cell_powers(rx_spectrum, rx_set, tol), cell_powers(tx_spectrum, tx_set, tol)
    )
