"""Planar array geometry, wavenumber support sets and cell angles.

Conventions
-----------
* Elements sit on a grid centred at the origin of the array's local
  frame, in the ``z = 0`` plane.  Element ``q`` (0-based) is at column
  ``q % count_x`` and row ``q // count_x`` (row-major, x fastest).
* Aperture is ``count * spacing`` per axis (one cell per element).
* Cells of the wavenumber partition are lattice rectangles of size
  ``2*pi/L_x`` by ``2*pi/L_y`` centred on ``(2*pi*l_x/L_x, 2*pi*l_y/L_y)``,
  clipped to the propagating disk ``k_x**2 + k_y**2 <= (2*pi/lambda)**2``.
  Lattice rectangles whose centre is evanescent but which still overlap
  the disk ("slivers") are handed to the nearest support entry, split
  evenly on ties, so the cells of a support set tile the whole disk.
"""
from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np

from .errors import DomainError, InvalidGeometryError

ROLES = ("transmit", "receive")


@dataclass(frozen=True, eq=False)
class PlanarArray:
    spacing_x: float
    spacing_y: float
    count_x: int
    count_y: int
    wavelength: float
    role: str = "receive"
    positions: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        for name in ("spacing_x", "spacing_y", "wavelength"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise InvalidGeometryError(f"{name} must be positive, got {v!r}")
        for name in ("count_x", "count_y"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise InvalidGeometryError(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.role not in ROLES:
            raise InvalidGeometryError(f"role must be one of {ROLES}, got {self.role!r}")
        x = (np.arange(self.count_x) - (self.count_x - 1) / 2.0) * self.spacing_x
        y = (np.arange(self.count_y) - (self.count_y - 1) / 2.0) * self.spacing_y
        xx, yy = np.meshgrid(x, y)  # rows indexed by y -> row-major order
        pos = np.column_stack([xx.ravel(), yy.ravel(), np.zeros(xx.size)])
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def aperture_x(self):
        return self.count_x * self.spacing_x

    @property
    def aperture_y(self):
        return self.count_y * self.spacing_y

    @property
    def num_elements(self):
        return self.count_x * self.count_y

    def element_index(self, ix, iy):
        """0-based element index of grid column ``ix`` and row ``iy``."""
        return iy * self.count_x + ix

    def grid_coords(self, q):
        return q % self.count_x, q // self.count_x


def build_array(spacing_x, spacing_y, count_x, count_y, wavelength, role="receive"):
    return PlanarArray(spacing_x, spacing_y, count_x, count_y, wavelength, role)


@dataclass(frozen=True, eq=False)
class WavenumberSupportSet:
    entries: np.ndarray  # (n, 2) int, lexicographic by (l_x, l_y)
    aperture_x: float
    aperture_y: float
    wavelength: float

    @property
    def cardinality(self):
        return len(self.entries)

    def __len__(self):
        return len(self.entries)

    def index_of(self, entry):
        lx, ly = entry
        hit = np.flatnonzero((self.entries[:, 0] == lx) & (self.entries[:, 1] == ly))
        if hit.size == 0:
            raise DomainError(f"entry {tuple(entry)} is not in the support set")
        return int(hit[0])

    def __contains__(self, entry):
        lx, ly = entry
        return bool(np.any((self.entries[:, 0] == lx) & (self.entries[:, 1] == ly)))


SUPPORT_SLACK = 1e-9


def _in_support(lx, ly, ax, ay, wavelength):
    # The slack keeps grazing entries when the aperture is count * spacing
    # and differs from a whole number of wavelengths by rounding only.
    return (lx * wavelength / ax) ** 2 + (ly * wavelength / ay) ** 2 <= 1.0 + SUPPORT_SLACK


def wavenumber_support(aperture_x, aperture_y, wavelength):
    """All integer pairs with ``(l_x*lambda/L_x)**2 + (l_y*lambda/L_y)**2 <= 1``.

    The bound carries a relative slack of :data:`SUPPORT_SLACK`.
    """
    if not (aperture_x > 0 and aperture_y > 0 and wavelength > 0):
        raise InvalidGeometryError("apertures and wavelength must be positive")
    mx = int(math.floor(aperture_x / wavelength)) + 1
    my = int(math.floor(aperture_y / wavelength)) + 1
    lx, ly = np.meshgrid(np.arange(-mx, mx + 1), np.arange(-my, my + 1), indexing="ij")
    keep = _in_support(lx, ly, aperture_x, aperture_y, wavelength)
    entries = np.column_stack([lx[keep], ly[keep]]).astype(np.int64)
    # meshgrid with ij indexing already yields lexicographic order
    entries.setflags(write=False)
    return WavenumberSupportSet(entries, float(aperture_x), float(aperture_y), float(wavelength))


@dataclass(frozen=True)
class AngularCell:
    """One cell of the wavenumber partition and its direction.

    ``bounds`` is ``((kx_lo, kx_hi), (ky_lo, ky_hi))`` in rad/m before
    clipping; the clip to the propagating disk happens at integration
    time.  ``shares`` lists extra sliver rectangles with the fraction of
    each that belongs to this cell.
    """

    index: tuple
    theta_hat: float
    phi_hat: float
    kz: float
    bounds: tuple
    wavelength: float
    shares: tuple = ()

    def regions(self):
        """``(rectangle, weight)`` pairs making up the cell."""
        return ((self.bounds, 1.0),) + tuple(self.shares)


def _lattice_rect(lx, ly, ax, ay):
    kx, ky = 2 * math.pi * lx / ax, 2 * math.pi * ly / ay
    hx, hy = math.pi / ax, math.pi / ay
    return ((kx - hx, kx + hx), (ky - hy, ky + hy))


@lru_cache(maxsize=64)
def _sliver_shares(aperture_x, aperture_y, wavelength):
    """Map support entry -> tuple of (rect, weight) slivers it absorbs."""
    support = wavenumber_support(aperture_x, aperture_y, wavelength)
    k0 = 2 * math.pi / wavelength
    ux, uy = wavelength / aperture_x, wavelength / aperture_y  # lattice step / k0
    centres = support.entries * np.array([ux, uy])
    mx = int(math.ceil(aperture_x / wavelength)) + 2
    my = int(math.ceil(aperture_y / wavelength)) + 2
    out = {}
    for lx in range(-mx, mx + 1):
        for ly in range(-my, my + 1):
            if _in_support(lx, ly, aperture_x, aperture_y, wavelength):
                continue
            (x0, x1), (y0, y1) = _lattice_rect(lx, ly, aperture_x, aperture_y)
            nx = min(max(0.0, x0), x1) / k0
            ny = min(max(0.0, y0), y1) / k0
            if nx * nx + ny * ny >= 1.0:
                continue
            d2 = (centres[:, 0] - lx * ux) ** 2 + (centres[:, 1] - ly * uy) ** 2
            nearest = np.flatnonzero(d2 <= d2.min() * (1 + 1e-12))
            rect = ((x0, x1), (y0, y1))
            for i in nearest:
                key = (int(support.entries[i, 0]), int(support.entries[i, 1]))
                out.setdefault(key, []).append((rect, 1.0 / len(nearest)))
    return {k: tuple(v) for k, v in out.items()}


def cell_to_angles(entry, aperture_x, aperture_y, wavelength):
    lx, ly = int(entry[0]), int(entry[1])
    if not _in_support(lx, ly, aperture_x, aperture_y, wavelength):
        raise DomainError(f"entry {(lx, ly)} lies outside the support set")
    k0 = 2 * math.pi / wavelength
    kx, ky = 2 * math.pi * lx / aperture_x, 2 * math.pi * ly / aperture_y
    kz = math.sqrt(max(0.0, k0 * k0 - kx * kx - ky * ky))
    theta = math.acos(min(1.0, kz / k0))
    phi = math.atan2(ky, kx) if (lx or ly) else 0.0
    if phi == -math.pi:
        phi = math.pi
    shares = _sliver_shares(float(aperture_x), float(aperture_y), float(wavelength)).get((lx, ly), ())
    return AngularCell(
        index=(lx, ly),
        theta_hat=theta,
        phi_hat=phi,
        kz=kz,
        bounds=_lattice_rect(lx, ly, aperture_x, aperture_y),
        wavelength=float(wavelength),
        shares=shares,
    )


def angular_cells(support):
    return [
        cell_to_angles(e, support.aperture_x, support.aperture_y, support.wavelength)
        for e in support.entries
    ]


def array_csv_rows(array):
    """``(index, x, y, z)`` rows, 1-based index, for debugging dumps."""
    return [(q + 1, *map(float, p)) for q, p in enumerate(array.positions)]


def support_csv_rows(support):
    rows = []
    for i, cell in enumerate(angular_cells(support)):
        rows.append((i + 1, *cell.index, cell.theta_hat, cell.phi_hat, cell.kz))
    return rows
