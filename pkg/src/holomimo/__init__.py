"""Holographic MIMO channel synthesis and capacity analysis.

Planar arrays are expanded over their Fourier plane-wave harmonics; the
wavenumber-domain channel is drawn with per-cell variances obtained from a
von Mises-Fisher mixture angular power spectrum.
"""
__version__ = "0.1.0"

from ._backend import BACKEND
from .antenna import (
    EfficiencyModel,
    ElementPattern,
    channel_gamma,
    efficiency_matrix,
    hannan_efficiency,
    load_pattern_csv,
    pattern_eval,
)
from .capacity import (
    capacity,
    equal_power_capacity,
    normalize_channel,
    spacing_sweep,
    waterfill,
    waterfilling_capacity,
)
from .config import ScenarioConfig, load_config, parse_config
from .errors import (
    AssemblyError,
    ConfigurationError,
    DatasetError,
    DomainError,
    HoloMimoError,
    InvalidGeometryError,
    NormalizationError,
    QuadratureError,
)
from .geometry import PlanarArray, angular_cells, build_array, cell_to_angles, wavenumber_support
from .measurement import (
    MeasurementDataset,
    channel_at_frequency,
    export_synthetic,
    load_dataset,
    spatial_correlation,
    subsample_by_spacing,
)
from .spectrum import AngularPowerSpectrum, VmfCluster, cell_power, variance_matrix, vmf_pdf
from .synthesis import PolarizationParams, Scenario, assemble, monte_carlo, realization
