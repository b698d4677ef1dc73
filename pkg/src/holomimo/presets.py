"""Built-in cluster sets, element patterns and the measurement geometry.

The indoor NLOS cluster sets are hand-picked stand-ins for a rich
scattering room: eight clusters per link end with moderate
concentrations spread over the upper hemisphere.  They are not fitted
to any measured data.
"""
from .antenna import ElementPattern
from .spectrum import AngularPowerSpectrum, VmfCluster

SPEED_OF_LIGHT = 299_792_458.0
CARRIER_HZ = 4.7e9
SWEEP_START_HZ = 4.6e9
SWEEP_STOP_HZ = 4.8e9
SWEEP_SAMPLES = 1023
PATCH_HPBW_DEG = 70.0

# (theta_deg, phi_deg, concentration, weight)
INDOOR_NLOS_RX = (
    (20.0, 30.0, 12.0, 0.22),
    (35.0, -60.0, 8.0, 0.17),
    (50.0, 140.0, 10.0, 0.14),
    (65.0, -150.0, 6.0, 0.12),
    (15.0, -100.0, 15.0, 0.11),
    (45.0, 80.0, 9.0, 0.10),
    (70.0, 10.0, 5.0, 0.08),
    (30.0, -20.0, 7.0, 0.06),
)
INDOOR_NLOS_TX = (
    (25.0, -40.0, 10.0, 0.22),
    (40.0, 100.0, 8.0, 0.17),
    (10.0, 170.0, 14.0, 0.14),
    (55.0, -120.0, 7.0, 0.12),
    (35.0, 20.0, 12.0, 0.11),
    (60.0, 60.0, 6.0, 0.10),
    (20.0, -160.0, 9.0, 0.08),
    (50.0, -80.0, 5.0, 0.06),
)

CLUSTER_PRESETS = {
    "isotropic": ((0.0, 0.0, 0.0, 1.0),),
    "indoor-nlos-rx": INDOOR_NLOS_RX,
    "indoor-nlos-tx": INDOOR_NLOS_TX,
}


def spectrum_from_rows(rows):
    return AngularPowerSpectrum(tuple(VmfCluster.from_degrees(*r) for r in rows))


def cluster_preset(name):
    return spectrum_from_rows(CLUSTER_PRESETS[name])


PATTERN_PRESETS = {
    "isotropic-theta": ElementPattern("isotropic", "theta"),
    "isotropic-phi": ElementPattern("isotropic", "phi"),
    "discone": ElementPattern("isotropic", "theta"),
    "patch-theta": ElementPattern.patch(PATCH_HPBW_DEG, "theta"),
    "patch-phi": ElementPattern.patch(PATCH_HPBW_DEG, "phi"),
}
