import math

import numpy as np
import pytest

from holomimo.antenna import (
    EfficiencyModel,
    ElementPattern,
    channel_gamma,
    cosq_exponent,
    efficiency_matrix,
    element_efficiencies,
    hannan_efficiency,
    load_pattern_csv,
    pattern_eval,
    pattern_magnitude,
)
from holomimo.errors import ConfigurationError, DomainError
from holomimo.geometry import build_array
from holomimo.presets import PATTERN_PRESETS

from conftest import LAM


@pytest.mark.parametrize("frac, expected", [(2, math.pi / 4), (4, math.pi / 16), (8, math.pi / 64)])
def test_hannan_values(frac, expected):
    assert hannan_efficiency(LAM / frac, LAM / frac, LAM) == pytest.approx(expected, abs=1e-12)


def test_hannan_is_capped_at_one():
    assert hannan_efficiency(LAM, LAM, LAM) == 1.0
    assert hannan_efficiency(0.6 * LAM, 0.6 * LAM, LAM) == 1.0


def test_hannan_rejects_nonpositive():
    with pytest.raises(DomainError):
        hannan_efficiency(0.0, 0.1, LAM)


def test_efficiency_matrix_is_diagonal():
    arr = build_array(LAM / 4, LAM / 4, 3, 3, LAM)
    m = efficiency_matrix(arr, EfficiencyModel("hannan"))
    assert m.shape == (9, 9)
    np.testing.assert_array_equal(m - np.diag(np.diag(m)), 0.0)
    np.testing.assert_allclose(np.diag(m), math.pi / 16, rtol=1e-15)
    np.testing.assert_array_equal(efficiency_matrix(arr, EfficiencyModel()), np.eye(9))


def test_channel_gamma_domains():
    arr = build_array(LAM / 8, LAM / 8, 2, 2, LAM)
    eta = math.pi / 64
    np.testing.assert_allclose(channel_gamma(arr, EfficiencyModel("hannan"), "power"), math.sqrt(eta))
    np.testing.assert_allclose(channel_gamma(arr, EfficiencyModel("hannan"), "amplitude"), eta)
    with pytest.raises(ConfigurationError):
        channel_gamma(arr, EfficiencyModel("hannan"), "decibel")


def test_tabulated_efficiency():
    arr = build_array(LAM / 2, LAM / 2, 2, 1, LAM)
    np.testing.assert_array_equal(element_efficiencies(arr, EfficiencyModel("tabulated", (0.5, 0.25))), [0.5, 0.25])
    with pytest.raises(ConfigurationError):
        element_efficiencies(arr, EfficiencyModel("tabulated", (0.5,)))
    with pytest.raises(ConfigurationError):
        EfficiencyModel("tabulated", (1.5, 0.1))


def test_cosq_half_power_at_half_beamwidth():
    q = cosq_exponent(70.0)
    assert q == pytest.approx(1.7373, abs=1e-4)
    p = ElementPattern.patch(70.0)
    assert pattern_magnitude(p, math.radians(35.0), 0.0) ** 2 == pytest.approx(0.5, rel=1e-12)
    assert pattern_magnitude(p, 0.0, 1.0) == 1.0
    assert pattern_magnitude(p, math.pi / 2, 0.0) == pytest.approx(0.0, abs=1e-12)


def test_polarization_components():
    ft, fp = pattern_eval(PATTERN_PRESETS["isotropic-theta"], 0.5, 0.3)
    assert (ft, fp) == (1.0, 0.0)
    ft, fp = pattern_eval(PATTERN_PRESETS["patch-phi"], 0.5, 0.3)
    assert ft == 0.0 and abs(fp) == pytest.approx(math.cos(0.5) ** cosq_exponent(70.0))


def test_back_hemisphere_is_rejected():
    with pytest.raises(DomainError):
        pattern_eval(ElementPattern(), 2.0, 0.0)


def test_invalid_pattern():
    with pytest.raises(ConfigurationError):
        ElementPattern("horn")
    with pytest.raises(ConfigurationError):
        ElementPattern("isotropic", "circular")


def _write_table(path, theta_deg, phi_deg, f):
    with open(path, "w") as fh:
        fh.write("theta_deg,phi_deg,re_Ftheta,im_Ftheta,re_Fphi,im_Fphi\n")
        for t in theta_deg:
            for p in phi_deg:
                v = f(math.radians(t), math.radians(p))
                fh.write(f"{t},{p},{v.real},{v.imag},0,0\n")


def test_tabulated_pattern_interpolates_linearly(tmp_path):
    theta = np.arange(0, 91, 10)
    phi = np.arange(-170, 181, 10)
    f = lambda t, p: complex(2 * t + 0.5 * math.cos(p), t)  # linear in theta
    path = tmp_path / "pattern.csv"
    _write_table(path, theta, phi, f)
    pat = load_pattern_csv(path)
    assert pat.kind == "tabulated"
    ft, fp = pattern_eval(pat, np.radians([0, 10, 15, 90]), np.radians([0, 10, 10, 180]))
    np.testing.assert_allclose(ft[:2], [f(0, 0), f(math.radians(10), math.radians(10))], atol=1e-12)
    # halfway in theta at a grid phi: exact for a pattern linear in theta
    np.testing.assert_allclose(ft[2], f(math.radians(15), math.radians(10)), atol=1e-12)
    np.testing.assert_allclose(fp, 0.0)
    # phi wraps around: -175 deg sits between 180 and -170
    mid = pattern_eval(pat, 0.5, math.radians(-175.0))[0]
    ends = [pattern_eval(pat, 0.5, math.radians(a))[0] for a in (180.0, -170.0)]
    assert mid == pytest.approx(0.5 * (ends[0] + ends[1]), abs=1e-12)


def test_incomplete_table_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    _write_table(path, [0, 45, 90], [0, 90], lambda t, p: 1 + 0j)
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(ConfigurationError, match="grid"):
        load_pattern_csv(path)


def test_missing_pattern_file():
    with pytest.raises(ConfigurationError):
        load_pattern_csv("/nonexistent/pattern.csv")
