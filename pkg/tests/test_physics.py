import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from slowlight.errors import (
    AdiabaticityViolated,
    EitConditionViolated,
    RfRegimeViolated,
    ZeroControlField,
)
from slowlight.physics import (
    H_DOUBLE_INTENSITY,
    DerivedRates,
    PhysicalParams,
    damping_rates,
    group_velocity,
    kernel_kx,
    kernel_ky,
    kx_shape,
    ky_shape,
    mixing_angles,
    transparency_width,
    validate_params,
)


def test_transparency_width():
    assert transparency_width(1.0, 4.0) == pytest.approx(0.5)


def test_group_velocity_formula():
    v = group_velocity(1.0, 100.0, 1e4)
    assert v == pytest.approx(1.0 / (1e-4 + 100.0))
    assert group_velocity(1.0, 0.0, 1e4) == pytest.approx(1e4)


def test_group_velocity_zero_control():
    with pytest.raises(ZeroControlField):
        group_velocity(0.0, 100.0, 1e4)


def test_doubled_intensity_doubles_velocity_when_c_is_large():
    v1 = group_velocity(1.0, 100.0, 1e12)
    v2 = group_velocity(1.0 + H_DOUBLE_INTENSITY, 100.0, 1e12)
    assert v2 / v1 == pytest.approx(2.0, rel=1e-9)


@given(
    gamma=st.floats(3.0, 50.0),
    ratio=st.floats(0.01, 0.999),
)
def test_rate_identities(gamma, ratio):
    # omega_eff below the critical gamma / 2
    omega_eff = ratio * gamma / 2
    gp, gm = damping_rates(gamma, omega_eff)
    assert gp + gm == pytest.approx(gamma, rel=1e-12, abs=1e-12)
    assert gp * gm == pytest.approx(omega_eff**2, rel=1e-11)
    assert gp >= gm > 0


def test_rates_for_stepped_control():
    gp, gm = damping_rates(4.0, math.sqrt(2.0))
    assert gp + gm == pytest.approx(4.0, abs=1e-12)
    assert gp * gm == pytest.approx(2.0, abs=1e-12)


def test_kernel_boundary_values():
    r = DerivedRates.from_params(PhysicalParams())
    h = H_DOUBLE_INTENSITY
    assert kernel_kx(0.0, r, h) == pytest.approx(h, abs=1e-10)
    assert kernel_ky(0.0, r, h) == pytest.approx(0.0, abs=1e-10)
    eps = 1e-7
    slope = (kernel_ky(eps, r, h) - kernel_ky(0.0, r, h)) / eps
    assert slope == pytest.approx(h, abs=1e-6)
    assert kernel_kx(-1.0, r, h) == 0.0 and kernel_ky(-1.0, r, h) == 0.0


def test_kernels_decay():
    r = DerivedRates.from_params(PhysicalParams())
    assert abs(kernel_kx(r.tau_gamma, r, 1.0)) < 0.05
    assert abs(kernel_kx(40 / r.gamma_minus, r, 1.0)) < 1e-15


def test_degenerate_kernels():
    g = 4.0
    tau = np.linspace(0, 5, 11)
    gp = gm = g / 2
    np.testing.assert_allclose(kx_shape(tau, gp, gm), (1 + g * tau / 2) * np.exp(-g * tau / 2), rtol=1e-12)
    np.testing.assert_allclose(ky_shape(tau, gp, gm), tau * np.exp(-g * tau / 2), rtol=1e-12)
    # nearly degenerate stays continuous with the exact limit
    np.testing.assert_allclose(kx_shape(tau, gp + 1e-9, gm - 1e-9), kx_shape(tau, gp, gm), atol=1e-7)


@given(st.floats(0.01, 30.0))
def test_kernels_solve_atom_transient(tau):
    # K_x' = -K_y and K_y' = K_x... checked against finite differences of the shapes
    gp, gm = damping_rates(4.0, math.sqrt(2.0))
    e = 1e-6
    dkx = (kx_shape(tau + e, gp, gm) - kx_shape(tau - e, gp, gm)) / (2 * e)
    assert dkx == pytest.approx(-gp * gm * ky_shape(tau, gp, gm), abs=1e-7)


def test_tau_gamma_is_five_slow_efolds():
    r = DerivedRates.from_params(PhysicalParams())
    assert r.tau_gamma == pytest.approx(5.0 / r.gamma_minus)


def test_mixing_angles():
    assert mixing_angles(1.0, 1.0) == pytest.approx(math.pi / 4)
    assert mixing_angles(math.sqrt(2), 1.0, "post") == pytest.approx(math.pi / 4)
    assert mixing_angles(0.05j, 1.0) == pytest.approx(math.atan(0.05))
    with pytest.raises(ZeroControlField):
        mixing_angles(1.0, 0.0)


def test_validate_accepts_defaults():
    p = PhysicalParams()
    assert validate_params(p, 1 / 2600) is p


def test_validate_names_eit_inequality():
    with pytest.raises(EitConditionViolated, match=r"gamma > 2\*sqrt\(2\)\*omega0"):
        validate_params(PhysicalParams(gamma=2.0), 1 / 2600)


def test_validate_adiabaticity_and_rf():
    with pytest.raises(AdiabaticityViolated):
        validate_params(PhysicalParams(), 1.0)
    with pytest.raises(RfRegimeViolated):
        validate_params(PhysicalParams(p_rf=10.0), 1 / 2600)
