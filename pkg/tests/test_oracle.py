import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import step_schedule
from slowlight.errors import OutOfWindow
from slowlight.metrics import spatial_length
from slowlight.oracle import (
    StageSolution,
    in_transient,
    oracle_field,
    oracle_spinwave,
    retrieval_field_approx,
    retrieval_field_integral,
    split_transient_phi,
    transient_phi,
)
from slowlight.physics import PhysicalParams
from slowlight.pulses import PulseEnvelope

P = PhysicalParams()
ENV = PulseEnvelope("gaussian", 0.05, 7000.0, 2600.0)
SCHED = step_schedule(10850.0, rf=[(10900.0, math.pi / 4), (14500.0, 1.5 * math.pi)])
GEO = StageSolution.build(P, SCHED, l_s=78.0)


def test_velocities_and_constants():
    assert GEO.v1 == pytest.approx(1 / (1e-4 + 100))
    assert GEO.v2 == pytest.approx(1 / (1e-4 + 50))
    assert GEO.kappa * GEO.v2 / GEO.v1 == pytest.approx(GEO.beta1 / GEO.beta2, rel=1e-12)
    ideal = StageSolution.build(P, SCHED, idealized=True)
    assert ideal.v2 == pytest.approx(2 * ideal.v1)
    assert ideal.kappa == ideal.eta == 1.0


def test_retrieval_gain_is_unity_for_protocol():
    assert GEO.retrieval_gain == pytest.approx(1.0)
    assert GEO.split_kick == pytest.approx(math.sqrt(2) * (1 - 1 / math.sqrt(2)))


def test_stage_labels():
    z = 40.0
    t = np.array([10000.0, GEO.t_z(z) + 1, 11000.0, 14500.0, 15000.0])
    assert list(GEO.stage(z, t)) == [0, 1, 2, 4, 4]  # instant rf: t4 == t5


def test_stage0_is_slow_transport():
    z = np.linspace(0, 30, 7)
    t = 8000.0
    np.testing.assert_allclose(oracle_field(z, t, GEO, ENV), ENV(t - z / GEO.v1), rtol=1e-14)


def test_field_depends_on_big_t_only():
    # far past the step transients the S1 field is a function of T alone
    z1, t1 = 60.0, 11900.0
    target = GEO.big_t(z1, t1)
    z2 = 70.0
    # solve big_t(z2, t2) = target
    t2 = target / (GEO.kappa * GEO.v2 / GEO.v1) + GEO.t_c + (z2 - GEO.z_c) / GEO.v2
    geo = StageSolution.build(P, step_schedule(10850.0), l_s=78.0)
    a = oracle_field(z1, t1, geo, ENV)
    b = oracle_field(z2, t2, geo, ENV)
    assert abs(a - b) < 1e-12


def test_post_step_amplitude_and_rf_split():
    z = np.linspace(0, 78, 157)
    pre = np.max(np.abs(oracle_field(z, 10849.0, GEO, ENV)))
    post = np.max(np.abs(oracle_field(z, 10899.0, GEO, ENV)))
    assert post / pre == pytest.approx(math.sqrt(2), rel=0.01)
    after = np.max(np.abs(oracle_field(z, 10900 + GEO.tau_gamma, GEO, ENV)))
    assert after == pytest.approx(ENV.peak, rel=0.02)


def test_exact_transient_branch_continuity():
    z = 50.0
    for t_ev in (GEO.t_z(z), GEO.t3):
        lo = oracle_field(z, t_ev - 1e-6, GEO, ENV, exact_transients=True)
        hi = oracle_field(z, t_ev + 1e-6, GEO, ENV, exact_transients=True)
        assert abs(hi - lo) < 1e-3 * ENV.peak


def test_two_term_forms_track_quadrature_after_transient():
    z, t = 60.0, GEO.t_z(60.0) + 3 * GEO.tau_gamma
    pair = transient_phi(z, t, GEO, ENV)
    assert abs(pair.quad - pair.approx) < 0.05 * ENV.peak
    pair = split_transient_phi(z, GEO.t3 + 3 * GEO.tau_gamma, GEO, ENV)
    assert abs(pair.quad - pair.approx) < 0.05 * ENV.peak


def test_retrieval_integral_limits_and_linearity():
    assert retrieval_field_integral(0.0, 15000.0, GEO, ENV) == 0
    z, t = 70.0, 16000.0
    q = retrieval_field_integral(z, t, GEO, ENV)
    a = retrieval_field_approx(z, t, GEO, ENV)
    assert abs(q - a) < 0.05 * abs(a)
    env2 = PulseEnvelope("gaussian", 0.1, 7000.0, 2600.0)
    assert retrieval_field_integral(z, t, GEO, env2) == pytest.approx(2 * q, rel=1e-9)


def test_pi_retrieval_flips_sign():
    other = StageSolution.build(
        P, step_schedule(10850.0, rf=[(10900.0, math.pi / 4), (14500.0, math.pi / 2)]), l_s=78.0
    )
    z = np.linspace(10, 78, 9)
    t = 16000.0
    np.testing.assert_allclose(oracle_field(z, t, other, ENV), -oracle_field(z, t, GEO, ENV), atol=1e-15)


def test_spin_wave_length_conserved():
    z = np.linspace(0, 78, 1561)
    before, _ = oracle_spinwave(z, 10849.0, GEO, ENV)
    after, _ = oracle_spinwave(z, 10850.0 + GEO.tau_gamma, GEO, ENV)
    lb = spatial_length(before, z[1] - z[0])
    assert spatial_length(after, z[1] - z[0]) == pytest.approx(lb, rel=0.01)


def test_stage0_spin_wave_length():
    z = np.linspace(0, 78, 1561)
    cm, cbm = oracle_spinwave(z, 9000.0, GEO, ENV)
    assert spatial_length(cm, z[1] - z[0]) == pytest.approx(GEO.v1 * ENV.t_p1, rel=0.02)
    assert np.all(cbm == 0)


def test_stored_wave_is_split_profile():
    z = np.linspace(0, 78, 79)
    _, cbm = oracle_spinwave(z, 12000.0, GEO, ENV)
    expected = -1j * ENV(GEO.big_t3(z)) / (math.sqrt(2) * P.omega0)
    np.testing.assert_allclose(cbm, expected, atol=1e-15)


def test_window_check():
    g = StageSolution.build(P, SCHED, l_s=78.0, t_window=(0.0, 18500.0))
    with pytest.raises(OutOfWindow):
        oracle_field(80.0, 1000.0, g, ENV)
    with pytest.raises(OutOfWindow):
        oracle_field(10.0, 19000.0, g, ENV)


def test_in_transient_windows():
    assert in_transient(30.0, GEO.t_z(30.0) + 1, GEO)
    assert not in_transient(30.0, GEO.t_z(30.0) + GEO.tau_gamma + 1, GEO)
    assert in_transient(30.0, GEO.t3 + 0.5, GEO)


@given(st.floats(0.2, 4.0))
def test_oracle_linear_in_input(scale):
    env2 = PulseEnvelope("gaussian", 0.05 * scale, 7000.0, 2600.0)
    z = np.linspace(0, 78, 13)
    for t in (9000.0, 11500.0, 16000.0):
        np.testing.assert_allclose(oracle_field(z, t, GEO, env2), scale * oracle_field(z, t, GEO, ENV), rtol=1e-12, atol=1e-18)
