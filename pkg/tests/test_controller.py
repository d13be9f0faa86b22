import math
from dataclasses import replace

import numpy as np
import pytest

import faultfoc as ff
from faultfoc.controller import (ControllerConfig, ControllerState,
                                 anti_windup_decide, controller_step,
                                 cross_coupling_comp, d_current_reference,
                                 pi_step, saturate_reference,
                                 tune_magnitude_optimum)
from faultfoc.converter import FaultSpec
from faultfoc.errors import ConfigError

from conftest import (F_SW, L_S, OMEGA_DEMO, PSI_PM, R_S, U_DC, base_config)

PHI0_DEMO = math.radians(197.0)


def test_tune_magnitude_optimum_example():
    k_p, k_i = tune_magnitude_optimum(L_S, R_S, F_SW)
    assert k_p == L_S * F_SW / 3.0
    assert k_i == R_S * F_SW / 3.0
    assert k_p == pytest.approx(8.9333, abs=5e-4)
    assert k_i == pytest.approx(293.3333, abs=5e-4)


def test_pi_step_outputs_before_integrating():
    cfg = ControllerConfig(2.0, 100.0, 2.0, 100.0, F_SW)
    st = ControllerState()
    u_d, u_q, st = pi_step(cfg, st, 1.0, 1.0, True)
    assert u_d == pytest.approx(2.0, abs=0.0)   # integral still empty
    assert st.xi_d == pytest.approx(cfg.t_sw, rel=1e-15)
    u_d, u_q, st = pi_step(cfg, st, 1.0, 1.0, True)
    assert u_d == pytest.approx(2.0 + 100.0 * 1.25e-4, rel=1e-12)
    assert st.xi_d == pytest.approx(2.5e-4, rel=1e-12)
    assert st.xi_q == pytest.approx(2.5e-4, rel=1e-12)


def test_pi_step_freeze_keeps_integral():
    cfg = ControllerConfig(2.0, 100.0, 2.0, 100.0, F_SW)
    st = ControllerState(xi_d=0.5, xi_q=-0.5)
    u_d, u_q, st2 = pi_step(cfg, st, 3.0, -3.0, False)
    assert u_d == pytest.approx(2.0 * 3.0 + 100.0 * 0.5, rel=1e-12)
    assert st2.xi_d == st.xi_d and st2.xi_q == st.xi_q


def test_anti_windup_standard_follows_saturation():
    cfg = ControllerConfig(1.0, 1.0, 1.0, 1.0, F_SW)
    assert anti_windup_decide(cfg, 100.0, 200.0, 0.0) is True
    assert anti_windup_decide(cfg, 300.0, 200.0, 0.0) is False


def test_anti_windup_extended_upper_gates_on_current():
    cfg = ControllerConfig(1.0, 1.0, 1.0, 1.0, F_SW, anti_windup="extended",
                           aw_fault=FaultSpec("upper", "a"), i_aw_max=-1.0)
    # integrates only while the faulted leg conducts through the healthy
    # lower switch, i.e. current clearly negative
    assert anti_windup_decide(cfg, 0.0, 1.0, -2.0) is True
    assert anti_windup_decide(cfg, 0.0, 1.0, 0.0) is False
    assert anti_windup_decide(cfg, 0.0, 1.0, -1.0) is False   # boundary
    assert anti_windup_decide(cfg, 2.0, 1.0, -2.0) is False   # saturation wins


def test_anti_windup_extended_lower_mirrors():
    cfg = ControllerConfig(1.0, 1.0, 1.0, 1.0, F_SW, anti_windup="extended",
                           aw_fault=FaultSpec("lower", "b"), i_aw_max=-1.0)
    assert anti_windup_decide(cfg, 0.0, 1.0, 2.0) is True
    assert anti_windup_decide(cfg, 0.0, 1.0, 0.0) is False
    assert anti_windup_decide(cfg, 0.0, 1.0, 1.0) is False


def test_controller_config_validation():
    with pytest.raises(ConfigError):
        ControllerConfig(1.0, 1.0, 1.0, 1.0, 0.0)
    with pytest.raises(ConfigError):
        ControllerConfig(1.0, 1.0, 1.0, 1.0, F_SW, anti_windup="bogus")
    with pytest.raises(ConfigError):
        ControllerConfig(1.0, 1.0, 1.0, 1.0, F_SW, i_aw_max=0.5)
    with pytest.raises(ConfigError):
        ControllerConfig(1.0, 1.0, 1.0, 1.0, F_SW, anti_windup="extended")
    with pytest.raises(ConfigError):
        ControllerConfig(1.0, 1.0, 1.0, 1.0, F_SW, anti_windup="extended",
                         aw_fault=FaultSpec.none())


def test_cross_coupling_comp_formula(machine):
    omega_k = 157.08
    comp = cross_coupling_comp(machine, (4.0, -20.0), omega_k)
    assert comp[0] == pytest.approx(omega_k * machine.l_s * -20.0, rel=1e-12)
    assert comp[1] == pytest.approx(-omega_k * machine.l_s * 4.0
                                    - omega_k * machine.psi_pm, rel=1e-12)


def test_saturate_reference_passes_inside():
    u = np.array([100.0, 50.0])
    u_sat, u_hat, limit, saturated = saturate_reference(u, U_DC)
    assert not saturated
    assert np.array_equal(u_sat, u)
    assert u_hat == pytest.approx(math.hypot(100.0, 50.0), rel=1e-15)
    assert limit > u_hat


def test_saturate_reference_clips_keeping_direction():
    u = np.array([700.0, 100.0])
    u_sat, u_hat, limit, saturated = saturate_reference(u, U_DC)
    assert saturated
    assert math.hypot(*u_sat) == pytest.approx(limit, rel=1e-12)
    # direction preserved: no rotation, positive projection
    cross = u[0] * u_sat[1] - u[1] * u_sat[0]
    assert abs(cross) < 1e-9 * u_hat * limit
    assert float(u @ u_sat) > 0.0


def test_saturate_reference_zero_vector():
    u_sat, u_hat, limit, saturated = saturate_reference((0.0, 0.0), U_DC)
    assert not saturated
    assert u_hat == 0.0
    assert np.array_equal(u_sat, np.zeros(2))


def test_d_current_reference_matches_frozen_value(machine):
    i_d, clamped = d_current_reference(machine, -20.0, OMEGA_DEMO, PHI0_DEMO)
    assert not clamped
    assert i_d == pytest.approx(-10.683137763979438, abs=1e-12)


def test_d_current_reference_matches_polynomial_roots(machine):
    # oracle: i_d is a root of x^2 + (psi/L) x + (i_q^2 - (psi/L) i_q tan)
    # and of the two real roots the one smaller in magnitude
    ratio = machine.psi_pm / machine.l_s
    rng = np.random.default_rng(17)
    checked = 0
    for _ in range(1000):
        i_q = rng.uniform(-40.0, -1.0)
        phi0 = math.radians(rng.uniform(120.0, 250.0))
        coeffs = [1.0, ratio, i_q * i_q - ratio * i_q * math.tan(phi0)]
        i_d, clamped = d_current_reference(machine, i_q, OMEGA_DEMO, phi0)
        if clamped:
            assert i_d == pytest.approx(-ratio / 2.0, rel=1e-12)
            continue
        roots = np.roots(coeffs)
        residual = abs(i_d * i_d + ratio * i_d + coeffs[2])
        assert residual < 1e-9 * max(1.0, abs(coeffs[2]))
        assert abs(i_d) <= min(abs(r) for r in roots) + 1e-9
        checked += 1
    assert checked > 500


def test_d_current_reference_clamps_unreachable_angle(machine):
    i_d, clamped = d_current_reference(machine, -100.0, OMEGA_DEMO,
                                       math.radians(180.0))
    assert clamped
    assert i_d == pytest.approx(-PSI_PM / (2.0 * L_S), rel=1e-12)


def test_d_current_reference_rejects_quadrature_angles(machine):
    for phi0 in (math.pi / 2, 3 * math.pi / 2):
        with pytest.raises(ConfigError):
            d_current_reference(machine, -20.0, OMEGA_DEMO, phi0)


def test_d_current_reference_exact_mode(machine):
    with pytest.raises(ConfigError):
        d_current_reference(machine, -20.0, 0.0, PHI0_DEMO, exact=True)
    i_q = -20.0
    i_d, clamped = d_current_reference(machine, i_q, OMEGA_DEMO, PHI0_DEMO,
                                       exact=True)
    assert not clamped
    a = machine.n_p * OMEGA_DEMO * machine.psi_pm
    d = machine.n_p * OMEGA_DEMO * machine.l_s - machine.r_s * math.tan(PHI0_DEMO)
    c = i_q * i_q - (a / d) * i_q * math.tan(PHI0_DEMO)
    residual = abs(i_d * i_d + (a / d) * i_d + c)
    assert residual < 1e-9 * max(1.0, abs(c))
    # resistive correction is a small shift relative to the simple form
    i_d_simple, _ = d_current_reference(machine, i_q, OMEGA_DEMO, PHI0_DEMO)
    assert abs(i_d - i_d_simple) < 1.0


def test_integrator_freeze_lags_one_period(machine, controller_cfg):
    # a set-point far beyond the voltage limit saturates immediately, but
    # the freeze decision only sees it one period later
    st = ControllerState()
    out1, st = controller_step(controller_cfg, machine, st, np.zeros(3),
                               OMEGA_DEMO, 0.0, U_DC, 0.0, -500.0)
    assert out1.integrating is True
    assert out1.saturated is True
    out2, st = controller_step(controller_cfg, machine, st, np.zeros(3),
                               OMEGA_DEMO, 0.0, U_DC, 0.0, -500.0)
    assert out2.integrating is False


def test_extended_mode_first_period_gates_on_current(machine, controller_cfg):
    ctl = replace(controller_cfg, anti_windup="extended",
                  aw_fault=FaultSpec("upper", "a"), i_aw_max=-1.0)
    st = ControllerState()
    out, _ = controller_step(ctl, machine, st, np.zeros(3), OMEGA_DEMO, 0.0,
                             U_DC, 0.0, -5.0)
    assert out.integrating is False    # watched current 0 not below -1
    out, _ = controller_step(ctl, machine, ControllerState(),
                             np.array([-3.0, 1.5, 1.5]), OMEGA_DEMO, 0.0,
                             U_DC, 0.0, -5.0)
    assert out.integrating is True


def test_controller_step_reports_injection_setpoint(machine, controller_cfg):
    ctl = replace(controller_cfg, injection_on=True, injection_phi0=PHI0_DEMO)
    out, _ = controller_step(ctl, machine, ControllerState(), np.zeros(3),
                             OMEGA_DEMO, 0.0, U_DC, 0.0, -20.0)
    assert out.i_d_ref == pytest.approx(-10.683137763979438, abs=1e-12)
    assert out.injection_clamped is False


def test_closed_loop_injection_realizes_angle(machine, controller_cfg):
    # after settling, the fundamental voltage reference leads the current
    # by the commanded displacement angle
    ctl = replace(controller_cfg, injection_on=True, injection_phi0=PHI0_DEMO)
    cfg = base_config(machine, ctl, 0.3)
    trace = ff.run(cfg)
    fs = 1.0 / cfg.h
    f_fund = machine.n_p * OMEGA_DEMO / (2.0 * math.pi)
    tail = slice(len(trace) - 240000, len(trace))   # six fundamentals
    clarke_rows = (2.0 / 3.0) * np.array([[1.0, -0.5, -0.5],
                                          [0.0, math.sqrt(3) / 2,
                                           -math.sqrt(3) / 2]])
    i_s = trace.i_abc[tail] @ clarke_rows.T
    u_ph = ff.vector_phasor(trace.u_ref_s[tail], fs, f_fund)
    i_ph = ff.vector_phasor(i_s, fs, f_fund)
    angle = (np.angle(u_ph) - np.angle(i_ph)) % (2.0 * math.pi)
    assert math.degrees(angle) == pytest.approx(197.0, abs=5.0)
    # independent route: mean rotating-frame quantities give the same
    # active/reactive split
    theta = machine.n_p * OMEGA_DEMO * trace.t[tail]   # locked speed
    u_a, u_b = trace.u_ref_s[tail, 0], trace.u_ref_s[tail, 1]
    u_dq_mean = (np.mean(np.cos(theta) * u_a + np.sin(theta) * u_b),
                 np.mean(-np.sin(theta) * u_a + np.cos(theta) * u_b))
    i_dq_mean = trace.i_dq[tail].mean(axis=0)
    p, q = ff.power_pq(u_dq_mean, i_dq_mean)
    assert q == pytest.approx(p * math.tan(PHI0_DEMO), rel=0.02)
