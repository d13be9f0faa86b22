"""Shared fixtures: the reference drive's datasheet values and small
prebuilt configurations."""

import math

import pytest

import faultfoc as ff

# reference drive datasheet
R_S = 0.11            # ohm
L_S = 3.35e-3         # H, synchronous
PSI_PM = 0.377        # V s
N_P = 3
INERTIA = 352e-4      # kg m^2
U_DC = 565.0          # V
F_SW = 8000.0         # Hz

# demonstration operating point (not a datasheet value)
OMEGA_DEMO = 52.36    # rad/s mechanical, 25 Hz electrical
I_Q_DEMO = -20.0      # A


@pytest.fixture(scope="session")
def machine() -> ff.MachineParams:
    return ff.MachineParams.from_synchronous(R_S, L_S, PSI_PM, N_P, INERTIA)


@pytest.fixture(scope="session")
def tuned_gains(machine):
    return ff.tune_magnitude_optimum(machine.l_s, machine.r_s, F_SW)


@pytest.fixture(scope="session")
def controller_cfg(tuned_gains) -> ff.ControllerConfig:
    k_p, k_i = tuned_gains
    return ff.ControllerConfig(k_p, k_i, k_p, k_i, F_SW)


def base_config(machine, controller, t_end, **kwargs) -> ff.SimConfig:
    kwargs.setdefault("load", ff.LoadModel("constant_speed", OMEGA_DEMO))
    kwargs.setdefault("u_dc", U_DC)
    kwargs.setdefault("i_d_ref", 0.0)
    kwargs.setdefault("i_q_ref", I_Q_DEMO)
    return ff.SimConfig(machine=machine, controller=controller, t_end=t_end,
                        **kwargs)
