"""Permanent-magnet synchronous machine in phase coordinates.

The stator is a symmetric three-phase winding with constant self and
mutual inductances and a sinusoidally distributed magnet flux.  The
electrical state is integrated directly in phase coordinates so that a
converter fault acting on one leg hits exactly one machine terminal; no
rotating-frame approximation is baked into the plant.

With the magnet flux linkage psi_k = psi_pm * cos(n_p (phi_m + phi_pm)
- k 2pi/3), the voltage equation per phase is

    u = R_s i + L di/dt + d(psi)/dt,

so the induced term enters the current derivative with a plus sign:
di/dt = L^-1 (u - R_s i + e), e_k = n_p w_m psi_pm sin(...).
"""

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

_TWO_THIRDS_PI = 2.0 * math.pi / 3.0


@dataclass(frozen=True)
class MachineParams:
    r_s: float            # stator resistance, ohm
    l_s_m: float          # main (mutual-coupled) inductance, H
    l_s_sigma: float      # leakage inductance, H
    psi_pm: float         # magnet flux linkage amplitude, V s
    n_p: int              # pole pair count
    theta_total: float    # rotor plus drive train inertia, kg m^2
    phi_pm: float = 0.0   # magnet axis offset from mechanical zero, rad

    def __post_init__(self):
        if self.r_s < 0.0:
            raise ConfigError("stator resistance must be non-negative")
        if self.l_s_m <= 0.0:
            raise ConfigError("main inductance must be positive")
        if self.l_s_sigma <= 0.0:
            # l_s_sigma == 0 would make the inductance matrix singular
            raise ConfigError("leakage inductance must be strictly positive")
        if self.psi_pm <= 0.0:
            raise ConfigError("magnet flux linkage must be positive")
        if self.n_p < 1:
            raise ConfigError("pole pair count must be at least 1")
        if self.theta_total <= 0.0:
            raise ConfigError("inertia must be positive")

    @property
    def l_s(self) -> float:
        """Synchronous inductance seen in the rotating frame."""
        return 1.5 * self.l_s_m + self.l_s_sigma

    @classmethod
    def from_synchronous(cls, r_s: float, l_s: float, psi_pm: float, n_p: int,
                         theta_total: float, phi_pm: float = 0.0,
                         leakage_fraction: float = 0.1) -> "MachineParams":
        """Build params from the synchronous inductance.

        Datasheets usually quote only l_s = 1.5 l_s_m + l_s_sigma; the
        split is not observable from balanced terminal behaviour, so a
        configurable leakage fraction (default 10 percent) fixes it.
        """
        if not 0.0 < leakage_fraction < 1.0:
            raise ConfigError("leakage fraction must be inside (0, 1)")
        l_sigma = leakage_fraction * l_s
        l_m = (l_s - l_sigma) * (2.0 / 3.0)
        return cls(r_s, l_m, l_sigma, psi_pm, n_p, theta_total, phi_pm)


@dataclass
class MachineState:
    i_abc: np.ndarray = field(default_factory=lambda: np.zeros(3))
    omega_m: float = 0.0   # mechanical angular velocity, rad/s
    phi_m: float = 0.0     # mechanical rotor angle, rad

    def copy(self) -> "MachineState":
        return MachineState(self.i_abc.copy(), self.omega_m, self.phi_m)


def inductance_matrix(p: MachineParams) -> np.ndarray:
    l_d = p.l_s_m + p.l_s_sigma
    l_o = -0.5 * p.l_s_m
    return np.array([[l_d, l_o, l_o],
                     [l_o, l_d, l_o],
                     [l_o, l_o, l_d]])


@functools.lru_cache(maxsize=None)
def inductance_inverse(p: MachineParams) -> np.ndarray:
    """Inverse of the phase inductance matrix, computed once per params."""
    return np.linalg.inv(inductance_matrix(p))


def back_emf(p: MachineParams, omega_m: float, phi_m: float) -> np.ndarray:
    """Induced voltage term per phase (the +e in di/dt = L^-1(u - Ri + e))."""
    el = p.n_p * (phi_m + p.phi_pm)
    amp = p.n_p * omega_m * p.psi_pm
    return amp * np.array([math.sin(el),
                           math.sin(el - _TWO_THIRDS_PI),
                           math.sin(el + _TWO_THIRDS_PI)])


def electrical_derivative(p: MachineParams, state: MachineState,
                          u_abc) -> np.ndarray:
    """Rate of change of the phase currents for applied terminal voltages."""
    u = np.asarray(u_abc, dtype=float)
    e = back_emf(p, state.omega_m, state.phi_m)
    return inductance_inverse(p) @ (u - p.r_s * state.i_abc + e)


def torque_abc(p: MachineParams, i_abc, phi_m: float) -> float:
    """Air-gap torque from phase currents and rotor position."""
    el = p.n_p * (phi_m + p.phi_pm)
    i = np.asarray(i_abc, dtype=float)
    return -p.n_p * p.psi_pm * (
        i[0] * math.sin(el)
        + i[1] * math.sin(el - _TWO_THIRDS_PI)
        + i[2] * math.sin(el + _TWO_THIRDS_PI))


def torque_dq(p: MachineParams, i_dq) -> float:
    """Air-gap torque from rotating-frame currents (isotropic rotor)."""
    return 1.5 * p.n_p * p.psi_pm * float(np.asarray(i_dq)[1])


def mechanical_derivative(p: MachineParams, state: MachineState,
                          m_load: float) -> tuple[float, float]:
    """(d omega_m / dt, d phi_m / dt); m_load > 0 accelerates the shaft."""
    m_m = torque_abc(p, state.i_abc, state.phi_m)
    return (m_m + m_load) / p.theta_total, state.omega_m
