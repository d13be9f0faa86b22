"""Rotating-frame current control with converter-aware anti-windup.

PI current controllers in the rotating frame plus cancellation of the
speed-coupled voltage terms, direction-preserving saturation of the
stationary voltage reference against the sector-dependent limit, and
conditional integration.  The extended anti-windup mode additionally
freezes the integrators while the current of a faulted leg sits in the
range the broken switch cannot serve, which stops the controller from
accumulating error it has no actuation for.  An optional reactive
set-point moves the d-current so that a chosen displacement angle
between voltage reference and current is reached, shifting the current
vector into the part of the plane the faulted converter still covers.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .converter import FaultSpec
from .errors import ConfigError
from .frames import clarke, electrical_angle, inverse_park, park
from .modulation import ModulationMode, sector_and_theta, u_max
from .pmsm import MachineParams


def tune_magnitude_optimum(l_s: float, r_s: float, f_sw: float):
    """Magnitude-optimum PI gains for a plant delay of 1.5 periods.

    k_p = l_s f_sw / 3, k_i = r_s f_sw / 3 (same gains for both axes
    once the coupling terms are compensated).
    """
    return l_s * f_sw / 3.0, r_s * f_sw / 3.0


@dataclass(frozen=True)
class ControllerConfig:
    k_p_d: float             # V/A
    k_i_d: float             # V/(A s)
    k_p_q: float             # V/A
    k_i_q: float             # V/(A s)
    f_sw: float              # switching and control frequency, Hz
    anti_windup: str = "standard"        # "standard" | "extended"
    aw_fault: FaultSpec | None = None    # leg watched by the extended mode
    i_aw_max: float = -1.0               # A, threshold current, negative
    injection_on: bool = False
    injection_phi0: float = math.radians(197.0)  # target angle, rad
    injection_exact: bool = False        # keep resistive terms in the set-point
    modulation: ModulationMode = ModulationMode.SYMMETRIC

    def __post_init__(self):
        if self.f_sw <= 0.0:
            raise ConfigError("switching frequency must be positive")
        if self.anti_windup not in ("standard", "extended"):
            raise ConfigError(f"unknown anti-windup mode {self.anti_windup!r}")
        if self.i_aw_max >= 0.0:
            raise ConfigError("anti-windup current threshold must be negative")
        if self.anti_windup == "extended" and (
                self.aw_fault is None or not self.aw_fault.is_fault):
            raise ConfigError("extended anti-windup needs the faulted leg")

    @property
    def t_sw(self) -> float:
        return 1.0 / self.f_sw


@dataclass(frozen=True)
class ControllerState:
    xi_d: float = 0.0
    xi_q: float = 0.0
    # stationary-frame reference of the previous period, before
    # saturation; the integrate/freeze decision lags one period
    u_ref_prev: tuple[float, float] | None = None


@dataclass(frozen=True)
class ControlOutput:
    u_sat: np.ndarray        # stationary-frame reference sent to the modulator
    sector: int | None
    theta_local: float
    u_hat: float             # magnitude before saturation
    u_limit: float           # sector limit at this angle
    saturated: bool
    integrating: bool
    injection_clamped: bool
    i_d_ref: float           # set-points actually tracked this period
    i_q_ref: float
    mode: ModulationMode


def pi_step(cfg: ControllerConfig, st: ControllerState, e_d: float, e_q: float,
            integrate: bool):
    """One forward-Euler PI update; output uses the pre-update integrals."""
    u_d = cfg.k_p_d * e_d + cfg.k_i_d * st.xi_d
    u_q = cfg.k_p_q * e_q + cfg.k_i_q * st.xi_q
    if integrate:
        st = replace(st, xi_d=st.xi_d + e_d * cfg.t_sw,
                     xi_q=st.xi_q + e_q * cfg.t_sw)
    return u_d, u_q, st


def anti_windup_decide(cfg: ControllerConfig, u_hat_prev: float,
                       u_limit_prev: float, i_watched: float) -> bool:
    """Integrate this period?  Freeze on saturation, and in extended mode
    also while the watched leg current is outside what the broken switch
    can conduct (above i_aw_max for an upper fault, mirrored for lower)."""
    ok = u_hat_prev <= u_limit_prev
    if cfg.anti_windup == "extended":
        if cfg.aw_fault.side == "upper":
            ok = ok and i_watched < cfg.i_aw_max
        else:
            ok = ok and i_watched > -cfg.i_aw_max
    return ok


def cross_coupling_comp(p: MachineParams, i_dq, omega_k: float) -> np.ndarray:
    """Speed-coupled voltage terms; subtract from the PI output to decouple
    the axes (u_ref = u_pi - comp)."""
    i = np.asarray(i_dq, dtype=float)
    return np.array([omega_k * p.l_s * i[1],
                     -omega_k * p.l_s * i[0] - omega_k * p.psi_pm])


def saturate_reference(u_s, u_dc: float):
    """Clip a stationary reference to the sector limit, keeping direction.

    Returns (u_sat, u_hat, u_limit, saturated) with u_hat the magnitude
    before clipping and u_limit the admissible maximum at this angle.
    """
    u = np.asarray(u_s, dtype=float)
    sector, _, theta_local = sector_and_theta(u)
    u_hat = math.hypot(u[0], u[1])
    if sector is None:
        return u.copy(), 0.0, u_max(u_dc, 0.0), False
    limit = u_max(u_dc, theta_local)
    if u_hat > limit:
        return u * (limit / u_hat), u_hat, limit, True
    return u.copy(), u_hat, limit, False


def d_current_reference(p: MachineParams, i_q_ref: float, omega_m: float,
                        phi0: float, exact: bool = False):
    """d-axis set-point that realizes displacement angle phi0 in steady state.

    Solves the steady-state relation between active and reactive power
    for i_d given i_q; of the two roots the one closer to zero is
    returned (less copper loss for the same effect).  When the requested
    angle is unreachable at this q-current the discriminant goes
    negative; the set-point is then clamped to the vertex (the deepest
    useful injection) and flagged.

    Returns (i_d_ref, clamped).
    """
    tphi = math.tan(phi0)
    if not math.isfinite(tphi) or abs(math.cos(phi0)) < 1e-12:
        raise ConfigError("displacement angle too close to +-90 degrees")
    if exact:
        if omega_m == 0.0:
            raise ConfigError("exact set-point formula needs nonzero speed")
        a = p.n_p * omega_m * p.psi_pm
        d = p.n_p * omega_m * p.l_s - p.r_s * tphi
        if d == 0.0:
            raise ConfigError("degenerate operating point for the set-point formula")
        half = a / (2.0 * d)
        disc = half * half - i_q_ref * i_q_ref + (a / d) * i_q_ref * tphi
    else:
        # resistive terms dropped; speed cancels
        half = p.psi_pm / (2.0 * p.l_s)
        disc = half * half - i_q_ref * i_q_ref + (p.psi_pm / p.l_s) * i_q_ref * tphi
    if disc < 0.0:
        return -half, True
    return -half + math.sqrt(disc), False


def controller_step(cfg: ControllerConfig, p: MachineParams,
                    st: ControllerState, i_abc, omega_m: float, phi_m: float,
                    u_dc: float, i_d_ref: float, i_q_ref: float):
    """One control period: sample, set-point shaping, PI, decoupling,
    frame rotation, saturation.  Returns (ControlOutput, next state)."""
    phi_k = electrical_angle(p.n_p, phi_m, p.phi_pm)
    omega_k = p.n_p * omega_m
    i_dq = park(clarke(i_abc), phi_k)

    injection_clamped = False
    if cfg.injection_on:
        i_d_ref, injection_clamped = d_current_reference(
            p, i_q_ref, omega_m, cfg.injection_phi0, cfg.injection_exact)

    if st.u_ref_prev is None:
        integrating = True
        if cfg.anti_windup == "extended":
            i_watched = float(np.asarray(i_abc)[cfg.aw_fault.phase_index])
            integrating = anti_windup_decide(cfg, 0.0, 1.0, i_watched)
    else:
        _, _, theta_prev = sector_and_theta(st.u_ref_prev)
        u_hat_prev = math.hypot(*st.u_ref_prev)
        limit_prev = u_max(u_dc, theta_prev)
        i_watched = (float(np.asarray(i_abc)[cfg.aw_fault.phase_index])
                     if cfg.anti_windup == "extended" else 0.0)
        integrating = anti_windup_decide(cfg, u_hat_prev, limit_prev, i_watched)

    e_d = i_d_ref - i_dq[0]
    e_q = i_q_ref - i_dq[1]
    u_pi_d, u_pi_q, st = pi_step(cfg, st, e_d, e_q, integrating)
    comp = cross_coupling_comp(p, i_dq, omega_k)
    u_ref_s = inverse_park((u_pi_d - comp[0], u_pi_q - comp[1]), phi_k)
    u_sat, u_hat, limit, saturated = saturate_reference(u_ref_s, u_dc)
    sector, _, theta_local = sector_and_theta(u_sat)
    st = replace(st, u_ref_prev=(float(u_ref_s[0]), float(u_ref_s[1])))
    out = ControlOutput(u_sat=u_sat, sector=sector, theta_local=theta_local,
                        u_hat=u_hat, u_limit=limit, saturated=saturated,
                        integrating=integrating,
                        injection_clamped=injection_clamped,
                        i_d_ref=i_d_ref, i_q_ref=i_q_ref, mode=cfg.modulation)
    return out, st
