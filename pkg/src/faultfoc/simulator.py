"""Closed-loop drive simulation on a fixed 1 us grid.

One switching period at a time: sample the state, run the current
controller, lay out the gate schedule, then integrate the plant across
the period with the converter output recomputed every grid step.  The
converter fault switches in at a configurable time and control features
(extended anti-windup, flat-top modulation, reactive current injection)
toggle along a scenario timeline, so a single run can walk through a
whole mitigation sequence.
"""

import hashlib
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import converter
from ._kernel import integrate_period
from .controller import ControllerConfig, ControllerState, controller_step
from .errors import ConfigError, SimulationDiverged
from .modulation import (ModulationMode, dwell_times, expand_to_grid,
                         gate_schedule)
from .pmsm import MachineParams, MachineState, inductance_inverse

FEATURES = ("extended_aw", "flat_top", "injection")


@dataclass(frozen=True)
class LoadModel:
    """Shaft-side behaviour: an infinitely stiff speed source, or a speed
    PI acting as the turbine-side governor."""

    kind: str                    # "constant_speed" | "speed_pi"
    omega_ref: float             # rad/s mechanical
    k_p: float = 0.0             # N m s/rad
    k_i: float = 0.0             # N m/rad
    m_max: float = math.inf      # torque clamp, N m

    def __post_init__(self):
        if self.kind not in ("constant_speed", "speed_pi"):
            raise ConfigError(f"unknown load kind {self.kind!r}")
        if self.kind == "speed_pi" and self.m_max <= 0.0:
            raise ConfigError("torque clamp must be positive")


@dataclass(frozen=True)
class FeatureEvent:
    t: float
    feature: str    # one of FEATURES
    enable: bool = True

    def __post_init__(self):
        if self.feature not in FEATURES:
            raise ConfigError(f"unknown feature {self.feature!r}")


@dataclass(frozen=True)
class SimConfig:
    machine: MachineParams
    controller: ControllerConfig
    load: LoadModel
    u_dc: float
    t_end: float
    h: float = 1e-6
    fault: converter.FaultSpec = field(default_factory=converter.FaultSpec.none)
    t_fault_on: float = 0.0
    timeline: tuple[FeatureEvent, ...] = ()
    i_d_ref: float = 0.0
    i_q_ref: float = 0.0
    eps_current: float = converter.EPS_CURRENT
    init: MachineState | None = None

    def __post_init__(self):
        if self.u_dc <= 0.0:
            raise ConfigError("DC-link voltage must be positive")
        if self.t_end < 0.0:
            raise ConfigError("end time must be non-negative")
        if self.h <= 0.0:
            raise ConfigError("step size must be positive")
        n = 1.0 / (self.controller.f_sw * self.h)
        if abs(n - round(n)) > 1e-6 or round(n) < 1:
            raise ConfigError(
                "step size must divide the switching period exactly "
                f"(1/(f_sw h) = {n:.6f})")
        for ev in self.timeline:
            if ev.feature == "extended_aw" and ev.enable and not self.fault.is_fault:
                raise ConfigError("extended anti-windup event needs a fault")

    @property
    def steps_per_period(self) -> int:
        return round(1.0 / (self.controller.f_sw * self.h))


@dataclass
class Trace:
    """Per-step simulation record.  Controller-period quantities (voltage
    reference, current set-points, flags) repeat across their period."""

    FLAG_SATURATED = 1
    FLAG_AW_FROZEN = 2
    FLAG_FAULT = 4

    t: np.ndarray
    i_abc: np.ndarray      # (n, 3)
    i_dq: np.ndarray       # (n, 2)
    i_dq_ref: np.ndarray   # (n, 2)
    u_abc: np.ndarray      # (n, 3) applied converter output
    u_ref_s: np.ndarray    # (n, 2) stationary-frame modulator request
    switch: np.ndarray     # (n, 3) int8 commanded switch states
    omega_m: np.ndarray
    m_m: np.ndarray
    m_load: np.ndarray
    flags: np.ndarray      # uint8 bit set

    CSV_HEADER = ("t,i_a,i_b,i_c,i_d,i_q,i_d_ref,i_q_ref,"
                  "u_ref_alpha,u_ref_beta,s_a,s_b,s_c,omega_m,m_m,flags")

    def __len__(self) -> int:
        return self.t.shape[0]

    def to_csv(self, path, decimate: int = 1) -> None:
        if decimate < 1:
            raise ConfigError("decimation factor must be >= 1")
        sl = slice(None, None, decimate)
        cols = (self.t[sl], self.i_abc[sl, 0], self.i_abc[sl, 1],
                self.i_abc[sl, 2], self.i_dq[sl, 0], self.i_dq[sl, 1],
                self.i_dq_ref[sl, 0], self.i_dq_ref[sl, 1],
                self.u_ref_s[sl, 0], self.u_ref_s[sl, 1])
        ints = (self.switch[sl, 0], self.switch[sl, 1], self.switch[sl, 2])
        with open(path, "w") as f:
            f.write(self.CSV_HEADER + "\n")
            om, mm, fl = self.omega_m[sl], self.m_m[sl], self.flags[sl]
            for k in range(cols[0].shape[0]):
                vals = [f"{c[k]:.10g}" for c in cols]
                vals += [str(int(c[k])) for c in ints]
                vals.append(f"{om[k]:.10g}")
                vals.append(f"{mm[k]:.10g}")
                vals.append(str(int(fl[k])))
                f.write(",".join(vals) + "\n")

    def sha256(self) -> str:
        digest = hashlib.sha256()
        for arr in (self.t, self.i_abc, self.i_dq, self.i_dq_ref, self.u_abc,
                    self.u_ref_s, self.switch, self.omega_m, self.m_m,
                    self.m_load, self.flags):
            digest.update(np.ascontiguousarray(arr).tobytes())
        return digest.hexdigest()


def _empty_trace(n: int, h: float) -> Trace:
    return Trace(t=np.arange(n) * h,
                 i_abc=np.zeros((n, 3)), i_dq=np.zeros((n, 2)),
                 i_dq_ref=np.zeros((n, 2)), u_abc=np.zeros((n, 3)),
                 u_ref_s=np.zeros((n, 2)), switch=np.zeros((n, 3), np.int8),
                 omega_m=np.zeros(n), m_m=np.zeros(n), m_load=np.zeros(n),
                 flags=np.zeros(n, np.uint8))


def _fault_matrices(fault: converter.FaultSpec):
    """(sign-indexed matrix stack, negated-selector flag, fault index)."""
    if not fault.is_fault:
        healthy = np.stack([converter.HEALTHY] * 3)
        return np.ascontiguousarray(healthy), False, -1
    mats = np.stack([converter.SWITCHING_MATRICES[(fault.side, fault.phase, s)]
                     for s in (-1, 0, 1)])
    return np.ascontiguousarray(mats), fault.side == "lower", fault.phase_index


def _apply_feature(ctl: ControllerConfig, cfg: SimConfig,
                   ev: FeatureEvent) -> ControllerConfig:
    if ev.feature == "extended_aw":
        if ev.enable:
            return replace(ctl, anti_windup="extended", aw_fault=cfg.fault)
        return replace(ctl, anti_windup="standard")
    if ev.feature == "flat_top":
        if not ev.enable:
            return replace(ctl, modulation=ModulationMode.SYMMETRIC)
        if cfg.fault.is_fault and cfg.fault.side == "lower":
            mode = ModulationMode.FLAT_TOP_HIGH
        else:
            mode = ModulationMode.FLAT_TOP_LOW
        return replace(ctl, modulation=mode)
    return replace(ctl, injection_on=ev.enable)


def run(cfg: SimConfig) -> Trace:
    p = cfg.machine
    spp = cfg.steps_per_period
    t_sw = cfg.controller.t_sw
    n_periods = int(round(cfg.t_end / cfg.h)) // spp
    n = n_periods * spp
    trace = _empty_trace(n, cfg.h)
    if n == 0:
        return trace

    if cfg.init is not None:
        state = cfg.init.copy()
    else:
        state = MachineState()
    lock = cfg.load.kind == "constant_speed"
    if cfg.init is None:
        state.omega_m = cfg.load.omega_ref
    y = np.array([state.i_abc[0], state.i_abc[1], state.i_abc[2],
                  state.omega_m, state.phi_m], dtype=float)

    l_inv = np.ascontiguousarray(inductance_inverse(p))
    healthy = _fault_matrices(converter.FaultSpec.none())
    faulted = _fault_matrices(cfg.fault) if cfg.fault.is_fault else healthy

    events = sorted(cfg.timeline, key=lambda e: e.t)
    ev_idx = 0
    ctl = cfg.controller
    cst = ControllerState()
    xi_load = 0.0

    for per in range(n_periods):
        t0 = per * spp * cfg.h
        while ev_idx < len(events) and events[ev_idx].t <= t0 + 1e-12:
            ctl = _apply_feature(ctl, cfg, events[ev_idx])
            ev_idx += 1
        fault_active = cfg.fault.is_fault and t0 >= cfg.t_fault_on - 1e-12

        out, cst = controller_step(ctl, p, cst, y[0:3], y[3], y[4],
                                   cfg.u_dc, cfg.i_d_ref, cfg.i_q_ref)
        t1, t2, t0z, _ = dwell_times(out.u_sat, cfg.u_dc, t_sw)
        sched = gate_schedule(t1, t2, t0z, out.sector, out.mode, t_sw)
        steps = expand_to_grid(sched, cfg.h)

        if cfg.load.kind == "speed_pi":
            e_w = cfg.load.omega_ref - y[3]
            m_load = cfg.load.k_p * e_w + cfg.load.k_i * xi_load
            if abs(m_load) > cfg.load.m_max:
                m_load = math.copysign(cfg.load.m_max, m_load)
            else:
                xi_load += e_w * t_sw
        else:
            m_load = 0.0

        mats, negate, fidx = faulted if fault_active else healthy
        row0 = per * spp
        integrate_period(y, steps, negate, mats, fidx, cfg.eps_current,
                         cfg.u_dc, l_inv, p.r_s, p.n_p, p.psi_pm, p.phi_pm,
                         p.theta_total, m_load, lock, cfg.h, row0,
                         trace.i_abc, trace.i_dq, trace.u_abc, trace.omega_m,
                         trace.m_m, trace.m_load)
        if not (math.isfinite(y[0]) and math.isfinite(y[1])
                and math.isfinite(y[2]) and math.isfinite(y[3])
                and math.isfinite(y[4])):
            raise SimulationDiverged((per + 1) * spp * cfg.h, per * spp * cfg.h)

        rows = slice(row0, row0 + spp)
        trace.switch[rows] = steps
        trace.u_ref_s[rows, 0] = out.u_sat[0]
        trace.u_ref_s[rows, 1] = out.u_sat[1]
        trace.i_dq_ref[rows, 0] = out.i_d_ref
        trace.i_dq_ref[rows, 1] = out.i_q_ref
        flag = 0
        if out.saturated:
            flag |= Trace.FLAG_SATURATED
        if not out.integrating:
            flag |= Trace.FLAG_AW_FROZEN
        if fault_active:
            flag |= Trace.FLAG_FAULT
        trace.flags[rows] = flag

    return trace


def e3_timeline(t_fault: float, t_extended_aw: float, t_flat_top: float,
                t_injection: float) -> tuple[FeatureEvent, ...]:
    """The standard mitigation walk-through: fault first, then one feature
    switched in at a time."""
    if not 0.0 < t_fault < t_extended_aw < t_flat_top < t_injection:
        raise ConfigError("mitigation sequence times must be increasing")
    return (FeatureEvent(t_extended_aw, "extended_aw"),
            FeatureEvent(t_flat_top, "flat_top"),
            FeatureEvent(t_injection, "injection"))


def e3_intervals(cfg: SimConfig) -> list[tuple[str, float, float]]:
    """Interval labels and bounds of a five-interval mitigation sequence.

    The scenario must carry a fault switching in after a healthy lead-in
    and exactly three enable events (extended anti-windup, flat-top,
    injection) in that order; anything else raises ConfigError.
    """
    if not cfg.fault.is_fault or cfg.t_fault_on <= 0.0:
        raise ConfigError("sequence needs a fault after a healthy lead-in")
    enables = [ev for ev in sorted(cfg.timeline, key=lambda e: e.t) if ev.enable]
    order = [ev.feature for ev in enables]
    if order != ["extended_aw", "flat_top", "injection"]:
        raise ConfigError(
            "sequence timeline must enable extended_aw, flat_top, injection "
            f"in that order, got {order}")
    times = [cfg.t_fault_on] + [ev.t for ev in enables]
    if not all(a < b for a, b in zip(times, times[1:])):
        raise ConfigError("sequence events must be strictly ordered")
    if times[-1] >= cfg.t_end:
        raise ConfigError("sequence must leave room after the last event")
    bounds = [0.0] + times + [cfg.t_end]
    labels = ("healthy", "fault", "fault+extended_aw",
              "fault+extended_aw+flat_top",
              "fault+extended_aw+flat_top+injection")
    return [(lab, bounds[k], bounds[k + 1]) for k, lab in enumerate(labels)]


def run_scenario_e3(cfg: SimConfig):
    """Run a five-interval mitigation sequence.

    Returns (trace, intervals) where intervals is a list of
    (label, t_start, t_end) per e3_intervals.
    """
    intervals = e3_intervals(cfg)
    return run(cfg), intervals
