"""Scenario files: INI documents describing one complete run.

A scenario pins every physical and control parameter of a simulation in
one flat text file.  Keys carry their unit in the name, unknown keys and
sections are rejected, and a parsed configuration can be serialized back
to an equivalent file (load -> dump -> load is the identity).
"""

import configparser
import math

from .controller import ControllerConfig, tune_magnitude_optimum
from .converter import EPS_CURRENT, FaultSpec
from .errors import ScenarioError
from .modulation import ModulationMode
from .pmsm import MachineParams
from .simulator import FeatureEvent, LoadModel, SimConfig

_MODULATION_NAMES = {
    "symmetric": ModulationMode.SYMMETRIC,
    "flat_top_low": ModulationMode.FLAT_TOP_LOW,
    "flat_top_high": ModulationMode.FLAT_TOP_HIGH,
}

_SCHEMA = {
    "simulation": ("t_end_seconds", "h_seconds"),
    "machine": ("r_s_ohms", "l_s_henry", "leakage_fraction", "l_s_m_henry",
                "l_s_sigma_henry", "psi_pm_volt_seconds", "pole_pairs",
                "inertia_kg_m2", "magnet_offset_rad"),
    "converter": ("u_dc_volts", "f_sw_hertz", "eps_current_amps"),
    "controller": ("k_p_volts_per_amp", "k_i_volts_per_amp_second",
                   "anti_windup", "i_aw_max_amps", "modulation", "injection",
                   "injection_phi0_deg", "injection_exact"),
    "references": ("i_d_ref_amps", "i_q_ref_amps"),
    "fault": ("switch", "t_on_seconds"),
    "load": ("mode", "omega_ref_rad_per_second", "k_p_newton_metre_seconds",
             "k_i_newton_metres", "m_max_newton_metres"),
    "timeline": ("events",),
}

_REQUIRED = object()


class _Section:
    """One INI section with typed, consume-once key access."""

    def __init__(self, name: str, mapping):
        self.name = name
        self._kv = dict(mapping)

    def __contains__(self, key: str) -> bool:
        return key in self._kv

    def _raw(self, key: str, default):
        if key in self._kv:
            return self._kv.pop(key)
        if default is _REQUIRED:
            raise ScenarioError(f"[{self.name}] is missing required key {key!r}")
        return None

    def take_str(self, key: str, default=_REQUIRED):
        raw = self._raw(key, default)
        return default if raw is None else raw.strip()

    def take_float(self, key: str, default=_REQUIRED):
        raw = self._raw(key, default)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise ScenarioError(
                f"[{self.name}] {key} = {raw!r} is not a number") from None

    def take_int(self, key: str, default=_REQUIRED):
        raw = self._raw(key, default)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise ScenarioError(
                f"[{self.name}] {key} = {raw!r} is not an integer") from None

    def take_bool(self, key: str, default=_REQUIRED):
        raw = self._raw(key, default)
        if raw is None:
            return default
        states = configparser.ConfigParser.BOOLEAN_STATES
        try:
            return states[raw.strip().lower()]
        except KeyError:
            raise ScenarioError(
                f"[{self.name}] {key} = {raw!r} is not on/off") from None

    def finish(self) -> None:
        for key in self._kv:
            raise ScenarioError(f"unknown key {key!r} in section [{self.name}]")


def _split_sections(text: str, source: str) -> dict[str, _Section]:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ScenarioError(f"cannot parse scenario: {exc}") from None
    if parser.defaults():
        raise ScenarioError("scenario files do not support a [DEFAULT] section")
    sections = {}
    for name in parser.sections():
        if name not in _SCHEMA:
            raise ScenarioError(f"unknown section [{name}]")
        sections[name] = _Section(name, parser.items(name))
    return sections


def _machine_from(sec: _Section) -> MachineParams:
    r_s = sec.take_float("r_s_ohms")
    psi = sec.take_float("psi_pm_volt_seconds")
    n_p = sec.take_int("pole_pairs")
    theta = sec.take_float("inertia_kg_m2")
    phi_pm = sec.take_float("magnet_offset_rad", 0.0)
    has_sync = "l_s_henry" in sec
    has_split = "l_s_m_henry" in sec or "l_s_sigma_henry" in sec
    if has_sync and has_split:
        raise ScenarioError(
            "[machine] give either l_s_henry (synchronous value) or the "
            "explicit l_s_m_henry/l_s_sigma_henry split, not both")
    if has_split:
        if "leakage_fraction" in sec:
            raise ScenarioError(
                "[machine] leakage_fraction only applies to l_s_henry")
        l_m = sec.take_float("l_s_m_henry")
        l_sigma = sec.take_float("l_s_sigma_henry")
        sec.finish()
        return MachineParams(r_s, l_m, l_sigma, psi, n_p, theta, phi_pm)
    l_s = sec.take_float("l_s_henry")
    frac = sec.take_float("leakage_fraction", 0.1)
    sec.finish()
    return MachineParams.from_synchronous(r_s, l_s, psi, n_p, theta,
                                          phi_pm, frac)


def _controller_from(sec: _Section, machine: MachineParams, f_sw: float,
                     fault: FaultSpec) -> ControllerConfig:
    has_kp = "k_p_volts_per_amp" in sec
    has_ki = "k_i_volts_per_amp_second" in sec
    if has_kp != has_ki:
        raise ScenarioError("[controller] give both gains or neither "
                            "(omitting them selects magnitude-optimum tuning)")
    if has_kp:
        k_p = sec.take_float("k_p_volts_per_amp")
        k_i = sec.take_float("k_i_volts_per_amp_second")
    else:
        k_p, k_i = tune_magnitude_optimum(machine.l_s, machine.r_s, f_sw)

    aw = sec.take_str("anti_windup", "standard")
    if aw not in ("standard", "extended"):
        raise ScenarioError(f"[controller] unknown anti_windup mode {aw!r}")
    if aw == "extended" and not fault.is_fault:
        raise ScenarioError(
            "[controller] anti_windup = extended needs a fault switch")

    mod_name = sec.take_str("modulation", "symmetric")
    if mod_name == "flat_top":
        # convenience spelling: pick the single zero state away from the
        # broken switch (same rule the feature timeline applies)
        if fault.is_fault and fault.side == "lower":
            mode = ModulationMode.FLAT_TOP_HIGH
        else:
            mode = ModulationMode.FLAT_TOP_LOW
    elif mod_name in _MODULATION_NAMES:
        mode = _MODULATION_NAMES[mod_name]
    else:
        raise ScenarioError(f"[controller] unknown modulation {mod_name!r}")

    i_aw_max = sec.take_float("i_aw_max_amps", -1.0)
    injection_on = sec.take_bool("injection", False)
    phi0 = math.radians(sec.take_float("injection_phi0_deg", 197.0))
    injection_exact = sec.take_bool("injection_exact", False)
    sec.finish()
    return ControllerConfig(
        k_p_d=k_p, k_i_d=k_i, k_p_q=k_p, k_i_q=k_i, f_sw=f_sw,
        anti_windup=aw,
        aw_fault=fault if aw == "extended" else None,
        i_aw_max=i_aw_max,
        injection_on=injection_on,
        injection_phi0=phi0,
        injection_exact=injection_exact,
        modulation=mode)


def _load_from(sec: _Section) -> LoadModel:
    mode = sec.take_str("mode")
    if mode not in ("constant_speed", "speed_pi"):
        raise ScenarioError(f"[load] unknown mode {mode!r}")
    omega = sec.take_float("omega_ref_rad_per_second")
    if mode == "constant_speed":
        for key in ("k_p_newton_metre_seconds", "k_i_newton_metres",
                    "m_max_newton_metres"):
            if key in sec:
                raise ScenarioError(f"[load] {key} only applies to speed_pi")
        sec.finish()
        return LoadModel("constant_speed", omega)
    k_p = sec.take_float("k_p_newton_metre_seconds", 0.0)
    k_i = sec.take_float("k_i_newton_metres", 0.0)
    m_max = sec.take_float("m_max_newton_metres", math.inf)
    sec.finish()
    return LoadModel("speed_pi", omega, k_p=k_p, k_i=k_i, m_max=m_max)


def _timeline_from(sec: _Section) -> tuple[FeatureEvent, ...]:
    events = []
    for line in sec.take_str("events", "").splitlines():
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ScenarioError(
                f"[timeline] event {line!r} must be '<t> <feature> [on|off]'")
        try:
            t = float(parts[0])
        except ValueError:
            raise ScenarioError(
                f"[timeline] event time {parts[0]!r} is not a number") from None
        enable = True
        if len(parts) == 3:
            if parts[2] not in ("on", "off"):
                raise ScenarioError(
                    f"[timeline] event state {parts[2]!r} must be on or off")
            enable = parts[2] == "on"
        events.append(FeatureEvent(t, parts[1], enable))
    sec.finish()
    return tuple(events)


def parse_scenario(text: str, source: str = "<string>") -> SimConfig:
    """Build a SimConfig from scenario file text."""
    sections = _split_sections(text, source)

    def section(name: str) -> _Section:
        return sections.pop(name, _Section(name, {}))

    for name in ("simulation", "machine", "converter", "load"):
        if name not in sections:
            raise ScenarioError(f"missing required section [{name}]")

    sim = section("simulation")
    t_end = sim.take_float("t_end_seconds")
    h = sim.take_float("h_seconds", 1e-6)

    machine = _machine_from(section("machine"))

    conv = section("converter")
    u_dc = conv.take_float("u_dc_volts")
    f_sw = conv.take_float("f_sw_hertz")
    eps_i = conv.take_float("eps_current_amps", EPS_CURRENT)

    flt = section("fault")
    fault = FaultSpec.parse(flt.take_str("switch", "none"))
    t_fault_on = flt.take_float("t_on_seconds", 0.0)

    controller = _controller_from(section("controller"), machine, f_sw, fault)
    load = _load_from(section("load"))
    timeline = _timeline_from(section("timeline"))

    refs = section("references")
    i_d_ref = refs.take_float("i_d_ref_amps", 0.0)
    i_q_ref = refs.take_float("i_q_ref_amps", 0.0)

    for sec in (sim, conv, flt, refs):
        sec.finish()
    return SimConfig(machine=machine, controller=controller, load=load,
                     u_dc=u_dc, t_end=t_end, h=h, fault=fault,
                     t_fault_on=t_fault_on, timeline=timeline,
                     i_d_ref=i_d_ref, i_q_ref=i_q_ref, eps_current=eps_i)


def load_scenario(path) -> SimConfig:
    """Read and parse a scenario file."""
    with open(path) as f:
        return parse_scenario(f.read(), source=str(path))


def _exact_degrees(rad: float) -> float:
    """Degrees value that parses back to exactly this radians value."""
    deg = math.degrees(rad)
    if math.radians(deg) == rad:
        return deg
    for cand in (math.nextafter(deg, -math.inf), math.nextafter(deg, math.inf)):
        if math.radians(cand) == rad:
            return cand
    return deg


def dump_scenario(cfg: SimConfig) -> str:
    """Serialize a SimConfig back to scenario file text.

    The output parses to an equal SimConfig.  Configurations the format
    cannot express (per-axis gains, explicit initial state, an
    anti-windup leg other than the fault) are rejected.
    """
    ctl = cfg.controller
    if ctl.k_p_d != ctl.k_p_q or ctl.k_i_d != ctl.k_i_q:
        raise ScenarioError("scenario files hold one gain pair for both axes")
    if ctl.anti_windup == "extended" and ctl.aw_fault != cfg.fault:
        raise ScenarioError("scenario files tie the anti-windup leg to the "
                            "fault switch")
    if cfg.init is not None:
        raise ScenarioError("scenario files cannot express an initial state")
    mod_name = {v: k for k, v in _MODULATION_NAMES.items()}[ctl.modulation]
    p = cfg.machine

    lines = [
        "[simulation]",
        f"t_end_seconds = {cfg.t_end!r}",
        f"h_seconds = {cfg.h!r}",
        "",
        "[machine]",
        f"r_s_ohms = {p.r_s!r}",
        f"l_s_m_henry = {p.l_s_m!r}",
        f"l_s_sigma_henry = {p.l_s_sigma!r}",
        f"psi_pm_volt_seconds = {p.psi_pm!r}",
        f"pole_pairs = {p.n_p}",
        f"inertia_kg_m2 = {p.theta_total!r}",
        f"magnet_offset_rad = {p.phi_pm!r}",
        "",
        "[converter]",
        f"u_dc_volts = {cfg.u_dc!r}",
        f"f_sw_hertz = {ctl.f_sw!r}",
        f"eps_current_amps = {cfg.eps_current!r}",
        "",
        "[controller]",
        f"k_p_volts_per_amp = {ctl.k_p_d!r}",
        f"k_i_volts_per_amp_second = {ctl.k_i_d!r}",
        f"anti_windup = {ctl.anti_windup}",
        f"i_aw_max_amps = {ctl.i_aw_max!r}",
        f"modulation = {mod_name}",
        f"injection = {'on' if ctl.injection_on else 'off'}",
        f"injection_phi0_deg = {_exact_degrees(ctl.injection_phi0)!r}",
        f"injection_exact = {'on' if ctl.injection_exact else 'off'}",
        "",
        "[references]",
        f"i_d_ref_amps = {cfg.i_d_ref!r}",
        f"i_q_ref_amps = {cfg.i_q_ref!r}",
        "",
        "[fault]",
        f"switch = {cfg.fault}",
        f"t_on_seconds = {cfg.t_fault_on!r}",
        "",
        "[load]",
        f"mode = {cfg.load.kind}",
        f"omega_ref_rad_per_second = {cfg.load.omega_ref!r}",
    ]
    if cfg.load.kind == "speed_pi":
        lines += [
            f"k_p_newton_metre_seconds = {cfg.load.k_p!r}",
            f"k_i_newton_metres = {cfg.load.k_i!r}",
            f"m_max_newton_metres = {cfg.load.m_max!r}",
        ]
    if cfg.timeline:
        lines += ["", "[timeline]", "events ="]
        for ev in cfg.timeline:
            state = "on" if ev.enable else "off"
            lines.append(f"    {ev.t!r} {ev.feature} {state}")
    return "\n".join(lines) + "\n"
