"""Two-level converter with open-switch fault behaviour.

A healthy leg connects its machine terminal to the rail selected by the
commanded switch state.  When one switch of a leg is permanently open,
commanding the broken path leaves the leg floating: the freewheeling
diode that the instantaneous phase current keeps forward-biased clamps
the terminal to a rail, and with no current flowing the leg blocks and
is modelled at the DC-link midpoint.

Phase voltages are terminal potentials minus the star-point mean, which
gives linear maps u = (u_dc/3) * S @ sel where sel is the commanded
switch vector for upper-switch faults and its complement for
lower-switch faults.  The per-case matrices S are tabulated below and
can be regenerated from the circuit rules via `circuit_matrix`.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

#: dead band (A) inside which a phase current counts as zero
EPS_CURRENT = 1e-4

PHASES = ("a", "b", "c")

#: healthy phase-voltage map, u = (u_dc/3) * HEALTHY @ s
HEALTHY = np.array([[2.0, -1.0, -1.0],
                    [-1.0, 2.0, -1.0],
                    [-1.0, -1.0, 2.0]])

#: active switch vectors ordered by output voltage angle, 0 to 300 degrees
ACTIVE_SWITCH_VECTORS = ((1, 0, 0), (1, 1, 0), (0, 1, 0),
                         (0, 1, 1), (0, 0, 1), (1, 0, 1))


@dataclass(frozen=True)
class FaultSpec:
    """Location of a permanently open switch, or no fault at all."""

    side: str | None = None   # "upper" | "lower" | None
    phase: str | None = None  # "a" | "b" | "c" | None

    def __post_init__(self):
        if (self.side is None) != (self.phase is None):
            raise ConfigError("fault side and phase must be given together")
        if self.side is not None and self.side not in ("upper", "lower"):
            raise ConfigError(f"unknown fault side {self.side!r}")
        if self.phase is not None and self.phase not in PHASES:
            raise ConfigError(f"unknown fault phase {self.phase!r}")

    @property
    def is_fault(self) -> bool:
        return self.side is not None

    @property
    def phase_index(self) -> int:
        if self.phase is None:
            raise ConfigError("healthy converter has no fault phase")
        return PHASES.index(self.phase)

    @classmethod
    def none(cls) -> "FaultSpec":
        return cls()

    @classmethod
    def upper(cls, phase: str) -> "FaultSpec":
        return cls("upper", phase)

    @classmethod
    def lower(cls, phase: str) -> "FaultSpec":
        return cls("lower", phase)

    @classmethod
    def parse(cls, text: str) -> "FaultSpec":
        """Read "none", "upper_a", "lower_c", ... as written in scenarios."""
        text = text.strip().lower()
        if text in ("none", ""):
            return cls.none()
        try:
            side, phase = text.split("_")
            return cls(side, phase)
        except (ValueError, ConfigError):
            raise ConfigError(f"cannot parse fault spec {text!r}") from None

    def __str__(self) -> str:
        return f"{self.side}_{self.phase}" if self.is_fault else "none"


def current_sign(i: float, eps: float = EPS_CURRENT) -> int:
    """Sign of a phase current with a +-eps dead band treated as zero."""
    if i > eps:
        return 1
    if i < -eps:
        return -1
    return 0


# Switching matrices per (fault side, fault phase, current sign).  Upper
# rows apply to the commanded switch vector s, lower rows to its
# complement 1 - s.  Sign -1/0/+1 refers to the faulty phase current.
SWITCHING_MATRICES = {
    ("upper", "a", -1): [[2, -1, -1], [-1, 2, -1], [-1, -1, 2]],
    ("upper", "a", 0): [[1, -1, -1], [-0.5, 2, -1], [-0.5, -1, 2]],
    ("upper", "a", 1): [[0, -1, -1], [0, 2, -1], [0, -1, 2]],
    ("upper", "b", -1): [[2, -1, -1], [-1, 2, -1], [-1, -1, 2]],
    ("upper", "b", 0): [[2, -0.5, -1], [-1, 1, -1], [-1, -0.5, 2]],
    ("upper", "b", 1): [[2, 0, -1], [-1, 0, -1], [-1, 0, 2]],
    ("upper", "c", -1): [[2, -1, -1], [-1, 2, -1], [-1, -1, 2]],
    ("upper", "c", 0): [[2, -1, -0.5], [-1, 2, -0.5], [-1, -1, 1]],
    ("upper", "c", 1): [[2, -1, 0], [-1, 2, 0], [-1, -1, 0]],
    ("lower", "a", -1): [[0, 1, 1], [0, -2, 1], [0, 1, -2]],
    ("lower", "a", 0): [[-1, 1, 1], [0.5, -2, 1], [0.5, 1, -2]],
    ("lower", "a", 1): [[-2, 1, 1], [1, -2, 1], [1, 1, -2]],
    ("lower", "b", -1): [[-2, 0, 1], [1, 0, 1], [1, 0, -2]],
    ("lower", "b", 0): [[-2, 0.5, 1], [1, -1, 1], [1, 0.5, -2]],
    ("lower", "b", 1): [[-2, 1, 1], [1, -2, 1], [1, 1, -2]],
    ("lower", "c", -1): [[-2, 1, 0], [1, -2, 0], [1, 1, 0]],
    ("lower", "c", 0): [[-2, 1, 0.5], [1, -2, 0.5], [1, 1, -1]],
    ("lower", "c", 1): [[-2, 1, 1], [1, -2, 1], [1, 1, -2]],
}
SWITCHING_MATRICES = {k: np.array(v, dtype=float)
                      for k, v in SWITCHING_MATRICES.items()}


def switching_matrix(fault: FaultSpec, sign: int):
    """Voltage map for a faulted converter at the given current sign.

    Returns (matrix, negate_selector): the matrix multiplies the
    commanded switch vector directly when negate_selector is False and
    its complement 1 - s when True.
    """
    if not fault.is_fault:
        raise ConfigError("switching_matrix needs an actual fault")
    if sign not in (-1, 0, 1):
        raise ConfigError(f"current sign must be -1, 0 or +1, got {sign!r}")
    return SWITCHING_MATRICES[(fault.side, fault.phase, sign)], fault.side == "lower"


def healthy_voltage(u_dc: float, s) -> np.ndarray:
    """Phase voltages of the intact converter for switch vector s."""
    return (u_dc / 3.0) * (HEALTHY @ np.asarray(s, dtype=float))


def faulty_voltage(u_dc: float, s, fault: FaultSpec, i_abc,
                   eps: float = EPS_CURRENT) -> np.ndarray:
    """Phase voltages with an open switch, given the instantaneous currents."""
    if not fault.is_fault:
        return healthy_voltage(u_dc, s)
    sign = current_sign(float(np.asarray(i_abc)[fault.phase_index]), eps)
    mat, negate = switching_matrix(fault, sign)
    sel = np.asarray(s, dtype=float)
    if negate:
        sel = 1.0 - sel
    return (u_dc / 3.0) * (mat @ sel)


def circuit_voltage(u_dc: float, s, fault: FaultSpec, sign: int) -> np.ndarray:
    """Phase voltages enumerated from the leg circuits, no tabulated maps.

    Each working leg sits at the rail its command selects.  A leg whose
    commanded switch is the broken one is clamped by whichever diode the
    current direction forward-biases (current into the converter lifts
    the terminal to the positive rail, current out of it pulls the
    terminal to the negative rail) and floats at the midpoint when the
    current is zero.  The star-point mean is removed at the end.
    """
    s = np.asarray(s)
    v = np.empty(3)
    for k in range(3):
        commanded_high = bool(s[k])
        if fault.is_fault and k == fault.phase_index:
            broken_high = fault.side == "upper"
            if commanded_high != broken_high:
                # the commanded switch of this pair still works
                v[k] = u_dc if commanded_high else 0.0
            elif sign < 0:
                v[k] = u_dc
            elif sign > 0:
                v[k] = 0.0
            else:
                v[k] = 0.5 * u_dc
        else:
            v[k] = u_dc if commanded_high else 0.0
    return v - v.mean()


def circuit_matrix(fault: FaultSpec, sign: int) -> np.ndarray:
    """Rebuild a switching matrix column-by-column from `circuit_voltage`.

    Uses u_dc = 3 so matrix entries come out directly; the selector
    convention matches `switching_matrix` (complemented commands for
    lower-switch faults).
    """
    negate = fault.is_fault and fault.side == "lower"
    cols = []
    for k in range(3):
        sel = np.zeros(3, dtype=int)
        sel[k] = 1
        s = 1 - sel if negate else sel
        cols.append(circuit_voltage(3.0, s, fault, sign))
    return np.column_stack(cols)


def feasible_sectors(fault: FaultSpec, sign: int) -> set[int]:
    """Sectors whose two bounding active vectors remain reachable.

    A sector counts as feasible when both healthy active voltage vectors
    at its edges are still produced by some switch command under the
    fault, so any reference inside it can be synthesized exactly.
    """
    if not fault.is_fault:
        return set(range(1, 7))
    produced = []
    for bits in range(8):
        s = ((bits >> 2) & 1, (bits >> 1) & 1, bits & 1)
        produced.append(circuit_voltage(3.0, s, fault, sign))
    reachable = []
    for sv in ACTIVE_SWITCH_VECTORS:
        target = healthy_voltage(3.0, sv)
        reachable.append(any(np.allclose(target, u, atol=1e-12) for u in produced))
    return {k + 1 for k in range(6) if reachable[k] and reachable[(k + 1) % 6]}
