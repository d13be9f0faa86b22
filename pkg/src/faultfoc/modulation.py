"""Space-vector modulation for the two-level converter.

A stationary-frame voltage reference is resolved into dwell times on the
two active vectors bounding its sector plus zero-vector time, then laid
out as a gate schedule across one switching period.  Two schedule
families are provided: the centre-aligned seven-segment pattern that
splits the zero time between both zero states, and five-segment
flat-top patterns that use only one zero state (all-low or all-high),
for operation with a broken upper or lower switch respectively.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .converter import ACTIVE_SWITCH_VECTORS
from .errors import ModulationError

SECTOR_WIDTH = math.pi / 3.0
_SIN_60 = math.sin(SECTOR_WIDTH)

ZERO_LOW = (0, 0, 0)
ZERO_HIGH = (1, 1, 1)


class ModulationMode(enum.Enum):
    SYMMETRIC = "symmetric"
    FLAT_TOP_LOW = "flat_top_low"     # zero state only as all-low
    FLAT_TOP_HIGH = "flat_top_high"   # zero state only as all-high


@dataclass(frozen=True)
class GateSchedule:
    """Sequence of (switch vector, dwell seconds) covering one period."""

    segments: tuple[tuple[tuple[int, int, int], float], ...]
    t_sw: float

    @property
    def total_dwell(self) -> float:
        return sum(d for _, d in self.segments)


def sector_and_theta(u_s):
    """Sector index 1..6 plus absolute and in-sector angle of a reference.

    Sectors are half-open: an angle exactly on a boundary belongs to the
    sector opening there.  A zero reference has no direction; the sector
    comes back as None.
    """
    u = np.asarray(u_s, dtype=float)
    mag = math.hypot(u[0], u[1])
    if mag < 1e-12:
        return None, 0.0, 0.0
    theta = math.atan2(u[1], u[0])
    if theta < 0.0:
        theta += 2.0 * math.pi
    if theta >= 2.0 * math.pi:
        theta = 0.0
    sector = min(int(theta / SECTOR_WIDTH), 5) + 1
    return sector, theta, theta - (sector - 1) * SECTOR_WIDTH


def u_max(u_dc: float, theta_local: float) -> float:
    """Largest synthesizable magnitude at in-sector angle theta_local.

    Runs from 2/3 u_dc on a sector edge (full dwell on one active
    vector) down to u_dc/sqrt(3) mid-sector (hexagon inradius).
    """
    if not 0.0 <= theta_local <= SECTOR_WIDTH + 1e-12:
        raise ModulationError(f"in-sector angle out of range: {theta_local}")
    return math.sqrt(3.0) / (math.sin(theta_local) + math.sqrt(3.0)
                             * math.cos(theta_local)) * (2.0 / 3.0) * u_dc


def dwell_times(u_s, u_dc: float, t_sw: float):
    """Split one period into active and zero dwell.

    Returns (t1, t2, t0, (v1, v2)) where v1 and v2 are the switch
    vectors of the active vectors opening and closing the sector and t1
    and t2 their dwell.  The reference must lie inside the hexagon;
    anything that would drive the zero dwell genuinely negative is an
    upstream saturation bug and raises.
    """
    sector, _, theta_local = sector_and_theta(u_s)
    if sector is None:
        v1, v2 = ACTIVE_SWITCH_VECTORS[0], ACTIVE_SWITCH_VECTORS[1]
        return 0.0, 0.0, t_sw, (v1, v2)
    u = np.asarray(u_s, dtype=float)
    mag = math.hypot(u[0], u[1])
    scale = t_sw * mag / ((2.0 / 3.0) * u_dc * _SIN_60)
    t1 = scale * math.sin(SECTOR_WIDTH - theta_local)
    t2 = scale * math.sin(theta_local)
    t0 = t_sw - t1 - t2
    if t0 < -1e-12:
        raise ModulationError(
            f"reference exceeds the synthesizable region (t0 = {t0:.3e} s)")
    t0 = max(t0, 0.0)
    v1 = ACTIVE_SWITCH_VECTORS[sector - 1]
    v2 = ACTIVE_SWITCH_VECTORS[sector % 6]
    return t1, t2, t0, (v1, v2)


def gate_schedule(t1: float, t2: float, t0: float, sector,
                  mode: ModulationMode, t_sw: float) -> GateSchedule:
    """Lay dwell times out as switching segments over one period.

    Every transition between neighbouring segments toggles exactly one
    leg.  In odd sectors the sector-opening active vector has a single
    leg high and therefore sits next to the all-low state; in even
    sectors the roles swap.  Flat-top schedules keep the active vector
    adjacent to their single zero state one toggle away from it.
    """
    if sector is None:
        sector = 1
    v1 = ACTIVE_SWITCH_VECTORS[sector - 1]
    v2 = ACTIVE_SWITCH_VECTORS[sector % 6]
    if sector % 2 == 1:
        lone, pair = v1, v2          # one leg high / two legs high
        t_lone, t_pair = t1, t2
    else:
        lone, pair = v2, v1
        t_lone, t_pair = t2, t1
    if mode is ModulationMode.SYMMETRIC:
        segs = ((ZERO_LOW, 0.25 * t0),
                (lone, 0.5 * t_lone),
                (pair, 0.5 * t_pair),
                (ZERO_HIGH, 0.5 * t0),
                (pair, 0.5 * t_pair),
                (lone, 0.5 * t_lone),
                (ZERO_LOW, 0.25 * t0))
    elif mode is ModulationMode.FLAT_TOP_LOW:
        segs = ((ZERO_LOW, 0.5 * t0),
                (lone, 0.5 * t_lone),
                (pair, t_pair),
                (lone, 0.5 * t_lone),
                (ZERO_LOW, 0.5 * t0))
    elif mode is ModulationMode.FLAT_TOP_HIGH:
        segs = ((ZERO_HIGH, 0.5 * t0),
                (pair, 0.5 * t_pair),
                (lone, t_lone),
                (pair, 0.5 * t_pair),
                (ZERO_HIGH, 0.5 * t0))
    else:
        raise ModulationError(f"unknown modulation mode {mode!r}")
    return GateSchedule(segs, t_sw)


def expand_to_grid(schedule: GateSchedule, h: float) -> np.ndarray:
    """Per-step switch vectors with edges snapped to the integration grid.

    Segment boundaries are rounded to the nearest multiple of h; the
    residual volt-second error of the snapped schedule is accepted.
    Returns an (n_steps, 3) int8 array.
    """
    n_steps = round(schedule.t_sw / h)
    out = np.empty((n_steps, 3), dtype=np.int8)
    edge = 0
    acc = 0.0
    for k, (vec, dwell) in enumerate(schedule.segments):
        acc += dwell
        nxt = n_steps if k == len(schedule.segments) - 1 else round(acc / h)
        nxt = min(max(nxt, edge), n_steps)
        out[edge:nxt] = vec
        edge = nxt
    return out
