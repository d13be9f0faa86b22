"""Reference-frame transforms for three-phase quantities.

Amplitude-invariant scaling throughout: a balanced three-phase set with
peak X maps to a stationary-frame vector of length X.  Angles are
electrical radians and stay unwrapped; callers never see modulo
arithmetic on rotor position.
"""

import math

import numpy as np

_SQRT3_2 = math.sqrt(3.0) / 2.0

# 2x3 projection, zero-sequence component discarded
_CLARKE = (2.0 / 3.0) * np.array([[1.0, -0.5, -0.5],
                                  [0.0, _SQRT3_2, -_SQRT3_2]])

# right inverse of the projection; columns sum to zero, so balanced sets
# round-trip exactly
_CLARKE_INV = np.array([[1.0, 0.0],
                        [-0.5, _SQRT3_2],
                        [-0.5, -_SQRT3_2]])


def clarke(x_abc) -> np.ndarray:
    """Project phase quantities (a, b, c) onto the stationary plane."""
    return _CLARKE @ np.asarray(x_abc, dtype=float)


def inverse_clarke(x_s) -> np.ndarray:
    """Expand a stationary-frame vector into zero-sum phase quantities."""
    return _CLARKE_INV @ np.asarray(x_s, dtype=float)


def park(x_s, angle: float) -> np.ndarray:
    """Resolve a stationary-frame vector in the frame rotated to `angle`."""
    c, s = math.cos(angle), math.sin(angle)
    x = np.asarray(x_s, dtype=float)
    return np.array([c * x[0] + s * x[1],
                     -s * x[0] + c * x[1]])


def inverse_park(x_r, angle: float) -> np.ndarray:
    """Map a rotating-frame vector back to stationary coordinates."""
    c, s = math.cos(angle), math.sin(angle)
    x = np.asarray(x_r, dtype=float)
    return np.array([c * x[0] - s * x[1],
                     s * x[0] + c * x[1]])


def electrical_angle(n_p: int, phi_m: float, phi_pm: float = 0.0) -> float:
    """Rotor flux angle seen from the stator: n_p * (phi_m + phi_pm)."""
    return n_p * (phi_m + phi_pm)
