"""Waveform measures and parameter sweeps.

Harmonic content is measured by correlating the signal with sine and
cosine at exact integer multiples of the fundamental over a window
trimmed to whole fundamental periods; no window function, no spectral
interpolation.  Distortion is the usual ratio of the rms of harmonics
2..N to the rms of the fundamental.
"""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import AnalysisError, ConfigError
from .modulation import ModulationMode
from .simulator import SimConfig, run

N_HARMONICS = 50
MIN_PERIODS = 5
SWEEP_DISCARD = 0.6          # fraction of a run dropped as transient
SWEEP_MIN_PERIODS = 10       # fundamental periods required after the cut


@dataclass(frozen=True)
class HarmonicSpectrum:
    f_fund: float
    i_rms: np.ndarray    # rms magnitudes of harmonic orders 1..N

    @property
    def fundamental(self) -> float:
        return float(self.i_rms[0])

    @property
    def distortion(self) -> float:
        return math.sqrt(float(np.sum(self.i_rms[1:] ** 2))) / self.fundamental


def harmonic_spectrum(x, fs: float, f_fund: float,
                      n_harmonics: int = N_HARMONICS) -> HarmonicSpectrum:
    """Fourier magnitudes at orders 1..n over whole fundamental periods.

    The window keeps the last k full periods of x (k >= 5 required); a
    fractional number of samples per period is allowed, the correlation
    runs at the exact harmonic frequencies either way.
    """
    x = np.asarray(x, dtype=float)
    period_samples = fs / f_fund
    # the 1e-9 absorbs float dust when the window is meant to be an
    # exact number of periods
    k = int(x.shape[0] / period_samples + 1e-9)
    if k < MIN_PERIODS:
        raise AnalysisError(
            f"window holds {k} fundamental periods, need >= {MIN_PERIODS}")
    m = min(int(round(k * period_samples)), x.shape[0])
    x = x[-m:]
    t = np.arange(m) / fs
    base = np.exp(-2j * math.pi * f_fund * t)
    corr = np.ones(m, dtype=complex)
    mags = np.empty(n_harmonics)
    for order in range(1, n_harmonics + 1):
        corr = corr * base
        c = 2.0 * np.dot(x, corr) / m
        mags[order - 1] = abs(c) / math.sqrt(2.0)
    return HarmonicSpectrum(f_fund, mags)


def thd(x, fs: float, f_fund: float, n_harmonics: int = N_HARMONICS) -> float:
    """Total harmonic distortion of x as a fraction (0.05 = 5 percent)."""
    spec = harmonic_spectrum(x, fs, f_fund, n_harmonics)
    peak = float(np.max(np.abs(np.asarray(x, dtype=float))))
    if spec.fundamental < 1e-9 * peak or peak == 0.0:
        raise AnalysisError("fundamental too small, distortion undefined")
    return spec.distortion


def power_pq(u_dq, i_dq) -> tuple[float, float]:
    """Active and reactive power from rotating-frame voltage and current."""
    u = np.asarray(u_dq, dtype=float)
    i = np.asarray(i_dq, dtype=float)
    p = 1.5 * (u[0] * i[0] + u[1] * i[1])
    q = 1.5 * (u[1] * i[0] - u[0] * i[1])
    return p, q


def phase_angle(u_s, i_s) -> float:
    """Angle in [0, 2pi) by which the voltage vector leads the current."""
    u = np.asarray(u_s, dtype=float)
    i = np.asarray(i_s, dtype=float)
    ang = math.atan2(u[1], u[0]) - math.atan2(i[1], i[0])
    return ang % (2.0 * math.pi)


def vector_phasor(x_s, fs: float, f_fund: float) -> complex:
    """Complex amplitude of the positively rotating fundamental of a
    stationary-frame vector signal x_s with shape (n, 2)."""
    x = np.asarray(x_s, dtype=float)
    period_samples = fs / f_fund
    k = int(x.shape[0] / period_samples + 1e-9)
    if k < MIN_PERIODS:
        raise AnalysisError(
            f"window holds {k} fundamental periods, need >= {MIN_PERIODS}")
    m = min(int(round(k * period_samples)), x.shape[0])
    z = x[-m:, 0] + 1j * x[-m:, 1]
    t = np.arange(m) / fs
    return np.sum(z * np.exp(-2j * math.pi * f_fund * t)) / m


@dataclass(frozen=True)
class SweepResult:
    phi0_deg: np.ndarray
    thd: np.ndarray

    @property
    def argmin_deg(self) -> float:
        return float(self.phi0_deg[int(np.argmin(self.thd))])

    def to_csv(self, path) -> None:
        with open(path, "w") as f:
            f.write("phi0_deg,thd\n")
            for ang, val in zip(self.phi0_deg, self.thd):
                f.write(f"{ang:.10g},{val:.10g}\n")


def interval_thd(trace, cfg: SimConfig, t_start: float, t_end: float,
                 n_periods: int = 6, phase: int = 0) -> float:
    """Distortion of one phase current over the settled tail of a time
    interval: the last n_periods whole fundamental periods before t_end,
    with the fundamental taken from the mean speed across the interval."""
    fs = 1.0 / cfg.h
    i0, i1 = int(round(t_start * fs)), int(round(t_end * fs))
    i1 = min(i1, len(trace))
    if not 0 <= i0 < i1:
        raise AnalysisError("interval lies outside the trace")
    omega_mean = float(np.mean(trace.omega_m[i0:i1]))
    f_fund = cfg.machine.n_p * omega_mean / (2.0 * math.pi)
    if f_fund <= 0.0:
        raise AnalysisError("fundamental frequency not positive in the window")
    # the 0.1-period pad keeps n_periods whole periods inside after trimming
    n_tail = int((n_periods + 0.1) * fs / f_fund)
    if n_tail > i1 - i0:
        raise AnalysisError(
            f"interval too short for {n_periods} fundamental periods")
    return thd(trace.i_abc[i1 - n_tail:i1, phase], fs, f_fund)


def steady_window_thd(trace, cfg: SimConfig) -> float:
    """Distortion of phase a over the steady tail of a run: the first 60
    percent is dropped, at least 10 fundamental periods must remain."""
    n = len(trace)
    start = int(n * SWEEP_DISCARD)
    tail = trace.i_abc[start:, 0]
    omega_mean = float(np.mean(trace.omega_m[start:]))
    f_fund = cfg.machine.n_p * omega_mean / (2.0 * math.pi)
    if f_fund <= 0.0:
        raise AnalysisError("fundamental frequency not positive in the window")
    fs = 1.0 / cfg.h
    if tail.shape[0] * f_fund / fs < SWEEP_MIN_PERIODS:
        raise ConfigError(
            "run too short: the steady window must hold at least "
            f"{SWEEP_MIN_PERIODS} fundamental periods")
    return thd(tail, fs, f_fund)


def _sweep_point(args) -> float:
    cfg, phi0_deg = args
    cfg = replace(cfg, controller=replace(
        cfg.controller, injection_on=True,
        injection_phi0=math.radians(phi0_deg)))
    return steady_window_thd(run(cfg), cfg)


def sweep_phi0(cfg: SimConfig, grid_deg, workers: int | None = None) -> SweepResult:
    """Distortion of phase a as a function of the injection angle.

    The scenario must already be the mitigated faulty drive (fault
    present, extended anti-windup, flat-top modulation); each grid point
    reruns it with injection at that angle.  Points are evaluated in
    parallel worker processes and returned in grid order.
    """
    if not cfg.fault.is_fault:
        raise ConfigError("sweep needs a faulted scenario")
    if cfg.controller.anti_windup != "extended":
        raise ConfigError("sweep needs extended anti-windup")
    if cfg.controller.modulation not in (ModulationMode.FLAT_TOP_LOW,
                                         ModulationMode.FLAT_TOP_HIGH):
        raise ConfigError("sweep needs flat-top modulation")
    grid = np.asarray(list(grid_deg), dtype=float)
    if grid.size == 0:
        raise ConfigError("sweep grid must not be empty")
    jobs = [(cfg, float(a)) for a in grid]
    if workers is None:
        workers = min(os.cpu_count() or 1, grid.size)
    if workers <= 1:
        values = [_sweep_point(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(_sweep_point, jobs))
    return SweepResult(grid, np.asarray(values))
