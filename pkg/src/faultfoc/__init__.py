"""Open-switch converter faults in a PM generator drive.

Simulates a permanent-magnet synchronous generator fed by a two-level
converter on a fixed microsecond grid, with injectable open-switch
faults and the control measures that keep the drive usable afterwards:
converter-aware anti-windup, single-zero-state modulation, and reactive
current injection.
"""

from .analysis import (HarmonicSpectrum, SweepResult, harmonic_spectrum,
                       interval_thd, phase_angle, power_pq,
                       steady_window_thd, sweep_phi0, thd, vector_phasor)
from .controller import (ControllerConfig, ControllerState, ControlOutput,
                         controller_step, d_current_reference,
                         tune_magnitude_optimum)
from .converter import (EPS_CURRENT, FaultSpec, circuit_matrix,
                        circuit_voltage, current_sign, faulty_voltage,
                        feasible_sectors, healthy_voltage, switching_matrix)
from .errors import (AnalysisError, ConfigError, ModulationError,
                     ScenarioError, SimulationDiverged)
from .modulation import (GateSchedule, ModulationMode, dwell_times,
                         expand_to_grid, gate_schedule, sector_and_theta,
                         u_max)
from .pmsm import MachineParams, MachineState
from .scenario import dump_scenario, load_scenario, parse_scenario
from .simulator import (FeatureEvent, LoadModel, SimConfig, Trace,
                        e3_intervals, e3_timeline, run, run_scenario_e3)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
