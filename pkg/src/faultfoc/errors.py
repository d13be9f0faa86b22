"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A parameter set or scenario violates its constraints."""


class ScenarioError(ConfigError):
    """A scenario file could not be parsed or validated."""


class ModulationError(ValueError):
    """A voltage reference cannot be synthesized within one switching period."""


class AnalysisError(ValueError):
    """A signal window is unsuitable for the requested measurement."""


class SimulationDiverged(RuntimeError):
    """Integration produced a non-finite state."""

    def __init__(self, t_bad: float, t_last_good: float):
        self.t_bad = t_bad
        self.t_last_good = t_last_good
        super().__init__(
            f"state became non-finite at t={t_bad:.6e} s "
            f"(last finite state at t={t_last_good:.6e} s)"
        )
