"""Exception types shared across the package."""


class AttsafeError(Exception):
    """Base class for package errors."""


class CareSolverError(AttsafeError):
    """Riccati solver failed to converge; carries the last residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class IntegrationError(AttsafeError):
    """Integrator produced a non-finite state."""


class SafetyViolationError(AttsafeError):
    """State left the reaction-wheel momentum box (barrier set)."""


class ConfigError(AttsafeError):
    """Experiment configuration failed validation."""


class SimulationAborted(AttsafeError):
    """Closed-loop run aborted; the partial trajectory is attached."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory
